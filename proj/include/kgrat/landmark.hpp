#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "kgrat/ids.hpp"
#include "kgrat/kg_store.hpp"

namespace kgrat {

struct HeuristicConfig {
  std::uint32_t anchor_count = 10;
  std::uint32_t anchor_hop_radius = 3;
  std::uint32_t bfs_depth = 3;
  std::uint64_t rng_seed = 0;
  // Direction of search edges; anchors are drawn from the reverse ball so
  // that they can reach the goal.
  Traversal traversal = Traversal::kBoth;

  void validate() const;
};

// Hop distances from `source` following `t`, truncated at `max_depth`.
// Entities farther away are absent.
std::unordered_map<EntityId, std::uint32_t> truncated_bfs(const KnowledgeGraph& g,
                                                           EntityId source,
                                                           Traversal t,
                                                           std::uint32_t max_depth);

// Goal first, followed by up to anchor_count entities sampled uniformly
// without replacement from those 1..anchor_hop_radius hops from the goal.
std::vector<EntityId> select_anchors(const KnowledgeGraph& g, EntityId goal,
                                     const HeuristicConfig& cfg);

class LandmarkTable {
 public:
  LandmarkTable(const KnowledgeGraph& g, std::vector<EntityId> anchors, EntityId goal,
                const HeuristicConfig& cfg);

  EntityId goal() const { return goal_; }
  const std::vector<EntityId>& anchors() const { return anchors_; }

  // Truncated-BFS distance from anchor i, if within the BFS radius.
  std::optional<std::uint32_t> distance(std::size_t anchor, EntityId e) const;
  std::optional<std::uint32_t> distance_to_goal(std::size_t anchor) const {
    return dist_to_goal_[anchor];
  }
  const std::unordered_map<EntityId, std::uint32_t>& distances(std::size_t anchor) const {
    return dist_maps_[anchor];
  }

  // max_i [dist(anchor_i, goal) - dist(anchor_i, e)]^+, where a term with an
  // unknown distance on either side contributes 0.
  std::uint32_t h(EntityId e) const;

 private:
  EntityId goal_;
  std::vector<EntityId> anchors_;
  std::vector<std::unordered_map<EntityId, std::uint32_t>> dist_maps_;
  std::vector<std::optional<std::uint32_t>> dist_to_goal_;
};

LandmarkTable build_landmark_table(const KnowledgeGraph& g, std::vector<EntityId> anchors,
                                   EntityId goal, const HeuristicConfig& cfg);

// select_anchors followed by build_landmark_table.
LandmarkTable make_landmarks(const KnowledgeGraph& g, EntityId goal,
                             const HeuristicConfig& cfg);

}  // namespace kgrat
