#include "kgrat/landmark.hpp"

#include <algorithm>
#include <deque>

#include "kgrat/error.hpp"
#include "kgrat/random.hpp"

namespace kgrat {

void HeuristicConfig::validate() const {
  if (anchor_count < 1) throw ConfigError("anchor_count must be >= 1");
  if (anchor_hop_radius < 1) throw ConfigError("anchor_hop_radius must be >= 1");
  if (bfs_depth < 1) throw ConfigError("bfs_depth must be >= 1");
}

std::unordered_map<EntityId, std::uint32_t> truncated_bfs(const KnowledgeGraph& g,
                                                           EntityId source, Traversal t,
                                                           std::uint32_t max_depth) {
  if (!g.valid(source)) throw LookupError("BFS source out of range");
  std::unordered_map<EntityId, std::uint32_t> dist{{source, 0}};
  std::deque<EntityId> frontier{source};
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop_front();
    const auto du = dist[u];
    if (du == max_depth) continue;
    g.for_each_neighbor(u, t, [&](const Neighbor& n) {
      if (dist.try_emplace(n.entity, du + 1).second) frontier.push_back(n.entity);
    });
  }
  return dist;
}

std::vector<EntityId> select_anchors(const KnowledgeGraph& g, EntityId goal,
                                     const HeuristicConfig& cfg) {
  cfg.validate();
  const auto ball = truncated_bfs(g, goal, reversed(cfg.traversal), cfg.anchor_hop_radius);
  std::vector<EntityId> pool;
  pool.reserve(ball.size());
  for (const auto& [e, d] : ball) {
    if (d >= 1) pool.push_back(e);
  }
  std::sort(pool.begin(), pool.end());

  Rng rng(cfg.rng_seed ^ (0x9e3779b97f4a7c15ULL * (goal.value() + 1)));
  std::vector<EntityId> anchors{goal};
  for (const auto e : rng.sample(std::move(pool), cfg.anchor_count)) anchors.push_back(e);
  return anchors;
}

LandmarkTable::LandmarkTable(const KnowledgeGraph& g, std::vector<EntityId> anchors,
                             EntityId goal, const HeuristicConfig& cfg)
    : goal_(goal), anchors_(std::move(anchors)) {
  cfg.validate();
  if (anchors_.empty()) throw ConfigError("landmark table needs at least one anchor");
  if (!g.valid(goal)) throw LookupError("goal out of range");
  dist_maps_.reserve(anchors_.size());
  for (const auto a : anchors_) {
    dist_maps_.push_back(truncated_bfs(g, a, cfg.traversal, cfg.bfs_depth));
    const auto& m = dist_maps_.back();
    const auto it = m.find(goal);
    dist_to_goal_.push_back(it == m.end() ? std::nullopt
                                          : std::optional<std::uint32_t>(it->second));
  }
}

std::optional<std::uint32_t> LandmarkTable::distance(std::size_t anchor, EntityId e) const {
  const auto& m = dist_maps_.at(anchor);
  const auto it = m.find(e);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

std::uint32_t LandmarkTable::h(EntityId e) const {
  std::uint32_t best = 0;
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    const auto& dg = dist_to_goal_[i];
    if (!dg) continue;
    const auto it = dist_maps_[i].find(e);
    if (it == dist_maps_[i].end()) continue;
    if (*dg > it->second) best = std::max(best, *dg - it->second);
  }
  return best;
}

LandmarkTable build_landmark_table(const KnowledgeGraph& g, std::vector<EntityId> anchors,
                                   EntityId goal, const HeuristicConfig& cfg) {
  return LandmarkTable(g, std::move(anchors), goal, cfg);
}

LandmarkTable make_landmarks(const KnowledgeGraph& g, EntityId goal,
                             const HeuristicConfig& cfg) {
  return LandmarkTable(g, select_anchors(g, goal, cfg), goal, cfg);
}

}  // namespace kgrat
