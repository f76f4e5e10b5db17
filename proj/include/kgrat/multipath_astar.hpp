#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <vector>

#include "kgrat/ids.hpp"
#include "kgrat/kg_store.hpp"
#include "kgrat/landmark.hpp"

namespace kgrat {

struct PathStep {
  RelationId relation;
  Direction direction = Direction::kForward;
  EntityId entity;

  friend bool operator==(const PathStep&, const PathStep&) = default;
  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

struct ReasoningPath {
  EntityId start;
  EntityId end;
  std::vector<PathStep> steps;
  bool complete = false;

  std::uint32_t cost() const { return static_cast<std::uint32_t>(steps.size()); }

  // Entities in visiting order, start first.
  std::vector<EntityId> entities() const;

  friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

// True when no entity repeats along the path.
bool is_loopless(const ReasoningPath& p);

// True when every step is an edge of `g` in its recorded direction and the
// direction is allowed by `t`.
bool follows_graph(const ReasoningPath& p, const KnowledgeGraph& g, Traversal t);

struct SearchConfig {
  std::uint32_t max_paths = 3;
  std::uint32_t max_depth = 3;
  Traversal traversal = Traversal::kBoth;
  // Landmark heuristic built for the goal being searched; null means h = 0.
  const LandmarkTable* heuristic = nullptr;

  void validate() const;
};

struct SearchReport {
  std::vector<ReasoningPath> paths;  // non-decreasing cost
  std::uint64_t nodes_expanded = 0;
  std::uint64_t queue_pushes = 0;
  std::chrono::nanoseconds wall_time{0};
};

// Best-first search over path states ordered by f = g + h, then smaller g,
// then goal states before non-goal states, then insertion order. Each
// dequeued goal state is emitted as a path; search stops after max_paths
// paths or when the queue drains. Extensions onto an entity already on the
// path are skipped, and so are extensions whose f exceeds max_depth.
//
// nodes_expanded counts dequeued states whose neighbors were scanned.
SearchReport find_paths(const KnowledgeGraph& g, EntityId start, EntityId goal,
                        const SearchConfig& cfg);

// Exhaustive depth-first enumeration of every loopless path of at most
// max_depth hops; returns the max_paths cheapest, ties broken by step ids.
// Ignores cfg.heuristic. nodes_expanded counts every loopless extension.
SearchReport find_paths_bfs_oracle(const KnowledgeGraph& g, EntityId start,
                                   EntityId goal, const SearchConfig& cfg);

// Partial paths for a start entity that could not reach the goal: the
// longest available loopless paths (max_depth hops when possible), ranked by
// h(start) - h(end) descending, then by step ids.
SearchReport frontier_fallback(const KnowledgeGraph& g, EntityId start,
                               const SearchConfig& cfg);

// find_paths, then frontier_fallback when no complete path was found.
SearchReport find_paths_or_frontier(const KnowledgeGraph& g, EntityId start,
                                    EntityId goal, const SearchConfig& cfg);

}  // namespace kgrat
