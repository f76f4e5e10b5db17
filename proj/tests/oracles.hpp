#pragma once

// Test-only reference implementations built from the raw triple list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kgrat/kg_store.hpp"

namespace kgrat::oracle {

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

// Undirected or directed adjacency as plain vectors of entity indices.
inline std::vector<std::vector<std::uint32_t>> adjacency(const KnowledgeGraph& g, Traversal t) {
  std::vector<std::vector<std::uint32_t>> adj(g.entity_count());
  for (const auto& tr : g.triples()) {
    const auto s = tr.subject.value();
    const auto o = tr.object.value();
    if (t != Traversal::kIncoming) adj[s].push_back(o);
    if (t != Traversal::kOutgoing) adj[o].push_back(s);
  }
  return adj;
}

// Full BFS hop distances from `source`; unreachable entities get kInf.
inline std::vector<std::uint32_t> bfs(const KnowledgeGraph& g, std::uint32_t source,
                                      Traversal t) {
  const auto adj = adjacency(g, t);
  std::vector<std::uint32_t> dist(g.entity_count(), kInf);
  std::deque<std::uint32_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto v : adj[u]) {
      if (dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Distance from every entity to `goal` along traversal `t`.
inline std::vector<std::uint32_t> distances_to(const KnowledgeGraph& g, std::uint32_t goal,
                                               Traversal t) {
  return bfs(g, goal, reversed(t));
}

struct Edge {
  std::uint32_t to;
  std::uint32_t relation;
  bool forward;
};

// Costs of every loopless path of at most `max_depth` hops, counting
// parallel edges and both orientations separately, in ascending order.
inline std::vector<std::uint32_t> all_simple_path_costs(const KnowledgeGraph& g,
                                                        std::uint32_t start, std::uint32_t goal,
                                                        std::uint32_t max_depth, Traversal t) {
  std::vector<std::vector<Edge>> adj(g.entity_count());
  for (const auto& tr : g.triples()) {
    const auto s = tr.subject.value();
    const auto o = tr.object.value();
    if (t != Traversal::kIncoming) adj[s].push_back({o, tr.relation.value(), true});
    if (t != Traversal::kOutgoing) adj[o].push_back({s, tr.relation.value(), false});
  }
  std::vector<std::uint32_t> costs;
  if (start == goal) {
    costs.push_back(0);
    return costs;
  }
  std::vector<bool> on_path(g.entity_count(), false);
  on_path[start] = true;
  auto dfs = [&](auto&& self, std::uint32_t u, std::uint32_t depth) -> void {
    if (depth == max_depth) return;
    for (const auto& e : adj[u]) {
      if (on_path[e.to]) continue;
      if (e.to == goal) {
        costs.push_back(depth + 1);
        continue;
      }
      on_path[e.to] = true;
      self(self, e.to, depth + 1);
      on_path[e.to] = false;
    }
  };
  dfs(dfs, start, 0);
  std::sort(costs.begin(), costs.end());
  return costs;
}

// The k smallest entries of an ascending cost list.
inline std::vector<std::uint32_t> cheapest(std::vector<std::uint32_t> costs, std::size_t k) {
  if (costs.size() > k) costs.resize(k);
  return costs;
}

// sum_v p log(p / max(q, 1e-12)) written out long-hand.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double qi = q[i] < 1e-12 ? 1e-12 : q[i];
    total += p[i] * std::log(p[i] / qi);
  }
  return total;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kgrat::oracle
