#include "kgrat/multipath_astar.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

#include "kgrat/error.hpp"

namespace kgrat {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

struct PathState {
  std::uint32_t parent;
  PathStep step;  // step.entity is the state's entity
  std::uint32_t g;
};

struct QueueEntry {
  std::uint32_t f;
  std::uint32_t g;
  bool at_goal;
  std::uint64_t seq;
  std::uint32_t state;
};

// priority_queue pops the "largest", so this orders worse entries first.
struct WorseFirst {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    if (a.at_goal != b.at_goal) return !a.at_goal;
    return a.seq > b.seq;
  }
};

void check_endpoints(const KnowledgeGraph& g, EntityId start, EntityId goal) {
  if (!g.valid(start)) throw LookupError("start entity out of range");
  if (!g.valid(goal)) throw LookupError("goal entity out of range");
}

ReasoningPath unwind(const std::vector<PathState>& states, std::uint32_t idx, EntityId start,
                     bool complete) {
  ReasoningPath p;
  p.start = start;
  p.end = states[idx].step.entity;
  p.complete = complete;
  for (auto i = idx; states[i].parent != kNoParent; i = states[i].parent) {
    p.steps.push_back(states[i].step);
  }
  std::reverse(p.steps.begin(), p.steps.end());
  return p;
}

bool on_path(const std::vector<PathState>& states, std::uint32_t idx, EntityId e) {
  for (auto i = idx; i != kNoParent; i = states[i].parent) {
    if (states[i].step.entity == e) return true;
  }
  return false;
}

bool by_cost_then_steps(const ReasoningPath& a, const ReasoningPath& b) {
  if (a.cost() != b.cost()) return a.cost() < b.cost();
  return a.steps < b.steps;
}

// Depth-first enumeration of loopless paths from `start`. `visit` is called
// for every path prefix (including the empty one) and returns whether the
// prefix may be extended further.
template <typename Visit>
void enumerate_paths(const KnowledgeGraph& g, EntityId start, std::uint32_t max_depth,
                     Traversal t, std::uint64_t& extensions, Visit&& visit) {
  std::vector<PathStep> steps;
  std::vector<EntityId> on{start};
  auto rec = [&](auto&& self, EntityId at) -> void {
    if (!visit(at, steps) || steps.size() >= max_depth) return;
    g.for_each_neighbor(at, t, [&](const Neighbor& n) {
      if (std::find(on.begin(), on.end(), n.entity) != on.end()) return;
      ++extensions;
      steps.push_back({n.relation, n.direction, n.entity});
      on.push_back(n.entity);
      self(self, n.entity);
      on.pop_back();
      steps.pop_back();
    });
  };
  rec(rec, start);
}

}  // namespace

std::vector<EntityId> ReasoningPath::entities() const {
  std::vector<EntityId> out{start};
  for (const auto& s : steps) out.push_back(s.entity);
  return out;
}

bool is_loopless(const ReasoningPath& p) {
  auto es = p.entities();
  std::sort(es.begin(), es.end());
  return std::adjacent_find(es.begin(), es.end()) == es.end();
}

bool follows_graph(const ReasoningPath& p, const KnowledgeGraph& g, Traversal t) {
  EntityId at = p.start;
  for (const auto& s : p.steps) {
    if (s.direction == Direction::kForward) {
      if (t == Traversal::kIncoming || !g.has_triple({at, s.relation, s.entity})) return false;
    } else {
      if (t == Traversal::kOutgoing || !g.has_triple({s.entity, s.relation, at})) return false;
    }
    at = s.entity;
  }
  return at == p.end;
}

void SearchConfig::validate() const {
  if (max_paths < 1) throw ConfigError("max_paths must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
}

SearchReport find_paths(const KnowledgeGraph& g, EntityId start, EntityId goal,
                        const SearchConfig& cfg) {
  cfg.validate();
  check_endpoints(g, start, goal);
  if (cfg.heuristic != nullptr && cfg.heuristic->goal() != goal) {
    throw ConfigError("landmark table was built for a different goal");
  }
  const auto t0 = Clock::now();
  SearchReport report;
  if (start == goal) {
    report.paths.push_back({start, goal, {}, true});
    report.wall_time = Clock::now() - t0;
    return report;
  }

  auto h = [&](EntityId e) -> std::uint32_t {
    return cfg.heuristic == nullptr ? 0 : cfg.heuristic->h(e);
  };

  std::vector<PathState> states{{kNoParent, {RelationId{}, Direction::kForward, start}, 0}};
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, WorseFirst> queue;
  std::uint64_t seq = 0;
  queue.push({h(start), 0, false, seq++, 0});
  ++report.queue_pushes;

  std::set<std::vector<PathStep>> emitted;
  while (!queue.empty() && report.paths.size() < cfg.max_paths) {
    const auto top = queue.top();
    queue.pop();
    const auto& state = states[top.state];
    if (state.step.entity == goal) {
      auto path = unwind(states, top.state, start, true);
      if (emitted.insert(path.steps).second) report.paths.push_back(std::move(path));
      continue;
    }
    if (state.g >= cfg.max_depth) continue;

    ++report.nodes_expanded;
    const auto parent_idx = top.state;
    const auto g1 = state.g + 1;
    g.for_each_neighbor(state.step.entity, cfg.traversal, [&](const Neighbor& n) {
      if (on_path(states, parent_idx, n.entity)) return;
      const auto f1 = g1 + h(n.entity);
      if (f1 > cfg.max_depth) return;
      states.push_back({parent_idx, {n.relation, n.direction, n.entity}, g1});
      queue.push({f1, g1, n.entity == goal, seq++,
                  static_cast<std::uint32_t>(states.size() - 1)});
      ++report.queue_pushes;
    });
  }
  report.wall_time = Clock::now() - t0;
  return report;
}

SearchReport find_paths_bfs_oracle(const KnowledgeGraph& g, EntityId start, EntityId goal,
                                   const SearchConfig& cfg) {
  cfg.validate();
  check_endpoints(g, start, goal);
  const auto t0 = Clock::now();
  SearchReport report;
  std::vector<ReasoningPath> found;
  enumerate_paths(g, start, cfg.max_depth, cfg.traversal, report.nodes_expanded,
                  [&](EntityId at, const std::vector<PathStep>& steps) {
                    if (at != goal) return true;
                    found.push_back({start, goal, steps, true});
                    return false;
                  });
  std::sort(found.begin(), found.end(), by_cost_then_steps);
  if (found.size() > cfg.max_paths) found.resize(cfg.max_paths);
  report.paths = std::move(found);
  report.wall_time = Clock::now() - t0;
  return report;
}

SearchReport frontier_fallback(const KnowledgeGraph& g, EntityId start,
                               const SearchConfig& cfg) {
  cfg.validate();
  if (!g.valid(start)) throw LookupError("start entity out of range");
  const auto t0 = Clock::now();
  auto h = [&](EntityId e) -> long long {
    return cfg.heuristic == nullptr ? 0 : static_cast<long long>(cfg.heuristic->h(e));
  };
  const long long h_start = h(start);

  struct Candidate {
    long long decrease;
    ReasoningPath path;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.decrease != b.decrease) return a.decrease > b.decrease;
    return a.path.steps < b.path.steps;
  };

  SearchReport report;
  std::size_t best_len = 1;
  std::vector<Candidate> best;  // sorted by `better`, at most max_paths
  enumerate_paths(g, start, cfg.max_depth, cfg.traversal, report.nodes_expanded,
                  [&](EntityId at, const std::vector<PathStep>& steps) {
                    if (steps.size() < best_len) return true;
                    if (steps.size() > best_len) {
                      best.clear();
                      best_len = steps.size();
                    }
                    Candidate c{h_start - h(at), {start, at, steps, false}};
                    const auto pos = std::upper_bound(best.begin(), best.end(), c, better);
                    if (static_cast<std::size_t>(pos - best.begin()) < cfg.max_paths) {
                      best.insert(pos, std::move(c));
                      if (best.size() > cfg.max_paths) best.pop_back();
                    }
                    return true;
                  });
  for (auto& c : best) report.paths.push_back(std::move(c.path));
  report.wall_time = Clock::now() - t0;
  return report;
}

SearchReport find_paths_or_frontier(const KnowledgeGraph& g, EntityId start, EntityId goal,
                                    const SearchConfig& cfg) {
  auto report = find_paths(g, start, goal, cfg);
  if (!report.paths.empty()) return report;
  auto fallback = frontier_fallback(g, start, cfg);
  fallback.nodes_expanded += report.nodes_expanded;
  fallback.queue_pushes += report.queue_pushes;
  fallback.wall_time += report.wall_time;
  return fallback;
}

}  // namespace kgrat
