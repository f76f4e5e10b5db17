#include "kgrat/bench.hpp"

#include <algorithm>
#include <chrono>

#include "kgrat/error.hpp"
#include "kgrat/graph_gen.hpp"
#include "kgrat/multipath_astar.hpp"
#include "kgrat/random.hpp"

namespace kgrat {
namespace {

std::vector<std::uint32_t> costs(const SearchReport& r) {
  std::vector<std::uint32_t> out;
  for (const auto& p : r.paths) out.push_back(p.cost());
  return out;
}

double ms(const SearchReport& r) {
  return std::chrono::duration<double, std::milli>(r.wall_time).count();
}

}  // namespace

double BenchQuery::ratio() const {
  if (zero_expanded == 0) return 1.0;
  return static_cast<double>(landmark_expanded) / static_cast<double>(zero_expanded);
}

BenchResult run_bench(const BenchConfig& cfg) {
  return run_bench(gen::barabasi_albert(cfg.nodes, cfg.edges_per_node, cfg.relations, cfg.seed),
                   cfg);
}

BenchResult run_bench(const KnowledgeGraph& g, const BenchConfig& cfg) {
  cfg.heuristic.validate();
  if (g.entity_count() == 0) throw ConfigError("bench needs a non-empty graph");
  Rng rng(cfg.seed ^ 0x5bd1e995ULL);
  BenchResult out;

  SearchConfig sc;
  sc.max_paths = cfg.max_paths;
  sc.max_depth = cfg.max_depth;
  sc.traversal = cfg.heuristic.traversal;

  const std::uint32_t lo = std::min<std::uint32_t>(2, cfg.max_depth);
  std::size_t attempts = 0;
  while (out.queries.size() < cfg.queries && attempts < cfg.queries * 100) {
    ++attempts;
    const EntityId start(static_cast<std::uint32_t>(rng.below(g.entity_count())));
    const auto ball = truncated_bfs(g, start, sc.traversal, cfg.max_depth);
    std::vector<std::pair<EntityId, std::uint32_t>> pool;
    for (const auto& [e, d] : ball) {
      if (d >= lo) pool.emplace_back(e, d);
    }
    if (pool.empty()) continue;
    std::sort(pool.begin(), pool.end());
    const auto [goal, dist] = pool[rng.below(pool.size())];

    BenchQuery q;
    q.start = start;
    q.goal = goal;
    q.distance = dist;
    auto hc = cfg.heuristic;
    hc.rng_seed = cfg.heuristic.rng_seed ^ rng.next();
    const auto table = make_landmarks(g, goal, hc);

    SearchConfig zero = sc;
    const auto rz = find_paths(g, start, goal, zero);
    SearchConfig guided = sc;
    guided.heuristic = &table;
    const auto rl = find_paths(g, start, goal, guided);
    q.zero_expanded = rz.nodes_expanded;
    q.landmark_expanded = rl.nodes_expanded;
    q.zero_ms = ms(rz);
    q.landmark_ms = ms(rl);
    q.costs_agree = costs(rz) == costs(rl);
    if (cfg.run_oracle) {
      const auto ro = find_paths_bfs_oracle(g, start, goal, sc);
      q.oracle_expanded = ro.nodes_expanded;
      q.oracle_ms = ms(ro);
      q.costs_agree = q.costs_agree && costs(ro) == costs(rl);
    }
    out.queries.push_back(q);
  }

  double ratio_sum = 0.0, speedup_sum = 0.0;
  for (const auto& q : out.queries) {
    if (q.landmark_expanded <= q.zero_expanded) ++out.dominated;
    if (q.landmark_expanded < q.zero_expanded) ++out.strictly_better;
    if (q.costs_agree) ++out.cost_agreements;
    ratio_sum += q.ratio();
    speedup_sum += q.landmark_expanded == 0
                       ? 1.0
                       : static_cast<double>(q.zero_expanded) /
                             static_cast<double>(q.landmark_expanded);
  }
  if (!out.queries.empty()) {
    out.mean_ratio = ratio_sum / static_cast<double>(out.queries.size());
    out.mean_speedup = speedup_sum / static_cast<double>(out.queries.size());
  }

  for (std::size_t i = 0; i < cfg.tiny_graphs; ++i) {
    const auto tg = gen::uniform_random(cfg.tiny_nodes, cfg.tiny_nodes * 2, 2, rng.next());
    const EntityId s(0);
    const EntityId t(static_cast<std::uint32_t>(tg.entity_count() - 1));
    const auto table = make_landmarks(tg, t, cfg.heuristic);
    SearchConfig guided = sc;
    guided.heuristic = &table;
    const auto a = costs(find_paths(tg, s, t, guided));
    const auto b = costs(find_paths(tg, s, t, sc));
    const auto c = costs(find_paths_bfs_oracle(tg, s, t, sc));
    ++out.tiny_cases;
    if (a == b && b == c) ++out.tiny_agreements;
  }
  return out;
}

nlohmann::ordered_json bench_to_json(const BenchResult& r, const KnowledgeGraph* g) {
  nlohmann::ordered_json j;
  j["queries"] = r.queries.size();
  j["dominated"] = r.dominated;
  j["strictly_better"] = r.strictly_better;
  j["cost_agreements"] = r.cost_agreements;
  j["mean_ratio"] = r.mean_ratio;
  j["mean_speedup"] = r.mean_speedup;
  j["tiny_cases"] = r.tiny_cases;
  j["tiny_agreements"] = r.tiny_agreements;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& q : r.queries) {
    nlohmann::ordered_json row;
    if (g != nullptr) {
      row["start"] = g->entity_label(q.start);
      row["goal"] = g->entity_label(q.goal);
    } else {
      row["start"] = q.start.value();
      row["goal"] = q.goal.value();
    }
    row["distance"] = q.distance;
    row["landmark_expanded"] = q.landmark_expanded;
    row["zero_expanded"] = q.zero_expanded;
    row["oracle_expanded"] = q.oracle_expanded;
    row["landmark_ms"] = q.landmark_ms;
    row["zero_ms"] = q.zero_ms;
    row["oracle_ms"] = q.oracle_ms;
    row["costs_agree"] = q.costs_agree;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace kgrat
