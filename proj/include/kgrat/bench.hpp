#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "kgrat/kg_store.hpp"
#include "kgrat/landmark.hpp"

namespace kgrat {

struct BenchConfig {
  std::size_t nodes = 1000;
  std::size_t edges_per_node = 2;
  std::size_t relations = 4;
  std::size_t queries = 100;
  std::uint32_t max_paths = 3;
  std::uint32_t max_depth = 3;
  HeuristicConfig heuristic;
  bool run_oracle = true;
  // Small random graphs on which all three searches must agree.
  std::size_t tiny_graphs = 50;
  std::size_t tiny_nodes = 12;
  std::uint64_t seed = 7;
};

struct BenchQuery {
  EntityId start;
  EntityId goal;
  std::uint32_t distance = 0;
  std::uint64_t landmark_expanded = 0;
  std::uint64_t zero_expanded = 0;
  std::uint64_t oracle_expanded = 0;
  double landmark_ms = 0.0;
  double zero_ms = 0.0;
  double oracle_ms = 0.0;
  bool costs_agree = true;  // landmark, zero and (if run) oracle
  double ratio() const;     // landmark / zero expansions
};

struct BenchResult {
  std::vector<BenchQuery> queries;
  std::size_t dominated = 0;        // landmark <= zero
  std::size_t strictly_better = 0;  // landmark < zero
  std::size_t cost_agreements = 0;
  double mean_ratio = 0.0;
  double mean_speedup = 0.0;  // mean of zero / landmark expansions
  std::size_t tiny_cases = 0;
  std::size_t tiny_agreements = 0;
};

// Preferential-attachment graph with queries whose start/goal are 2..d
// hops apart, comparing landmark A*, zero-heuristic A* and the exhaustive
// oracle. Deterministic in cfg.seed.
BenchResult run_bench(const BenchConfig& cfg);
// Same queries on a caller-supplied graph; nodes/edges_per_node/relations
// are ignored.
BenchResult run_bench(const KnowledgeGraph& g, const BenchConfig& cfg);

nlohmann::ordered_json bench_to_json(const BenchResult& r, const KnowledgeGraph* g = nullptr);

}  // namespace kgrat
