// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "kgrat/bench.hpp"
#include "kgrat/error.hpp"
#include "kgrat/gateway.hpp"
#include "kgrat/ka_trainer.hpp"
#include "kgrat/landmark.hpp"
#include "kgrat/multipath_astar.hpp"
#include "kgrat/random.hpp"
#include "kgrat/rationale.hpp"
#include "kgrat/report_json.hpp"
#include "kgrat/synth.hpp"
#include "oracles.hpp"
#include "random_graphs.hpp"

namespace {

using namespace kgrat;

const std::filesystem::path kData = KGRAT_TEST_DATA_DIR;
const std::filesystem::path kGolden = KGRAT_TEST_GOLDEN_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<std::uint32_t> Costs(const SearchReport& r) {
  std::vector<std::uint32_t> out;
  for (const auto& p : r.paths) out.push_back(p.cost());
  return out;
}

std::vector<testing::GraphCase> SuiteGraphs() {
  std::vector<testing::GraphCase> out;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (auto& c : testing::mixed_graphs(1000 + seed, 10, 50)) out.push_back(std::move(c));
  }
  return out;
}

// Goals sampled per graph; traversal alternates so directed search is covered.
template <typename F>
void ForEachTable(const std::vector<testing::GraphCase>& graphs, F&& f) {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i].graph;
    const Traversal t = i % 4 == 3 ? Traversal::kOutgoing : Traversal::kBoth;
    for (std::uint32_t goal = 0; goal < g.entity_count(); goal += 2) {
      HeuristicConfig cfg;
      cfg.traversal = t;
      cfg.rng_seed = i * 131 + goal;
      const auto table = make_landmarks(g, EntityId(goal), cfg);
      f(graphs[i], goal, t, table);
    }
  }
}

Outcome Admissibility() {
  const auto graphs = SuiteGraphs();
  std::size_t checks = 0, violations = 0;
  ForEachTable(graphs, [&](const testing::GraphCase& c, std::uint32_t goal, Traversal t,
                           const LandmarkTable& table) {
    const auto dist = oracle::distances_to(c.graph, goal, t);
    for (std::uint32_t e = 0; e < c.graph.entity_count(); ++e) {
      if (dist[e] == oracle::kInf) continue;
      ++checks;
      if (table.h(EntityId(e)) > dist[e]) ++violations;
    }
  });
  return {violations == 0 && graphs.size() >= 200,
          std::to_string(graphs.size()) + " graphs, " + std::to_string(checks) + " checks, " +
              std::to_string(violations) + " violations"};
}

Outcome Consistency() {
  const auto graphs = SuiteGraphs();
  std::size_t checks = 0, violations = 0;
  ForEachTable(graphs, [&](const testing::GraphCase& c, std::uint32_t, Traversal t,
                           const LandmarkTable& table) {
    for (const auto& tr : c.graph.triples()) {
      const long hs = table.h(tr.subject);
      const long ho = table.h(tr.object);
      ++checks;
      // Directed search only steps subject -> object.
      const bool ok = t == Traversal::kOutgoing ? hs <= ho + 1 : std::labs(hs - ho) <= 1;
      if (!ok) ++violations;
    }
  });
  return {violations == 0, std::to_string(checks) + " edges, " + std::to_string(violations) +
                               " violations"};
}

Outcome OracleEquivalence() {
  std::size_t cases = 0, violations = 0, nonempty = 0;
  const auto graphs = testing::bounded_degree_graphs(77, 120, 30, 5);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i].graph;
    Rng rng(i);
    for (int q = 0; q < 3; ++q) {
      SearchConfig cfg;
      cfg.max_paths = 1 + static_cast<std::uint32_t>(rng.below(5));
      cfg.max_depth = 1 + static_cast<std::uint32_t>(rng.below(6));
      const EntityId s(static_cast<std::uint32_t>(rng.below(g.entity_count())));
      const EntityId t(static_cast<std::uint32_t>(rng.below(g.entity_count())));
      const auto expected = oracle::cheapest(
          oracle::all_simple_path_costs(g, s.value(), t.value(), cfg.max_depth, cfg.traversal),
          cfg.max_paths);
      HeuristicConfig hc;
      hc.rng_seed = i;
      const auto table = make_landmarks(g, t, hc);
      ++cases;
      if (!expected.empty()) ++nonempty;
      if (Costs(find_paths(g, s, t, cfg)) != expected) ++violations;
      cfg.heuristic = &table;
      if (Costs(find_paths(g, s, t, cfg)) != expected) ++violations;
    }
  }
  return {violations == 0 && graphs.size() >= 100,
          std::to_string(graphs.size()) + " graphs, " + std::to_string(cases) + " queries (" +
              std::to_string(nonempty) + " with paths), " + std::to_string(violations) +
              " mismatches"};
}

Outcome Dominance() {
  BenchConfig cfg;
  cfg.run_oracle = false;
  cfg.tiny_graphs = 0;
  const auto r = run_bench(cfg);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu queries, <= on %zu, < on %zu, mean ratio %.3f",
                r.queries.size(), r.dominated, r.strictly_better, r.mean_ratio);
  return {r.queries.size() == 100 && r.dominated == 100 && r.strictly_better >= 50 &&
              r.cost_agreements == 100,
          buf};
}

Outcome SunPath() {
  const auto g = load_graph_file(kData / "sun.tsv");
  const auto s = *g.entity_by_label("the Sun");
  const auto t = *g.entity_by_label("white light");
  const auto r = find_paths(g, s, t, {});
  if (r.paths.empty()) return {false, "no path"};
  const auto text = verbalize(r.paths[0], g);
  return {r.paths.size() == 1 && r.paths[0].cost() == 2 &&
              text == "the Sun--emits-->full-spectrum light--integrates into-->white light",
          text};
}

Outcome Prompts() {
  const auto g = load_graph_file(kData / "sun.tsv");
  const auto r = find_paths(g, *g.entity_by_label("the Sun"), *g.entity_by_label("white light"),
                            {});
  const auto rat = build_rationale_prompt("what is the true color of the Sun?", "white light",
                                          {verbalize(r.paths.at(0), g)});
  const auto fc = build_factcheck_prompt("The true color of the Sun is white.");
  const bool ok = rat == oracle::slurp(kGolden / "rationale_prompt_sun.txt") &&
                  fc == oracle::slurp(kGolden / "factcheck_prompt_sun.txt") &&
                  rat.find("Please provide a detailed explanatory rationale") !=
                      std::string::npos &&
                  fc.find("You only answer 'yes' or 'no'") != std::string::npos;
  return {ok, std::to_string(rat.size()) + " + " + std::to_string(fc.size()) + " bytes"};
}

std::vector<double> RandomDistribution(Rng& rng, std::size_t n, bool sparse) {
  std::vector<double> d(n);
  for (auto& v : d) v = (sparse && rng.below(3) == 0) ? 0.0 : rng.uniform();
  if (std::accumulate(d.begin(), d.end(), 0.0) == 0.0) d[0] = 1.0;
  const double s = std::accumulate(d.begin(), d.end(), 0.0);
  for (auto& v : d) v /= s;
  return d;
}

Outcome Kl() {
  Rng rng(2024);
  double worst_self = 0.0, worst_oracle = 0.0, min_kl = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto n = 2 + rng.below(16);
    const auto p = RandomDistribution(rng, n, i % 2 == 0);
    const auto q = RandomDistribution(rng, n, i % 3 == 0);
    const auto pq = ka::kl_loss({p}, {q}).per_position[0];
    worst_self = std::max(worst_self, std::abs(ka::kl_loss({p}, {p}).per_position[0]));
    worst_oracle = std::max(worst_oracle, std::abs(pq - oracle::kl(p, q)));
    min_kl = std::min(min_kl, pq);
  }
  const double hand = ka::kl_loss({{1.0, 0.0}}, {{0.5, 0.5}}).mean;
  char buf[200];
  std::snprintf(buf, sizeof buf, "self %.2e, hand err %.2e, min %.2e, oracle err %.2e",
                worst_self, std::abs(hand - std::log(2.0)), min_kl, worst_oracle);
  return {worst_self < 1e-10 && std::abs(hand - std::log(2.0)) < 1e-9 && min_kl >= 0.0 &&
              worst_oracle < 1e-9,
          buf};
}

Outcome GradCheck() {
  std::ifstream in(kData / "synthetic_task.jsonl");
  const auto ds = ka::dataset_from_jsonl(in);
  ka::Hyper hp;
  hp.vocab = ds.vocab.size();
  hp.dim = 6;
  hp.hidden = 8;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = ka::ToyModel::random(hp, seed, 0.5);
    const auto q = ka::ToyModel::random(hp, seed + 1000, 0.5);
    worst = std::max(worst, ka::grad_check(p, q, ds.examples, 1e-5, seed));
    worst = std::max(worst, ka::grad_check(p, q, ds.examples, 1e-5, seed, 50,
                                           ka::KLDirection::kQP));
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "20 seeds, max rel err %.2e", worst);
  return {worst < 1e-4, buf};
}

Outcome ReferenceRun() {
  std::ifstream in(kData / "synthetic_task.jsonl");
  auto ref = ka::reference_run(ka::dataset_from_jsonl(in), 7);
  const auto q_sum = ref.q.checksum();
  ka::TrainConfig tc;
  tc.steps = 500;
  tc.lr = 0.1;
  const auto r = ka::train(ref.p, ref.q, ref.data.examples, tc);
  const double first = r.trace.front().loss;
  const double last = r.trace.back().loss;
  const double agree = ka::argmax_agreement(r.model, ref.q, ref.data.examples);
  char buf[160];
  std::snprintf(buf, sizeof buf, "KL %.4g -> %.4g (%.2f%%), agreement %.3f", first, last,
                100.0 * last / first, agree);
  return {last <= 0.1 * first && agree >= 0.95 && ref.q.checksum() == q_sum, buf};
}

Outcome Determinism() {
  const auto g = load_graph_file(kData / "sun.tsv");
  std::ifstream in(kData / "sun_qa.jsonl");
  std::ostringstream diag;
  auto qa = read_qa_jsonl(in, diag);
  QAPair miss{"mars-1", "", "what orbits Mars?", "Phobos", std::nullopt};
  qa.push_back(miss);
  for (int i = 0; i < 10; ++i) {
    auto q = qa[0];
    q.id = "sun-copy-" + std::to_string(i);
    qa.push_back(q);
  }
  OfflineBackend backend;
  SynthConfig cfg;
  cfg.concurrency = 4;
  auto run = [&] {
    const auto r = synthesize(qa, g, cfg, backend);
    std::string out;
    for (const auto& rec : r.records) out += record_to_json(rec, g).dump() + "\n";
    return std::make_pair(out, r.stats);
  };
  const auto [a, stats] = run();
  const auto [b, unused] = run();
  (void)unused;
  const double sum = stats.percent(stats.one_hop) + stats.percent(stats.two_hop) +
                     stats.percent(stats.three_hop_complete) +
                     stats.percent(stats.three_hop_partial);
  char buf[120];
  std::snprintf(buf, sizeof buf, "%zu bytes, identical=%s, percent sum %.4f", a.size(),
                a == b ? "yes" : "no", sum);
  return {a == b && std::abs(sum - 100.0) <= 0.01, buf};
}

Outcome Gateway() {
  using namespace kgrat::gateway;
  MockChatServer server({MockChatServer::error_reply(500), MockChatServer::error_reply(500),
                         MockChatServer::text_reply("fine")});
  GatewayConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "mock";
  cfg.backoff_base = std::chrono::milliseconds(5);
  const auto c = complete(cfg, "s", "u");
  const bool retry_ok = c.text == "fine" && c.attempts == 3 && server.request_count() == 3;

  MockChatServer silent({MockChatServer::text_reply("never")});
  GatewayConfig keyed;
  keyed.base_url = silent.base_url();
  keyed.model = "mock";
  keyed.api_key_env = "KGRAT_ACCEPTANCE_UNSET_KEY";
  ::unsetenv(keyed.api_key_env.c_str());
  bool refused = false;
  try {
    complete(keyed, "s", "u");
  } catch (const ConfigError&) {
    refused = true;
  }
  const bool key_ok = refused && silent.request_count() == 0;
  return {retry_ok && key_ok, "attempts " + std::to_string(c.attempts) + ", keyless requests " +
                                  std::to_string(silent.request_count())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"admissibility", Admissibility},
      {"consistency", Consistency},
      {"k-path oracle equivalence", OracleEquivalence},
      {"heuristic dominance", Dominance},
      {"sun path verbalization", SunPath},
      {"prompt golden files", Prompts},
      {"kl correctness", Kl},
      {"gradient check", GradCheck},
      {"ka reference run", ReferenceRun},
      {"pipeline determinism", Determinism},
      {"gateway resilience", Gateway},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
