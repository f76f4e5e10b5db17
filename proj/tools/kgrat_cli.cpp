// kgrat: command-line front end for graph ingest, path search, rationale
// synthesis, search benchmarking and alignment training.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgrat/bench.hpp"
#include "kgrat/entity_linker.hpp"
#include "kgrat/error.hpp"
#include "kgrat/gateway.hpp"
#include "kgrat/ka_trainer.hpp"
#include "kgrat/kg_store.hpp"
#include "kgrat/report_json.hpp"
#include "kgrat/synth.hpp"

#ifndef KGRAT_VERSION
#define KGRAT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Operational failures (exit 1) as opposed to usage errors (exit 2).
struct RunFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string graph;
  std::uint64_t seed = 7;
  std::size_t jobs = 4;
  std::string out = ".";

  // search
  std::uint32_t anchors = 10;
  std::uint32_t anchor_radius = 3;
  std::uint32_t bfs_depth = 3;
  std::uint32_t max_paths = 3;
  std::uint32_t max_depth = 3;
  std::string traversal = "both";
  std::size_t pair_budget = 16;
  bool zero_heuristic = false;

  // paths / synth input
  std::string qa;
  std::string question;
  std::string answer;

  // synth backend
  std::string backend = "offline";
  std::string base_url;
  std::string model;
  std::string api_key_env;
  unsigned max_retries = 3;
  long timeout_ms = 60'000;
  double temperature = 0.0;

  // bench
  std::size_t nodes = 1000;
  std::size_t edges_per_node = 2;
  std::size_t relations = 4;
  std::size_t queries = 100;
  std::size_t tiny_graphs = 50;
  bool no_oracle = false;

  // train
  std::string data;
  std::string q_checkpoint;
  std::size_t steps = 500;
  double lr = 0.1;
  std::string direction = "pq";
  bool grad_check = false;
  double grad_epsilon = 1e-5;
  std::size_t grad_samples = 50;
};

kgrat::Traversal ParseTraversal(const std::string& s) {
  if (s == "both") return kgrat::Traversal::kBoth;
  if (s == "out") return kgrat::Traversal::kOutgoing;
  return kgrat::Traversal::kIncoming;
}

kgrat::HeuristicConfig Heuristic(const Options& o) {
  kgrat::HeuristicConfig h;
  h.anchor_count = o.anchors;
  h.anchor_hop_radius = o.anchor_radius;
  h.bfs_depth = o.bfs_depth;
  h.rng_seed = o.seed;
  h.traversal = ParseTraversal(o.traversal);
  return h;
}

kgrat::SynthConfig Synth(const Options& o) {
  kgrat::SynthConfig c;
  c.heuristic = Heuristic(o);
  c.max_paths = o.max_paths;
  c.max_depth = o.max_depth;
  c.use_heuristic = !o.zero_heuristic;
  c.pair_budget = o.pair_budget;
  c.concurrency = o.jobs;
  return c;
}

std::uint64_t Fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kgrat::ConfigError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)) {}

  void input(const std::string& path) {
    if (!path.empty()) inputs_[path] = "fnv1a64:" + Hex(Fnv1a(path));
  }
  void output(const fs::path& path) { outputs_.push_back(path.filename().string()); }
  void seed(const std::string& name, std::uint64_t v) { seeds_[name] = v; }

  template <typename F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      timings_.emplace_back(
          name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count());
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  void write(const fs::path& dir, const ojson& config) const {
    ojson j;
    j["tool"] = "kgrat";
    j["version"] = KGRAT_VERSION;
    j["command"] = command_;
    j["argv"] = argv_;
    j["config"] = config;
    ojson in = ojson::object();
    for (const auto& [k, v] : inputs_) in[k] = v;
    j["inputs"] = in;
    ojson seeds = ojson::object();
    for (const auto& [k, v] : seeds_) seeds[k] = v;
    j["seeds"] = seeds;
    j["outputs"] = outputs_;
    ojson t = ojson::object();
    for (const auto& [k, v] : timings_) t[k] = v;
    j["timings_ms"] = t;
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << '\n';
    if (!f) throw RunFailure("cannot write manifest.json");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

ojson SearchConfigJson(const Options& o) {
  return {{"anchors", o.anchors},         {"anchor_radius", o.anchor_radius},
          {"bfs_depth", o.bfs_depth},     {"max_paths", o.max_paths},
          {"max_depth", o.max_depth},     {"traversal", o.traversal},
          {"pair_budget", o.pair_budget}, {"zero_heuristic", o.zero_heuristic}};
}

ojson CommonJson(const Options& o) {
  return {{"graph", o.graph}, {"seed", o.seed}, {"jobs", o.jobs}, {"out", o.out}};
}

fs::path OutDir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunFailure("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw RunFailure("cannot write " + path.string());
}

kgrat::KnowledgeGraph RequireGraph(const Options& o, Manifest& m) {
  if (o.graph.empty()) throw kgrat::ConfigError("--graph is required");
  m.input(o.graph);
  return m.stage("load_graph", [&] { return kgrat::load_graph_file(o.graph); });
}

std::vector<kgrat::QAPair> ReadQa(const Options& o, Manifest& m) {
  if (!o.qa.empty()) {
    if (!o.question.empty() || !o.answer.empty()) {
      throw kgrat::ConfigError("use either --qa or --question/--answer, not both");
    }
    m.input(o.qa);
    std::ifstream in(o.qa);
    if (!in) throw kgrat::ConfigError("cannot read " + o.qa);
    return kgrat::read_qa_jsonl(in, std::cerr);
  }
  if (o.question.empty() || o.answer.empty()) {
    throw kgrat::ConfigError("give --qa FILE or both --question and --answer");
  }
  return {kgrat::QAPair{"q0", "", o.question, o.answer, std::nullopt}};
}

std::string Status(const kgrat::LinkedQA& l) {
  if (l.question.entities.empty() || l.answer.entities.empty()) return "unmatched";
  for (const auto& s : l.searches) {
    for (const auto& p : s.report.paths) {
      if (p.complete) return "ok";
    }
  }
  return "no_path";
}

int CmdIngest(const Options& o, Manifest& m) {
  const auto g = RequireGraph(o, m);
  const auto dir = OutDir(o);
  const auto snap = dir / "graph.kgsnap";
  m.stage("write_snapshot", [&] { kgrat::save_snapshot(g, snap); });
  m.output(snap);
  const ojson stats{{"entities", g.entity_count()},
                    {"relations", g.relation_count()},
                    {"triples", g.triple_count()},
                    {"snapshot_fnv1a64", Hex(Fnv1a(snap))}};
  WriteText(dir / "graph_stats.json", stats.dump(2) + "\n");
  m.output(dir / "graph_stats.json");
  m.write(dir, CommonJson(o));
  std::cout << g.entity_count() << " entities, " << g.relation_count() << " relations, "
            << g.triple_count() << " triples\n";
  return 0;
}

int CmdPaths(const Options& o, Manifest& m) {
  const auto g = RequireGraph(o, m);
  const auto qa = ReadQa(o, m);
  const auto cfg = Synth(o);
  m.seed("heuristic", o.seed);
  const kgrat::Lexicon lex = m.stage("lexicon", [&] { return kgrat::Lexicon(g); });
  ojson results = ojson::array();
  std::map<std::string, std::size_t> counts;
  std::uint64_t expanded = 0;
  m.stage("search", [&] {
    for (const auto& q : qa) {
      const auto linked = kgrat::link_and_search(q, g, lex, cfg);
      const auto status = Status(linked);
      ++counts[status];
      ojson r;
      r["id"] = q.id;
      r["status"] = status;
      ojson eq = ojson::array(), ea = ojson::array();
      for (const auto e : linked.question.entities) eq.push_back(g.entity_label(e));
      for (const auto e : linked.answer.entities) ea.push_back(g.entity_label(e));
      r["entities_q"] = eq;
      r["entities_a"] = ea;
      ojson searches = ojson::array();
      for (const auto& s : linked.searches) {
        expanded += s.report.nodes_expanded;
        searches.push_back({{"start", g.entity_label(s.start)},
                            {"goal", g.entity_label(s.goal)},
                            {"report", kgrat::report_to_json(s.report, g)}});
      }
      r["searches"] = searches;
      results.push_back(std::move(r));
    }
  });
  const auto dir = OutDir(o);
  WriteText(dir / "paths.json", results.dump(2) + "\n");
  m.output(dir / "paths.json");
  auto config = CommonJson(o);
  config["search"] = SearchConfigJson(o);
  m.write(dir, config);
  std::cout << qa.size() << " questions: " << counts["ok"] << " ok, " << counts["no_path"]
            << " no_path, " << counts["unmatched"] << " unmatched; " << expanded
            << " nodes expanded\n";
  return 0;
}

std::unique_ptr<kgrat::RationaleBackend> MakeBackend(const Options& o) {
  if (o.backend == "offline") return std::make_unique<kgrat::OfflineBackend>();
  if (o.base_url.empty() || o.model.empty()) {
    throw kgrat::ConfigError("--backend http needs --base-url and --model");
  }
  kgrat::gateway::GatewayConfig g;
  g.base_url = o.base_url;
  g.model = o.model;
  g.api_key_env = o.api_key_env;
  g.max_retries = o.max_retries;
  g.timeout = std::chrono::milliseconds(o.timeout_ms);
  g.temperature = o.temperature;
  if (!g.api_key_env.empty() && std::getenv(g.api_key_env.c_str()) == nullptr) {
    throw kgrat::ConfigError("environment variable " + g.api_key_env + " is not set");
  }
  return std::make_unique<kgrat::GatewayBackend>(g);
}

int CmdSynth(const Options& o, Manifest& m) {
  auto backend = MakeBackend(o);
  const auto g = RequireGraph(o, m);
  const auto qa = ReadQa(o, m);
  const auto cfg = Synth(o);
  m.seed("heuristic", o.seed);
  const auto r = m.stage("synthesize", [&] { return kgrat::synthesize(qa, g, cfg, *backend); });
  const auto dir = OutDir(o);
  std::string jsonl;
  std::size_t failed = 0;
  for (const auto& rec : r.records) {
    jsonl += kgrat::record_to_json(rec, g).dump() + "\n";
    if (!rec.ok) ++failed;
  }
  WriteText(dir / "dataset.jsonl", jsonl);
  m.output(dir / "dataset.jsonl");
  WriteText(dir / "path_stats.json", r.stats.to_json().dump(2) + "\n");
  m.output(dir / "path_stats.json");
  auto config = CommonJson(o);
  config["search"] = SearchConfigJson(o);
  config["backend"] = {{"kind", o.backend},
                       {"base_url", o.base_url},
                       {"model", o.model},
                       {"api_key_env", o.api_key_env},
                       {"max_retries", o.max_retries},
                       {"timeout_ms", o.timeout_ms},
                       {"temperature", o.temperature}};
  m.write(dir, config);
  const auto& s = r.stats;
  std::printf("%zu records (%zu failed), %zu paths\n", r.records.size(), failed, s.path_count());
  std::printf("  1-hop %6.2f%%  2-hop %6.2f%%  3-hop complete %6.2f%%  3-hop partial %6.2f%%\n",
              s.percent(s.one_hop), s.percent(s.two_hop), s.percent(s.three_hop_complete),
              s.percent(s.three_hop_partial));
  std::printf("  unmatched %6.2f%% of records\n", s.unmatched_percent());
  return failed == r.records.size() && !r.records.empty() ? 1 : 0;
}

int CmdBench(const Options& o, Manifest& m) {
  kgrat::BenchConfig cfg;
  cfg.nodes = o.nodes;
  cfg.edges_per_node = o.edges_per_node;
  cfg.relations = o.relations;
  cfg.queries = o.queries;
  cfg.max_paths = o.max_paths;
  cfg.max_depth = o.max_depth;
  cfg.heuristic = Heuristic(o);
  cfg.run_oracle = !o.no_oracle;
  cfg.tiny_graphs = o.tiny_graphs;
  cfg.seed = o.seed;
  m.seed("bench", o.seed);
  kgrat::BenchResult r;
  std::optional<kgrat::KnowledgeGraph> g;
  if (!o.graph.empty()) g = RequireGraph(o, m);
  r = m.stage("bench", [&] { return g ? kgrat::run_bench(*g, cfg) : kgrat::run_bench(cfg); });
  const auto dir = OutDir(o);
  WriteText(dir / "bench.json", kgrat::bench_to_json(r, g ? &*g : nullptr).dump(2) + "\n");
  m.output(dir / "bench.json");
  auto config = CommonJson(o);
  config["search"] = SearchConfigJson(o);
  config["bench"] = {{"nodes", o.nodes},           {"edges_per_node", o.edges_per_node},
                     {"relations", o.relations},   {"queries", o.queries},
                     {"tiny_graphs", o.tiny_graphs}, {"oracle", !o.no_oracle}};
  m.write(dir, config);

  std::uint64_t lm = 0, zero = 0, orc = 0;
  double lm_ms = 0, zero_ms = 0, orc_ms = 0;
  for (const auto& q : r.queries) {
    lm += q.landmark_expanded;
    zero += q.zero_expanded;
    orc += q.oracle_expanded;
    lm_ms += q.landmark_ms;
    zero_ms += q.zero_ms;
    orc_ms += q.oracle_ms;
  }
  std::printf("%-16s %14s %12s\n", "search", "expansions", "time ms");
  std::printf("%-16s %14llu %12.2f\n", "landmark A*", static_cast<unsigned long long>(lm), lm_ms);
  std::printf("%-16s %14llu %12.2f\n", "zero heuristic", static_cast<unsigned long long>(zero),
              zero_ms);
  if (cfg.run_oracle) {
    std::printf("%-16s %14llu %12.2f\n", "exhaustive", static_cast<unsigned long long>(orc),
                orc_ms);
  }
  std::printf("queries %zu, landmark <= zero on %zu, < on %zu, costs agree on %zu\n",
              r.queries.size(), r.dominated, r.strictly_better, r.cost_agreements);
  std::printf("mean expansion ratio %.4f, mean speedup %.4f\n", r.mean_ratio, r.mean_speedup);
  if (r.tiny_cases > 0) {
    std::printf("tiny graphs: %zu/%zu agree\n", r.tiny_agreements, r.tiny_cases);
  }
  const bool ok = r.dominated == r.queries.size() && r.cost_agreements == r.queries.size() &&
                  r.tiny_agreements == r.tiny_cases;
  return ok ? 0 : 1;
}

int CmdTrain(const Options& o, Manifest& m) {
  namespace ka = kgrat::ka;
  ka::Dataset data;
  if (o.data.empty()) {
    std::vector<nlohmann::json> recs;
    for (const auto& r : ka::synthetic_task_records()) recs.push_back(r);
    data = ka::dataset_from_records(recs);
  } else {
    m.input(o.data);
    std::ifstream in(o.data);
    if (!in) throw kgrat::ConfigError("cannot read " + o.data);
    data = ka::dataset_from_jsonl(in);
  }
  if (data.examples.empty()) throw kgrat::ConfigError("no usable training records");

  m.seed("p_init", o.seed);
  auto [q, p] = [&]() -> std::pair<ka::ToyModel, ka::ToyModel> {
    if (o.q_checkpoint.empty()) {
      m.seed("q_init", o.seed + 1);
      auto ref = m.stage("pretrain_q", [&] { return ka::reference_run(data, o.seed); });
      return {std::move(ref.q), std::move(ref.p)};
    }
    m.input(o.q_checkpoint);
    auto ck = ka::load_checkpoint(o.q_checkpoint);
    if (ck.model.hyper().vocab != data.vocab.size()) {
      throw kgrat::ConfigError("q checkpoint vocabulary does not match the data");
    }
    auto init = ka::ToyModel::random(ck.model.hyper(), o.seed, ka::kReferencePScale);
    return {std::move(ck.model), std::move(init)};
  }();
  const auto q_sum = q.checksum();
  ka::TrainConfig tc;
  tc.steps = o.steps;
  tc.lr = o.lr;
  tc.direction = o.direction == "qp" ? ka::KLDirection::kQP : ka::KLDirection::kPQ;

  std::optional<double> grad_err;
  if (o.grad_check) {
    grad_err = m.stage("grad_check", [&] {
      return ka::grad_check(p, q, data.examples, o.grad_epsilon, o.seed, o.grad_samples,
                            tc.direction);
    });
  }
  const double before = ka::argmax_agreement(p, q, data.examples);
  const auto r = m.stage("train", [&] { return ka::train(p, q, data.examples, tc); });
  const double after = ka::argmax_agreement(r.model, q, data.examples);
  if (q.checksum() != q_sum) throw RunFailure("frozen q changed during training");

  const auto dir = OutDir(o);
  ka::save_checkpoint(dir / "p_model.json", r.model, &data.vocab);
  ka::save_checkpoint(dir / "q_model.json", q, &data.vocab);
  {
    std::ofstream f(dir / "loss_trace.csv");
    ka::write_trace_csv(f, r.trace);
    if (!f) throw RunFailure("cannot write loss_trace.csv");
  }
  const double first = r.trace.front().loss;
  const double last = r.trace.back().loss;
  ojson report{{"examples", data.examples.size()},
               {"vocab", data.vocab.size()},
               {"initial_kl", first},
               {"final_kl", last},
               {"kl_reduction", first > 0 ? 1.0 - last / first : 0.0},
               {"agreement_before", before},
               {"agreement_after", after},
               {"q_checksum", Hex(q_sum)},
               {"p_checksum", Hex(r.model.checksum())}};
  if (grad_err) report["grad_check_max_rel_err"] = *grad_err;
  WriteText(dir / "train_report.json", report.dump(2) + "\n");
  for (const char* f : {"p_model.json", "q_model.json", "loss_trace.csv", "train_report.json"}) {
    m.output(dir / f);
  }
  auto config = CommonJson(o);
  config["train"] = {{"data", o.data.empty() ? "builtin:synthetic" : o.data},
                     {"q_checkpoint", o.q_checkpoint},
                     {"steps", o.steps},
                     {"lr", o.lr},
                     {"direction", o.direction},
                     {"q_pretrain_steps", ka::kReferenceQSteps},
                     {"q_pretrain_lr", ka::kReferenceQLr},
                     {"p_init_scale", ka::kReferencePScale},
                     {"grad_check", o.grad_check},
                     {"grad_epsilon", o.grad_epsilon},
                     {"grad_samples", o.grad_samples}};
  m.write(dir, config);

  std::printf("KL %.6g -> %.6g (%.2f%% reduction), agreement %.3f -> %.3f\n", first, last,
              100.0 * (first > 0 ? 1.0 - last / first : 0.0), before, after);
  std::printf("p checksum %s, q checksum %s (unchanged)\n", Hex(r.model.checksum()).c_str(),
              Hex(q_sum).c_str());
  if (grad_err) {
    std::printf("grad check: max rel err %.3e\n", *grad_err);
    if (*grad_err >= 1e-4) return 1;
  }
  return 0;
}

void AddSearchFlags(CLI::App* c, Options& o) {
  c->add_option("--anchors", o.anchors, "Anchor entities per goal")->capture_default_str();
  c->add_option("--anchor-radius", o.anchor_radius, "Hop radius for anchor sampling")
      ->capture_default_str();
  c->add_option("--bfs-depth", o.bfs_depth, "Truncated BFS depth per anchor")
      ->capture_default_str();
  c->add_option("--max-paths", o.max_paths, "Paths per start/goal pair")->capture_default_str();
  c->add_option("--max-depth", o.max_depth, "Maximum path length in hops")->capture_default_str();
  c->add_option("--traversal", o.traversal, "Edge directions to follow")
      ->check(CLI::IsMember({"both", "out", "in"}))
      ->capture_default_str();
  c->add_flag("--zero-heuristic", o.zero_heuristic, "Search with h = 0");
}

void AddQaFlags(CLI::App* c, Options& o) {
  c->add_option("--qa", o.qa, "QA JSONL file");
  c->add_option("--question", o.question, "Single question text");
  c->add_option("--answer", o.answer, "Single answer text");
  c->add_option("--pair-budget", o.pair_budget, "Start/goal pairs searched per question")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgrat: knowledge-path rationale pipeline"};
  app.set_version_flag("--version", KGRAT_VERSION);
  app.require_subcommand(1);
  Options o;
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.add_option("--graph", o.graph, "Triple TSV or graph snapshot");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  // Common flags are accepted before or after the subcommand name.
  app.fallthrough();

  auto* ingest = app.add_subcommand("ingest", "Load triples, write a snapshot and counts");
  auto* paths = app.add_subcommand("paths", "Link entities and search reasoning paths");
  AddSearchFlags(paths, o);
  AddQaFlags(paths, o);

  auto* synth = app.add_subcommand("synth", "Generate rationale records for QA pairs");
  AddSearchFlags(synth, o);
  AddQaFlags(synth, o);
  synth->add_option("--backend", o.backend, "Rationale generator")
      ->check(CLI::IsMember({"offline", "http"}))
      ->capture_default_str();
  synth->add_option("--base-url", o.base_url, "Chat-completions endpoint base URL");
  synth->add_option("--model", o.model, "Model name sent to the endpoint");
  synth->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
  synth->add_option("--max-retries", o.max_retries)->capture_default_str();
  synth->add_option("--timeout-ms", o.timeout_ms)->capture_default_str();
  synth->add_option("--temperature", o.temperature)->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Compare landmark, zero-heuristic and exhaustive search");
  AddSearchFlags(bench, o);
  bench->add_option("--nodes", o.nodes)->capture_default_str();
  bench->add_option("--edges-per-node", o.edges_per_node)->capture_default_str();
  bench->add_option("--relations", o.relations)->capture_default_str();
  bench->add_option("--queries", o.queries)->capture_default_str();
  bench->add_option("--tiny-graphs", o.tiny_graphs)->capture_default_str();
  bench->add_flag("--no-oracle", o.no_oracle, "Skip exhaustive search on the large graph");

  auto* train = app.add_subcommand("train", "Align p to a frozen rationale-conditioned q");
  train->add_option("--data", o.data, "Dataset JSONL from synth (default: synthetic task)");
  train->add_option("--q-checkpoint", o.q_checkpoint, "Frozen q model instead of pretraining");
  train->add_option("--steps", o.steps)->capture_default_str();
  train->add_option("--lr", o.lr)->capture_default_str();
  train->add_option("--direction", o.direction, "KL(p||q) or KL(q||p)")
      ->check(CLI::IsMember({"pq", "qp"}))
      ->capture_default_str();
  train->add_flag("--grad-check", o.grad_check, "Finite-difference gradient check before training");
  train->add_option("--grad-epsilon", o.grad_epsilon)->capture_default_str();
  train->add_option("--grad-samples", o.grad_samples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string name = app.get_subcommands().front()->get_name();
  Manifest manifest(name, std::vector<std::string>(argv, argv + argc));
  try {
    if (name == "ingest") return CmdIngest(o, manifest);
    if (name == "paths") return CmdPaths(o, manifest);
    if (name == "synth") return CmdSynth(o, manifest);
    if (name == "bench") return CmdBench(o, manifest);
    return CmdTrain(o, manifest);
  } catch (const kgrat::LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const kgrat::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  (void)ingest;
}
