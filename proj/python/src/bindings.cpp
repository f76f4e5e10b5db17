#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kgrat/bench.hpp"
#include "kgrat/entity_linker.hpp"
#include "kgrat/error.hpp"
#include "kgrat/ka_trainer.hpp"
#include "kgrat/kg_store.hpp"
#include "kgrat/landmark.hpp"
#include "kgrat/multipath_astar.hpp"
#include "kgrat/rationale.hpp"
#include "kgrat/report_json.hpp"
#include "kgrat/synth.hpp"

namespace py = pybind11;
using ojson = nlohmann::ordered_json;

namespace {

kgrat::EntityId Entity(const kgrat::KnowledgeGraph& g, const std::string& label) {
  if (auto e = g.entity_by_label(label)) return *e;
  throw kgrat::LookupError("unknown entity: " + label);
}

std::string FindPaths(const kgrat::KnowledgeGraph& g, const std::string& start,
                      const std::string& goal, std::uint32_t max_paths, std::uint32_t max_depth,
                      bool use_heuristic, std::uint32_t anchors, std::uint64_t seed,
                      bool fallback) {
  kgrat::SearchConfig sc;
  sc.max_paths = max_paths;
  sc.max_depth = max_depth;
  const auto s = Entity(g, start);
  const auto t = Entity(g, goal);
  kgrat::HeuristicConfig hc;
  hc.anchor_count = anchors;
  hc.rng_seed = seed;
  std::optional<kgrat::LandmarkTable> table;
  if (use_heuristic) {
    table.emplace(kgrat::make_landmarks(g, t, hc));
    sc.heuristic = &*table;
  }
  kgrat::SearchReport r;
  {
    py::gil_scoped_release release;
    r = fallback ? kgrat::find_paths_or_frontier(g, s, t, sc) : kgrat::find_paths(g, s, t, sc);
  }
  auto j = kgrat::report_to_json(r, g);
  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    j["paths"][i]["verbalized"] = kgrat::verbalize(r.paths[i], g);
  }
  return j.dump();
}

std::vector<std::string> Link(const kgrat::KnowledgeGraph& g, const std::string& text,
                              const std::string& context) {
  const kgrat::Lexicon lex(g);
  const auto set = kgrat::link(kgrat::extract_mentions(text, lex), g, lex,
                              context.empty() ? text : context);
  std::vector<std::string> out;
  for (const auto e : set.entities) out.push_back(g.entity_label(e));
  return out;
}

std::string Synthesize(const kgrat::KnowledgeGraph& g, const std::string& qa_jsonl,
                       std::uint64_t seed, std::size_t jobs, bool use_heuristic) {
  std::istringstream in(qa_jsonl);
  std::ostringstream diag;
  const auto qa = kgrat::read_qa_jsonl(in, diag);
  kgrat::SynthConfig cfg;
  cfg.heuristic.rng_seed = seed;
  cfg.concurrency = jobs;
  cfg.use_heuristic = use_heuristic;
  kgrat::OfflineBackend backend;
  kgrat::SynthResult r;
  {
    py::gil_scoped_release release;
    r = kgrat::synthesize(qa, g, cfg, backend);
  }
  ojson out;
  auto recs = ojson::array();
  for (const auto& rec : r.records) recs.push_back(kgrat::record_to_json(rec, g));
  out["records"] = std::move(recs);
  out["stats"] = r.stats.to_json();
  out["diagnostics"] = diag.str();
  return out.dump();
}

std::string Bench(std::size_t nodes, std::size_t queries, std::uint64_t seed,
                  std::uint32_t max_paths, std::uint32_t max_depth, bool oracle,
                  std::size_t tiny_graphs) {
  kgrat::BenchConfig cfg;
  cfg.nodes = nodes;
  cfg.queries = queries;
  cfg.seed = seed;
  cfg.max_paths = max_paths;
  cfg.max_depth = max_depth;
  cfg.run_oracle = oracle;
  cfg.tiny_graphs = tiny_graphs;
  kgrat::BenchResult r;
  {
    py::gil_scoped_release release;
    r = kgrat::run_bench(cfg);
  }
  return kgrat::bench_to_json(r).dump();
}

std::string TrainReference(std::uint64_t seed, std::size_t steps, double lr,
                           const std::string& data_jsonl, bool grad_check) {
  namespace ka = kgrat::ka;
  ka::Dataset data;
  if (data_jsonl.empty()) {
    const auto task = ka::synthetic_task_records();
    const std::vector<nlohmann::json> recs(task.begin(), task.end());
    data = ka::dataset_from_records(recs);
  } else {
    std::istringstream in(data_jsonl);
    data = ka::dataset_from_jsonl(in);
  }
  py::gil_scoped_release release;
  auto ref = ka::reference_run(std::move(data), seed);
  const auto q_sum = ref.q.checksum();
  ojson out;
  if (grad_check) out["grad_check"] = ka::grad_check(ref.p, ref.q, ref.data.examples, 1e-5, seed);
  const double before = ka::argmax_agreement(ref.p, ref.q, ref.data.examples);
  const auto r = ka::train(ref.p, ref.q, ref.data.examples, {steps, lr});
  auto trace = ojson::array();
  for (const auto& t : r.trace) trace.push_back(t.loss);
  out["loss"] = std::move(trace);
  out["agreement_before"] = before;
  out["agreement_after"] = ka::argmax_agreement(r.model, ref.q, ref.data.examples);
  out["q_checksum_unchanged"] = ref.q.checksum() == q_sum;
  out["p_checksum"] = r.model.checksum();
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_kgrat, m) {
  m.doc() = "Native core of the kgrat package";

  py::register_exception<kgrat::LoadError>(m, "LoadError", PyExc_ValueError);
  py::register_exception<kgrat::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<kgrat::LookupError>(m, "EntityLookupError", PyExc_KeyError);
  py::register_exception<kgrat::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<kgrat::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<kgrat::KnowledgeGraph>(m, "KnowledgeGraph")
      .def_property_readonly("entity_count", &kgrat::KnowledgeGraph::entity_count)
      .def_property_readonly("relation_count", &kgrat::KnowledgeGraph::relation_count)
      .def_property_readonly("triple_count", &kgrat::KnowledgeGraph::triple_count)
      .def_property_readonly("entity_labels", &kgrat::KnowledgeGraph::entity_labels)
      .def_property_readonly("relation_labels", &kgrat::KnowledgeGraph::relation_labels)
      .def("triples",
           [](const kgrat::KnowledgeGraph& g) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& t : g.triples()) {
               out.emplace_back(g.entity_label(t.subject), g.relation_label(t.relation),
                                g.entity_label(t.object));
             }
             return out;
           })
      .def("serialize", [](const kgrat::KnowledgeGraph& g) { return py::bytes(g.serialize()); })
      .def_static("deserialize",
                  [](const py::bytes& b) {
                    return kgrat::KnowledgeGraph::deserialize(std::string(b));
                  })
      .def("save_snapshot", [](const kgrat::KnowledgeGraph& g, const std::string& path) {
        kgrat::save_snapshot(g, path);
      });

  m.def("load_graph_file", [](const std::string& path) { return kgrat::load_graph_file(path); },
        py::arg("path"));
  m.def("load_graph_text", [](const std::string& text) { return kgrat::load_graph_text(text); },
        py::arg("text"));
  m.def("find_paths", &FindPaths, py::arg("graph"), py::arg("start"), py::arg("goal"),
        py::arg("max_paths") = 3, py::arg("max_depth") = 3, py::arg("use_heuristic") = true,
        py::arg("anchors") = 10, py::arg("seed") = 0, py::arg("fallback") = false);
  m.def("link", &Link, py::arg("graph"), py::arg("text"), py::arg("context") = "");
  m.def(
      "build_rationale_prompt",
      [](const std::string& q, const std::string& a, const std::vector<std::string>& paths) {
        return kgrat::build_rationale_prompt(q, a, paths);
      },
      py::arg("question"), py::arg("answer"), py::arg("paths"));
  m.def(
      "build_factcheck_prompt",
      [](const std::string& fact) { return kgrat::build_factcheck_prompt(fact); },
      py::arg("fact"));
  m.def("synthesize", &Synthesize, py::arg("graph"), py::arg("qa_jsonl"), py::arg("seed") = 0,
        py::arg("jobs") = 4, py::arg("use_heuristic") = true);
  m.def(
      "kl_loss",
      [](const std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& q) {
        const auto r = kgrat::ka::kl_loss(p, q);
        return std::make_pair(r.mean, r.per_position);
      },
      py::arg("p"), py::arg("q"));
  m.def("bench", &Bench, py::arg("nodes") = 1000, py::arg("queries") = 100,
        py::arg("seed") = 7, py::arg("max_paths") = 3, py::arg("max_depth") = 3,
        py::arg("oracle") = false, py::arg("tiny_graphs") = 0);
  m.def("train_reference", &TrainReference, py::arg("seed") = 7, py::arg("steps") = 500,
        py::arg("lr") = 0.1, py::arg("data_jsonl") = "", py::arg("grad_check") = false);
}
