#include "kgrat/synth.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "kgrat/error.hpp"
#include "kgrat/report_json.hpp"
#include "kgrat/text.hpp"

namespace kgrat {
namespace {

std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ConfigError(std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

QAPair qa_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("QA line is not a JSON object");
  QAPair qa;
  qa.id = required_string(j, "id");
  qa.instruction = j.contains("instruction") ? required_string(j, "instruction") : "";
  qa.question = required_string(j, "question");
  qa.answer = required_string(j, "answer");
  if (qa.question.empty()) throw ConfigError("empty question");
  if (qa.answer.empty()) throw ConfigError("empty answer");
  if (j.contains("options") && !j["options"].is_null()) {
    if (!j["options"].is_array()) throw ConfigError("'options' must be an array");
    std::vector<std::string> opts;
    for (const auto& o : j["options"]) {
      if (!o.is_string()) throw ConfigError("options must be strings");
      opts.push_back(o.get<std::string>());
    }
    if (std::find(opts.begin(), opts.end(), qa.answer) == opts.end()) {
      throw ConfigError("options do not contain the answer");
    }
    qa.options = std::move(opts);
  }
  return qa;
}

std::vector<QAPair> read_qa_jsonl(std::istream& in, std::ostream& diag) {
  std::vector<QAPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(qa_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      diag << "skipping QA line " << lineno << ": " << e.what() << '\n';
    }
  }
  return out;
}

std::string OfflineBackend::generate(const RationaleRequest& req) {
  std::vector<Triple> seen;
  std::vector<std::string> sentences;
  for (const auto& p : req.paths) {
    EntityId at = p.start;
    for (const auto& s : p.steps) {
      const Triple t = s.direction == Direction::kForward ? Triple{at, s.relation, s.entity}
                                                          : Triple{s.entity, s.relation, at};
      at = s.entity;
      if (std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
      seen.push_back(t);
      std::string sentence(text::display_label(req.graph.entity_label(t.subject)));
      sentence.append(" ").append(req.graph.relation_label(t.relation)).append(" ");
      sentence.append(text::display_label(req.graph.entity_label(t.object)));
      sentences.push_back(std::move(sentence));
    }
  }
  if (sentences.empty()) return "The answer is " + req.qa.answer + ".";
  std::string out = "Because ";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out += ". ";
    out += sentences[i];
  }
  out += ", the answer is " + req.qa.answer + ".";
  return out;
}

std::string GatewayBackend::generate(const RationaleRequest& req) {
  return gateway::complete(cfg_, req.prompt.system, req.prompt.user).text;
}

bool acceptable_rationale(std::string_view text) {
  if (text.size() < 10) return false;
  const auto lower = lower_ascii(text.substr(0, 32));
  for (std::string_view refusal : {"i'm sorry", "i am sorry", "i cannot", "i can't",
                                   "i can not", "as an ai"}) {
    if (lower.starts_with(refusal)) return false;
  }
  return true;
}

nlohmann::ordered_json record_to_json(const DatasetRecord& r, const KnowledgeGraph& g) {
  nlohmann::ordered_json j;
  j["id"] = r.qa.id;
  j["instruction"] = r.qa.instruction;
  j["question"] = r.qa.question;
  j["answer"] = r.qa.answer;
  if (r.qa.options) j["options"] = *r.qa.options;
  auto labels = [&](const std::vector<EntityId>& ids) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto e : ids) arr.push_back(g.entity_label(e));
    return arr;
  };
  j["entities_q"] = labels(r.entities_q);
  j["entities_a"] = labels(r.entities_a);
  nlohmann::ordered_json paths = nlohmann::ordered_json::array();
  for (const auto& p : r.paths) paths.push_back(path_to_json(p, g));
  j["paths"] = std::move(paths);
  j["paths_verbalized"] = r.paths_verbalized;
  j["rationale"] = r.rationale;
  j["backend"] = r.backend;
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) j["error"] = r.error;
  return j;
}

void PathStats::add(const DatasetRecord& r) {
  ++records;
  if (r.unmatched()) ++unmatched;
  for (const auto& p : r.paths) {
    if (!p.complete) {
      ++three_hop_partial;
    } else if (p.cost() == 1) {
      ++one_hop;
    } else if (p.cost() == 2) {
      ++two_hop;
    } else if (p.cost() >= 3) {
      ++three_hop_complete;
    }
  }
}

double PathStats::percent(std::size_t bucket) const {
  const auto total = path_count();
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(bucket) / static_cast<double>(total);
}

double PathStats::unmatched_percent() const {
  return records == 0 ? 0.0
                      : 100.0 * static_cast<double>(unmatched) / static_cast<double>(records);
}

nlohmann::ordered_json PathStats::to_json() const {
  nlohmann::ordered_json j;
  auto bucket = [&](std::size_t count, double pct) {
    return nlohmann::ordered_json{{"count", count}, {"percent", pct}};
  };
  j["1-hop"] = bucket(one_hop, percent(one_hop));
  j["2-hop"] = bucket(two_hop, percent(two_hop));
  j["3-hop complete"] = bucket(three_hop_complete, percent(three_hop_complete));
  j["3-hop partial"] = bucket(three_hop_partial, percent(three_hop_partial));
  j["unmatched"] = bucket(unmatched, unmatched_percent());
  j["paths"] = path_count();
  j["records"] = records;
  return j;
}

LinkedQA link_and_search(const QAPair& qa, const KnowledgeGraph& g, const Lexicon& lexicon,
                         const SynthConfig& cfg) {
  LinkedQA out;
  out.question = link(extract_mentions(qa.question, lexicon), g, lexicon, qa.question,
                      MentionSource::kQuestion);
  const std::string answer_context = qa.question + " " + qa.answer;
  out.answer = link(extract_mentions(qa.answer, lexicon), g, lexicon, answer_context,
                    MentionSource::kAnswer);

  std::map<EntityId, LandmarkTable> tables;
  std::size_t budget = cfg.pair_budget;
  for (const auto start : out.question.entities) {
    for (const auto goal : out.answer.entities) {
      if (budget == 0) return out;
      if (start == goal) continue;
      --budget;
      SearchConfig sc;
      sc.max_paths = cfg.max_paths;
      sc.max_depth = cfg.max_depth;
      sc.traversal = cfg.heuristic.traversal;
      if (cfg.use_heuristic) {
        auto it = tables.find(goal);
        if (it == tables.end()) {
          it = tables.emplace(goal, make_landmarks(g, goal, cfg.heuristic)).first;
        }
        sc.heuristic = &it->second;
      }
      out.searches.push_back({start, goal, find_paths_or_frontier(g, start, goal, sc)});
    }
  }
  return out;
}

SynthResult synthesize(const std::vector<QAPair>& qa, const KnowledgeGraph& g,
                       const SynthConfig& cfg, RationaleBackend& backend) {
  const Lexicon lexicon(g);
  SynthResult result;
  result.records.resize(qa.size());

  auto process = [&](std::size_t i) {
    const auto& pair = qa[i];
    auto& rec = result.records[i];
    rec.qa = pair;
    rec.backend = backend.name();
    const auto linked = link_and_search(pair, g, lexicon, cfg);
    rec.entities_q = linked.question.entities;
    rec.entities_a = linked.answer.entities;
    for (const auto& s : linked.searches) {
      for (const auto& p : s.report.paths) {
        rec.paths.push_back(p);
        rec.paths_verbalized.push_back(verbalize(p, g));
      }
    }
    const auto prompt = prompts::rationale(pair.question, pair.answer, rec.paths_verbalized);
    try {
      rec.rationale = backend.generate({pair, g, rec.paths, prompt});
      rec.ok = acceptable_rationale(rec.rationale);
      if (!rec.ok) rec.error = "rationale rejected by post-filter";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.concurrency, qa.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < qa.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < qa.size(); i = next.fetch_add(1)) process(i);
      });
    }
  }
  for (const auto& r : result.records) result.stats.add(r);
  return result;
}

}  // namespace kgrat
