#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgrat/entity_linker.hpp"
#include "kgrat/gateway.hpp"
#include "kgrat/kg_store.hpp"
#include "kgrat/landmark.hpp"
#include "kgrat/multipath_astar.hpp"
#include "kgrat/rationale.hpp"

namespace kgrat {

struct QAPair {
  std::string id;
  std::string instruction;
  std::string question;
  std::string answer;
  std::optional<std::vector<std::string>> options;
};

// Throws ConfigError when a required field is missing or empty, or when an
// option list does not contain the answer.
QAPair qa_from_json(const nlohmann::json& j);

// Reads JSONL, skipping malformed lines with a diagnostic on `diag`.
std::vector<QAPair> read_qa_jsonl(std::istream& in, std::ostream& diag);

struct RationaleRequest {
  const QAPair& qa;
  const KnowledgeGraph& graph;
  const std::vector<ReasoningPath>& paths;
  const prompts::Prompt& prompt;
};

class RationaleBackend {
 public:
  virtual ~RationaleBackend() = default;
  virtual std::string name() const = 0;
  // Throws on failure. Implementations must be safe to call concurrently.
  virtual std::string generate(const RationaleRequest& req) = 0;
};

// Deterministic stand-in for an LLM: "Because <triples>, the answer is <a>."
class OfflineBackend final : public RationaleBackend {
 public:
  std::string name() const override { return "offline"; }
  std::string generate(const RationaleRequest& req) override;
};

class GatewayBackend final : public RationaleBackend {
 public:
  explicit GatewayBackend(gateway::GatewayConfig cfg) : cfg_(std::move(cfg)) {}
  std::string name() const override { return "http:" + cfg_.model; }
  std::string generate(const RationaleRequest& req) override;

 private:
  gateway::GatewayConfig cfg_;
};

// Rejects responses shorter than 10 characters or that open with a refusal.
bool acceptable_rationale(std::string_view text);

struct DatasetRecord {
  QAPair qa;
  std::vector<EntityId> entities_q;
  std::vector<EntityId> entities_a;
  std::vector<ReasoningPath> paths;
  std::vector<std::string> paths_verbalized;
  std::string rationale;
  std::string backend;
  bool ok = false;
  std::string error;

  bool unmatched() const { return entities_q.empty() || entities_a.empty(); }
};

nlohmann::ordered_json record_to_json(const DatasetRecord& r, const KnowledgeGraph& g);

struct PathStats {
  std::size_t one_hop = 0;
  std::size_t two_hop = 0;
  std::size_t three_hop_complete = 0;  // complete paths of 3 or more hops
  std::size_t three_hop_partial = 0;   // frontier paths that miss the answer
  std::size_t unmatched = 0;           // QA pairs with no linked entity on a side
  std::size_t records = 0;

  void add(const DatasetRecord& r);
  std::size_t path_count() const {
    return one_hop + two_hop + three_hop_complete + three_hop_partial;
  }
  // Path buckets are percentages of all paths; unmatched is a percentage
  // of records. All zero when the denominator is zero.
  double percent(std::size_t bucket) const;
  double unmatched_percent() const;
  nlohmann::ordered_json to_json() const;
};

struct SynthConfig {
  HeuristicConfig heuristic;
  std::uint32_t max_paths = 3;
  std::uint32_t max_depth = 3;
  bool use_heuristic = true;
  std::size_t pair_budget = 16;
  std::size_t concurrency = 4;
};

struct SynthResult {
  std::vector<DatasetRecord> records;  // input order
  PathStats stats;
};

// Link, search, verbalize, prompt and generate for every QA pair. Records
// come back in input order regardless of concurrency.
SynthResult synthesize(const std::vector<QAPair>& qa, const KnowledgeGraph& g,
                       const SynthConfig& cfg, RationaleBackend& backend);

// Single-pair stage used by synthesize(); exposed for the paths command.
struct PairSearch {
  EntityId start;
  EntityId goal;
  SearchReport report;
};

struct LinkedQA {
  LinkedEntitySet question;
  LinkedEntitySet answer;
  std::vector<PairSearch> searches;
};

LinkedQA link_and_search(const QAPair& qa, const KnowledgeGraph& g, const Lexicon& lexicon,
                         const SynthConfig& cfg);

}  // namespace kgrat
