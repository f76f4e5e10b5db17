#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace kgrat::ka {

using TokenId = std::uint32_t;

inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kPad = 3;

class Vocab {
 public:
  Vocab();

  // Lowercased words and single ASCII punctuation marks.
  static std::vector<std::string> tokenize(std::string_view text);

  TokenId add(const std::string& token);
  void add_text(std::string_view text);
  std::optional<TokenId> find(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Out-of-vocabulary tokens map to PAD.
  std::vector<TokenId> encode(std::string_view text) const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

struct Hyper {
  std::size_t vocab = 0;
  std::size_t dim = 16;
  std::size_t hidden = 32;
  std::size_t window = 8;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

// Windowed bag of embeddings -> tanh hidden layer -> softmax over the
// vocabulary. Parameters live in one flat array:
//   embed [V x D] | w1 [H x D] | b1 [H] | w2 [V x H] | b2 [V]
class ToyModel {
 public:
  explicit ToyModel(Hyper hp);

  static ToyModel zeros(Hyper hp);
  // Gaussian weights with standard deviation `scale`; biases zero.
  static ToyModel random(Hyper hp, std::uint64_t seed, double scale = 0.1);

  const Hyper& hyper() const { return hp_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<const double> embed() const { return slice(0, hp_.vocab * hp_.dim); }
  std::span<const double> w1() const { return slice(off_w1(), hp_.hidden * hp_.dim); }
  std::span<const double> b1() const { return slice(off_b1(), hp_.hidden); }
  std::span<const double> w2() const { return slice(off_w2(), hp_.vocab * hp_.hidden); }
  std::span<const double> b2() const { return slice(off_b2(), hp_.vocab); }

  std::size_t off_w1() const { return hp_.vocab * hp_.dim; }
  std::size_t off_b1() const { return off_w1() + hp_.hidden * hp_.dim; }
  std::size_t off_w2() const { return off_b1() + hp_.hidden; }
  std::size_t off_b2() const { return off_w2() + hp_.vocab * hp_.hidden; }

  // FNV-1a over the raw parameter bytes.
  std::uint64_t checksum() const;
  bool all_finite() const;

  nlohmann::json to_json() const;
  static ToyModel from_json(const nlohmann::json& j);

  friend bool operator==(const ToyModel&, const ToyModel&) = default;

 private:
  std::span<const double> slice(std::size_t off, std::size_t n) const {
    return std::span<const double>(params_).subspan(off, n);
  }

  Hyper hp_;
  std::vector<double> params_;
};

struct TrainingExample {
  std::vector<TokenId> inp;
  std::vector<TokenId> rats;
  std::vector<TokenId> out;
};

// Conditioning context for output position t under teacher forcing.
// p: inp ++ out[0, t). q: inp ++ SEP ++ rats ++ out[0, t), with SEP left out
// when the rationale is empty.
std::vector<TokenId> p_context(const TrainingExample& ex, std::size_t t);
std::vector<TokenId> q_context(const TrainingExample& ex, std::size_t t);

// One row per output position, each a distribution over the vocabulary.
using Distributions = std::vector<std::vector<double>>;

// Distribution after the last `window` tokens of `context` (older tokens
// are dropped from the left).
std::vector<double> next_token_distribution(const ToyModel& m, std::span<const TokenId> context);

Distributions forward_p(const ToyModel& m, const TrainingExample& ex);
Distributions forward_q(const ToyModel& frozen, const TrainingExample& ex);

enum class KLDirection { kPQ, kQP };

inline constexpr double kProbFloor = 1e-12;

struct KLReport {
  std::vector<double> per_position;
  double mean = 0.0;
  double grad_norm = 0.0;
  std::size_t step = 0;
};

// Per position sum_v p(v) (log p(v) - log max(q(v), 1e-12)), with
// 0 log 0 = 0. Throws ShapeError on mismatched shapes.
KLReport kl_loss(const Distributions& p, const Distributions& q,
                 KLDirection dir = KLDirection::kPQ);

// Loss and gradient of the mean per-position KL between the trainable
// model and fixed target distributions (one Distributions per example).
struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
  std::size_t positions = 0;
};

LossAndGrad ka_loss_and_grad(const ToyModel& model, const std::vector<TrainingExample>& data,
                             const std::vector<Distributions>& targets,
                             KLDirection dir = KLDirection::kPQ);

double ka_loss(const ToyModel& model, const std::vector<TrainingExample>& data,
               const std::vector<Distributions>& targets, KLDirection dir = KLDirection::kPQ);

std::vector<Distributions> frozen_targets(const ToyModel& frozen,
                                          const std::vector<TrainingExample>& data);

struct TracePoint {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct TrainConfig {
  std::size_t steps = 500;
  double lr = 0.1;
  KLDirection direction = KLDirection::kPQ;
};

struct TrainResult {
  ToyModel model;
  std::vector<TracePoint> trace;  // steps + 1 points; the last has no update
};

// Full-batch gradient descent on the mean KL against the frozen model.
// Throws NumericError on a non-finite loss or gradient.
TrainResult train(ToyModel model, const ToyModel& frozen_q,
                  const std::vector<TrainingExample>& data, const TrainConfig& cfg);

// Cross-entropy training on rationale-conditioned next-token prediction;
// produces the model that is then frozen as q.
TrainResult pretrain_q(ToyModel model, const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg);

double cross_entropy_loss(const ToyModel& model, const std::vector<TrainingExample>& data);

// Central differences on `samples` randomly chosen parameters against the
// analytic gradient; returns the largest
// |g_a - g_fd| / max(|g_a| + |g_fd|, 1e-8).
double grad_check(const ToyModel& model, const ToyModel& frozen_q,
                  const std::vector<TrainingExample>& data, double epsilon,
                  std::uint64_t seed, std::size_t samples = 50,
                  KLDirection dir = KLDirection::kPQ);

// Fraction of output positions whose argmax under p equals the argmax under
// q (ties go to the lower token id on both sides).
double argmax_agreement(const ToyModel& p, const ToyModel& frozen_q,
                        const std::vector<TrainingExample>& data);

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

struct Checkpoint {
  ToyModel model;
  std::optional<Vocab> vocab;
};

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model,
                     const Vocab* vocab = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Reference task: each question names a subject whose answer token also
// appears in the rationale. Returns rationale-synth style JSONL records.
std::vector<nlohmann::ordered_json> synthetic_task_records(std::size_t subjects = 8,
                                                           std::size_t answers = 4);

struct Dataset {
  Vocab vocab;
  std::vector<TrainingExample> examples;
};

// Builds a vocabulary from the records and encodes them:
//   inp  = BOS instruction question
//   rats = rationale
//   out  = answer
// Records whose status is not "ok" are skipped.
Dataset dataset_from_records(const std::vector<nlohmann::json>& records);
Dataset dataset_from_jsonl(std::istream& in);

inline constexpr std::size_t kReferenceQSteps = 1000;
inline constexpr double kReferenceQLr = 0.5;
inline constexpr double kReferencePScale = 0.5;

// The reference alignment setup: synthetic task, q pretrained with cross
// entropy from seed + 1 and frozen, p freshly initialized from seed.
struct ReferenceRun {
  Dataset data;
  ToyModel q;
  ToyModel p;
};

ReferenceRun reference_run(std::uint64_t seed);
ReferenceRun reference_run(Dataset data, std::uint64_t seed);

}  // namespace kgrat::ka
