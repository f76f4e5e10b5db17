#include "kgrat/ka_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "kgrat/error.hpp"
#include "kgrat/random.hpp"
#include "kgrat/text.hpp"

namespace kgrat::ka {
namespace {

constexpr int kCheckpointVersion = 1;

struct Activations {
  std::vector<TokenId> window;
  std::vector<double> x;     // D
  std::vector<double> h;     // H
  std::vector<double> logp;  // V
};

Activations forward(const ToyModel& m, std::span<const TokenId> context) {
  const auto& hp = m.hyper();
  Activations a;
  const auto take = std::min(context.size(), hp.window);
  a.window.assign(context.end() - static_cast<std::ptrdiff_t>(take), context.end());

  const auto E = m.embed();
  a.x.assign(hp.dim, 0.0);
  for (const auto tok : a.window) {
    if (tok >= hp.vocab) throw ShapeError("token id outside the model vocabulary");
    for (std::size_t d = 0; d < hp.dim; ++d) a.x[d] += E[tok * hp.dim + d];
  }
  if (!a.window.empty()) {
    const double inv = 1.0 / static_cast<double>(a.window.size());
    for (auto& v : a.x) v *= inv;
  }

  const auto W1 = m.w1();
  const auto B1 = m.b1();
  a.h.assign(hp.hidden, 0.0);
  for (std::size_t j = 0; j < hp.hidden; ++j) {
    double s = B1[j];
    for (std::size_t d = 0; d < hp.dim; ++d) s += W1[j * hp.dim + d] * a.x[d];
    a.h[j] = std::tanh(s);
  }

  const auto W2 = m.w2();
  const auto B2 = m.b2();
  a.logp.assign(hp.vocab, 0.0);
  double zmax = -INFINITY;
  for (std::size_t v = 0; v < hp.vocab; ++v) {
    double s = B2[v];
    for (std::size_t j = 0; j < hp.hidden; ++j) s += W2[v * hp.hidden + j] * a.h[j];
    a.logp[v] = s;
    zmax = std::max(zmax, s);
  }
  double sum = 0.0;
  for (const auto z : a.logp) sum += std::exp(z - zmax);
  const double lse = zmax + std::log(sum);
  for (auto& z : a.logp) z -= lse;
  return a;
}

// Accumulates d(loss)/d(params) given d(loss)/d(logits).
void backward(const ToyModel& m, const Activations& a, std::span<const double> dz,
              std::vector<double>& grad) {
  const auto& hp = m.hyper();
  const auto W1 = m.w1();
  const auto W2 = m.w2();

  std::vector<double> dh(hp.hidden, 0.0);
  for (std::size_t v = 0; v < hp.vocab; ++v) {
    const double g = dz[v];
    if (g == 0.0) continue;
    double* gw2 = grad.data() + m.off_w2() + v * hp.hidden;
    for (std::size_t j = 0; j < hp.hidden; ++j) {
      gw2[j] += g * a.h[j];
      dh[j] += W2[v * hp.hidden + j] * g;
    }
    grad[m.off_b2() + v] += g;
  }

  std::vector<double> dx(hp.dim, 0.0);
  for (std::size_t j = 0; j < hp.hidden; ++j) {
    const double da = dh[j] * (1.0 - a.h[j] * a.h[j]);
    double* gw1 = grad.data() + m.off_w1() + j * hp.dim;
    for (std::size_t d = 0; d < hp.dim; ++d) {
      gw1[d] += da * a.x[d];
      dx[d] += W1[j * hp.dim + d] * da;
    }
    grad[m.off_b1() + j] += da;
  }

  if (a.window.empty()) return;
  const double inv = 1.0 / static_cast<double>(a.window.size());
  for (const auto tok : a.window) {
    double* ge = grad.data() + tok * hp.dim;
    for (std::size_t d = 0; d < hp.dim; ++d) ge[d] += dx[d] * inv;
  }
}

double log_floor(double q) { return std::log(std::max(q, kProbFloor)); }

// KL at one position from the model's log-probabilities, plus d/dz.
double kl_position(std::span<const double> logp, std::span<const double> q, KLDirection dir,
                   std::vector<double>* dz) {
  const auto V = logp.size();
  double kl = 0.0;
  if (dir == KLDirection::kPQ) {
    for (std::size_t v = 0; v < V; ++v) {
      const double p = std::exp(logp[v]);
      if (p != 0.0) kl += p * (logp[v] - log_floor(q[v]));
    }
    if (dz != nullptr) {
      dz->resize(V);
      for (std::size_t v = 0; v < V; ++v) {
        const double p = std::exp(logp[v]);
        (*dz)[v] = p != 0.0 ? p * (logp[v] - log_floor(q[v]) - kl) : 0.0;
      }
    }
  } else {
    for (std::size_t v = 0; v < V; ++v) {
      if (q[v] != 0.0) kl += q[v] * (log_floor(q[v]) - logp[v]);
    }
    if (dz != nullptr) {
      dz->resize(V);
      double qsum = 0.0;
      for (std::size_t v = 0; v < V; ++v) qsum += q[v];
      for (std::size_t v = 0; v < V; ++v) (*dz)[v] = std::exp(logp[v]) * qsum - q[v];
    }
  }
  return kl;
}

double norm2(const std::vector<double>& g) {
  double s = 0.0;
  for (const auto v : g) s += v * v;
  return std::sqrt(s);
}

void check_finite(double loss, const std::vector<double>& grad, std::size_t step) {
  const bool ok = std::isfinite(loss) &&
                  std::all_of(grad.begin(), grad.end(), [](double v) { return std::isfinite(v); });
  if (!ok) {
    throw NumericError("non-finite loss or gradient at step " + std::to_string(step) +
                       " (loss " + std::to_string(loss) + ")");
  }
}

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

}  // namespace

// ---- Vocab -----------------------------------------------------------------

Vocab::Vocab() {
  for (const char* t : {"<bos>", "<eos>", "<sep>", "<pad>"}) add(t);
}

std::vector<std::string> Vocab::tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(text::canonicalize(cur));
    cur.clear();
  };
  for (const char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

TokenId Vocab::add(const std::string& token) {
  auto [it, fresh] = ids_.try_emplace(token, static_cast<TokenId>(tokens_.size()));
  if (fresh) tokens_.push_back(token);
  return it->second;
}

void Vocab::add_text(std::string_view s) {
  for (const auto& t : tokenize(s)) add(t);
}

std::optional<TokenId> Vocab::find(const std::string& token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocab::encode(std::string_view s) const {
  std::vector<TokenId> out;
  for (const auto& t : tokenize(s)) out.push_back(find(t).value_or(kPad));
  return out;
}

nlohmann::json Vocab::to_json() const { return tokens_; }

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  const auto tokens = j.get<std::vector<std::string>>();
  if (tokens.size() < 4) throw ConfigError("vocabulary is missing reserved tokens");
  for (std::size_t i = 4; i < tokens.size(); ++i) v.add(tokens[i]);
  if (v.size() != tokens.size()) throw ConfigError("vocabulary has duplicate tokens");
  return v;
}

// ---- ToyModel --------------------------------------------------------------

ToyModel::ToyModel(Hyper hp) : hp_(hp) {
  if (hp_.vocab < 5) throw ConfigError("vocabulary must have at least 5 tokens");
  if (hp_.dim == 0 || hp_.hidden == 0 || hp_.window == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  params_.assign(hp_.vocab * hp_.dim + hp_.hidden * hp_.dim + hp_.hidden +
                     hp_.vocab * hp_.hidden + hp_.vocab,
                 0.0);
}

ToyModel ToyModel::zeros(Hyper hp) { return ToyModel(hp); }

ToyModel ToyModel::random(Hyper hp, std::uint64_t seed, double scale) {
  ToyModel m(hp);
  Rng rng(seed);
  auto fill = [&](std::size_t off, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) m.params_[off + i] = scale * rng.normal();
  };
  fill(0, hp.vocab * hp.dim);
  fill(m.off_w1(), hp.hidden * hp.dim);
  fill(m.off_w2(), hp.vocab * hp.hidden);
  return m;
}

std::uint64_t ToyModel::checksum() const {
  return text::fnv1a64(std::string_view(reinterpret_cast<const char*>(params_.data()),
                                        params_.size() * sizeof(double)));
}

bool ToyModel::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

nlohmann::json ToyModel::to_json() const {
  nlohmann::json j;
  j["vocab"] = hp_.vocab;
  j["dim"] = hp_.dim;
  j["hidden"] = hp_.hidden;
  j["window"] = hp_.window;
  j["params"] = params_;
  return j;
}

ToyModel ToyModel::from_json(const nlohmann::json& j) {
  Hyper hp;
  hp.vocab = j.at("vocab").get<std::size_t>();
  hp.dim = j.at("dim").get<std::size_t>();
  hp.hidden = j.at("hidden").get<std::size_t>();
  hp.window = j.at("window").get<std::size_t>();
  ToyModel m(hp);
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != m.params_.size()) throw ShapeError("parameter count mismatch");
  m.params_ = std::move(params);
  return m;
}

// ---- forward passes --------------------------------------------------------

std::vector<TokenId> p_context(const TrainingExample& ex, std::size_t t) {
  std::vector<TokenId> ctx(ex.inp);
  ctx.insert(ctx.end(), ex.out.begin(), ex.out.begin() + static_cast<std::ptrdiff_t>(t));
  return ctx;
}

std::vector<TokenId> q_context(const TrainingExample& ex, std::size_t t) {
  std::vector<TokenId> ctx(ex.inp);
  if (!ex.rats.empty()) {
    ctx.push_back(kSep);
    ctx.insert(ctx.end(), ex.rats.begin(), ex.rats.end());
  }
  ctx.insert(ctx.end(), ex.out.begin(), ex.out.begin() + static_cast<std::ptrdiff_t>(t));
  return ctx;
}

std::vector<double> next_token_distribution(const ToyModel& m, std::span<const TokenId> context) {
  auto a = forward(m, context);
  for (auto& v : a.logp) v = std::exp(v);
  return std::move(a.logp);
}

Distributions forward_p(const ToyModel& m, const TrainingExample& ex) {
  Distributions out;
  for (std::size_t t = 0; t < ex.out.size(); ++t) {
    out.push_back(next_token_distribution(m, p_context(ex, t)));
  }
  return out;
}

Distributions forward_q(const ToyModel& frozen, const TrainingExample& ex) {
  Distributions out;
  for (std::size_t t = 0; t < ex.out.size(); ++t) {
    out.push_back(next_token_distribution(frozen, q_context(ex, t)));
  }
  return out;
}

// ---- losses ----------------------------------------------------------------

KLReport kl_loss(const Distributions& p, const Distributions& q, KLDirection dir) {
  if (p.size() != q.size()) throw ShapeError("p and q have different position counts");
  KLReport r;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t].size() != q[t].size()) throw ShapeError("p and q have different vocab sizes");
    const auto& a = dir == KLDirection::kPQ ? p[t] : q[t];
    const auto& b = dir == KLDirection::kPQ ? q[t] : p[t];
    double kl = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v) {
      if (a[v] > 0.0) kl += a[v] * (std::log(a[v]) - log_floor(b[v]));
    }
    r.per_position.push_back(kl);
  }
  if (!r.per_position.empty()) {
    double s = 0.0;
    for (const auto v : r.per_position) s += v;
    r.mean = s / static_cast<double>(r.per_position.size());
  }
  return r;
}

std::vector<Distributions> frozen_targets(const ToyModel& frozen,
                                          const std::vector<TrainingExample>& data) {
  std::vector<Distributions> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(forward_q(frozen, ex));
  return out;
}

LossAndGrad ka_loss_and_grad(const ToyModel& model, const std::vector<TrainingExample>& data,
                             const std::vector<Distributions>& targets, KLDirection dir) {
  if (targets.size() != data.size()) throw ShapeError("one target set per example required");
  LossAndGrad out;
  out.grad.assign(model.params().size(), 0.0);
  for (const auto& ex : data) out.positions += ex.out.size();
  if (out.positions == 0) return out;
  const double scale = 1.0 / static_cast<double>(out.positions);

  std::vector<double> dz;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    if (targets[i].size() != ex.out.size()) throw ShapeError("target positions mismatch");
    for (std::size_t t = 0; t < ex.out.size(); ++t) {
      const auto ctx = p_context(ex, t);
      const auto act = forward(model, ctx);
      if (targets[i][t].size() != act.logp.size()) throw ShapeError("target vocab mismatch");
      out.loss += scale * kl_position(act.logp, targets[i][t], dir, &dz);
      for (auto& g : dz) g *= scale;
      backward(model, act, dz, out.grad);
    }
  }
  return out;
}

double ka_loss(const ToyModel& model, const std::vector<TrainingExample>& data,
               const std::vector<Distributions>& targets, KLDirection dir) {
  std::size_t positions = 0;
  for (const auto& ex : data) positions += ex.out.size();
  if (positions == 0) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t t = 0; t < data[i].out.size(); ++t) {
      const auto act = forward(model, p_context(data[i], t));
      loss += kl_position(act.logp, targets[i][t], dir, nullptr);
    }
  }
  return loss / static_cast<double>(positions);
}

double cross_entropy_loss(const ToyModel& model, const std::vector<TrainingExample>& data) {
  double loss = 0.0;
  std::size_t positions = 0;
  for (const auto& ex : data) {
    for (std::size_t t = 0; t < ex.out.size(); ++t) {
      loss -= forward(model, q_context(ex, t)).logp[ex.out[t]];
      ++positions;
    }
  }
  return positions == 0 ? 0.0 : loss / static_cast<double>(positions);
}

// ---- training --------------------------------------------------------------

TrainResult train(ToyModel model, const ToyModel& frozen_q,
                  const std::vector<TrainingExample>& data, const TrainConfig& cfg) {
  if (data.empty()) throw ConfigError("training needs a non-empty dataset");
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(model.hyper() == frozen_q.hyper())) throw ShapeError("p and q shapes differ");
  const auto targets = frozen_targets(frozen_q, data);

  TrainResult result{std::move(model), {}};
  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    auto lg = ka_loss_and_grad(result.model, data, targets, cfg.direction);
    check_finite(lg.loss, lg.grad, step);
    result.trace.push_back({step, lg.loss, norm2(lg.grad)});
    if (step == cfg.steps) break;
    auto params = result.model.params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.lr * lg.grad[i];
  }
  return result;
}

TrainResult pretrain_q(ToyModel model, const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg) {
  if (data.empty()) throw ConfigError("training needs a non-empty dataset");
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
  std::size_t positions = 0;
  for (const auto& ex : data) positions += ex.out.size();
  const double scale = 1.0 / static_cast<double>(positions);

  TrainResult result{std::move(model), {}};
  std::vector<double> dz;
  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    std::vector<double> grad(result.model.params().size(), 0.0);
    double loss = 0.0;
    for (const auto& ex : data) {
      for (std::size_t t = 0; t < ex.out.size(); ++t) {
        const auto act = forward(result.model, q_context(ex, t));
        loss -= scale * act.logp[ex.out[t]];
        dz.resize(act.logp.size());
        for (std::size_t v = 0; v < dz.size(); ++v) dz[v] = scale * std::exp(act.logp[v]);
        dz[ex.out[t]] -= scale;
        backward(result.model, act, dz, grad);
      }
    }
    check_finite(loss, grad, step);
    result.trace.push_back({step, loss, norm2(grad)});
    if (step == cfg.steps) break;
    auto params = result.model.params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.lr * grad[i];
  }
  return result;
}

double grad_check(const ToyModel& model, const ToyModel& frozen_q,
                  const std::vector<TrainingExample>& data, double epsilon, std::uint64_t seed,
                  std::size_t samples, KLDirection dir) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw ConfigError("grad_check epsilon must lie in [1e-6, 1e-3]");
  }
  const auto targets = frozen_targets(frozen_q, data);
  const auto analytic = ka_loss_and_grad(model, data, targets, dir);

  std::vector<std::size_t> all(model.params().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(seed);
  const auto picked = rng.sample(std::move(all), samples);

  ToyModel probe = model;
  double worst = 0.0;
  for (const auto i : picked) {
    const double orig = probe.params()[i];
    probe.params()[i] = orig + epsilon;
    const double up = ka_loss(probe, data, targets, dir);
    probe.params()[i] = orig - epsilon;
    const double down = ka_loss(probe, data, targets, dir);
    probe.params()[i] = orig;
    const double fd = (up - down) / (2.0 * epsilon);
    const double ga = analytic.grad[i];
    const double rel = std::abs(ga - fd) / std::max(std::abs(ga) + std::abs(fd), 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

double argmax_agreement(const ToyModel& p, const ToyModel& frozen_q,
                        const std::vector<TrainingExample>& data) {
  std::size_t agree = 0, total = 0;
  auto argmax = [](const std::vector<double>& d) {
    return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  };
  for (const auto& ex : data) {
    const auto pd = forward_p(p, ex);
    const auto qd = forward_q(frozen_q, ex);
    for (std::size_t t = 0; t < pd.size(); ++t) {
      agree += argmax(pd[t]) == argmax(qd[t]) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "step,loss,grad_norm\n";
  char buf[96];
  for (const auto& p : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.step, p.loss, p.grad_norm);
    out << buf;
  }
}

// ---- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model,
                     const Vocab* vocab) {
  nlohmann::json j;
  j["format"] = "kgrat-toy-model";
  j["version"] = kCheckpointVersion;
  j["model"] = model.to_json();
  if (vocab != nullptr) j["vocab"] = vocab->to_json();
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const auto j = nlohmann::json::parse(in);
  if (j.value("format", "") != "kgrat-toy-model") throw ConfigError("not a toy-model checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version");
  }
  Checkpoint c{ToyModel::from_json(j.at("model")), std::nullopt};
  if (j.contains("vocab")) c.vocab = Vocab::from_json(j["vocab"]);
  return c;
}

// ---- datasets --------------------------------------------------------------

std::vector<nlohmann::ordered_json> synthetic_task_records(std::size_t subjects,
                                                           std::size_t answers) {
  static const char* kColors[] = {"red",   "green", "blue",  "yellow", "purple",
                                  "black", "white", "orange"};
  const std::size_t palette = std::min<std::size_t>(answers, std::size(kColors));
  std::vector<nlohmann::ordered_json> out;
  for (std::size_t k = 0; k < subjects; ++k) {
    const std::string subject = "item" + std::to_string(k);
    const std::string color = kColors[k % palette];
    nlohmann::ordered_json j;
    j["id"] = "synthetic-" + std::to_string(k);
    j["instruction"] = "answer with one word";
    j["question"] = "which color is " + subject + " ?";
    j["answer"] = color;
    j["rationale"] = subject + " is painted " + color + " .";
    j["status"] = "ok";
    out.push_back(std::move(j));
  }
  return out;
}

Dataset dataset_from_records(const std::vector<nlohmann::json>& records) {
  Dataset ds;
  std::vector<const nlohmann::json*> kept;
  for (const auto& r : records) {
    if (r.value("status", "ok") != "ok") continue;
    kept.push_back(&r);
    ds.vocab.add_text(r.value("instruction", ""));
    ds.vocab.add_text(r.value("question", ""));
    ds.vocab.add_text(r.value("rationale", ""));
    ds.vocab.add_text(r.value("answer", ""));
  }
  for (const auto* r : kept) {
    TrainingExample ex;
    ex.inp.push_back(kBos);
    for (const auto t : ds.vocab.encode(r->value("instruction", ""))) ex.inp.push_back(t);
    for (const auto t : ds.vocab.encode(r->value("question", ""))) ex.inp.push_back(t);
    ex.rats = ds.vocab.encode(r->value("rationale", ""));
    ex.out = ds.vocab.encode(r->value("answer", ""));
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset dataset_from_jsonl(std::istream& in) {
  std::vector<nlohmann::json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(nlohmann::json::parse(line));
  }
  return dataset_from_records(records);
}

ReferenceRun reference_run(std::uint64_t seed) {
  const auto recs = synthetic_task_records();
  return reference_run(dataset_from_records({recs.begin(), recs.end()}), seed);
}

ReferenceRun reference_run(Dataset data, std::uint64_t seed) {
  Hyper hp;
  hp.vocab = data.vocab.size();
  auto q = pretrain_q(ToyModel::random(hp, seed + 1), data.examples,
                      {kReferenceQSteps, kReferenceQLr})
               .model;
  auto p = ToyModel::random(hp, seed, kReferencePScale);
  return {std::move(data), std::move(q), std::move(p)};
}

}  // namespace kgrat::ka
