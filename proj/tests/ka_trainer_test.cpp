#include "kgrat/ka_trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgrat/error.hpp"
#include "kgrat/random.hpp"
#include "oracles.hpp"

namespace kgrat::ka {
namespace {

const std::filesystem::path kData = KGRAT_TEST_DATA_DIR;

Dataset SyntheticTask() {
  std::ifstream in(kData / "synthetic_task.jsonl");
  return dataset_from_jsonl(in);
}

Hyper Small(std::size_t vocab) {
  Hyper hp;
  hp.vocab = vocab;
  hp.dim = 4;
  hp.hidden = 5;
  hp.window = 4;
  return hp;
}

std::vector<TrainingExample> TinyData() {
  return {{{kBos, 4, 5}, {6, 7}, {8, kEos}}, {{kBos, 5, 4, 6}, {7}, {9}}};
}

std::vector<double> RandomDistribution(Rng& rng, std::size_t n, bool sparse) {
  std::vector<double> d(n);
  for (auto& v : d) v = (sparse && rng.below(3) == 0) ? 0.0 : rng.uniform();
  if (std::accumulate(d.begin(), d.end(), 0.0) == 0.0) d[0] = 1.0;
  const double s = std::accumulate(d.begin(), d.end(), 0.0);
  for (auto& v : d) v /= s;
  return d;
}

TEST(VocabTest, ReservedAndTokenize) {
  Vocab v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(*v.find("<eos>"), kEos);
  EXPECT_EQ(Vocab::tokenize("Which Color, is it?"),
            (std::vector<std::string>{"which", "color", ",", "is", "it", "?"}));
  v.add_text("red green");
  EXPECT_EQ(v.encode("green blue"), (std::vector<TokenId>{5, kPad}));
  EXPECT_EQ(Vocab::from_json(v.to_json()).tokens(), v.tokens());
}

TEST(ToyModelTest, ShapeAndValidation) {
  EXPECT_THROW(ToyModel(Hyper{4, 2, 2, 2}), ConfigError);
  const ToyModel m(Small(10));
  EXPECT_EQ(m.params().size(), 10u * 4 + 5 * 4 + 5 + 10 * 5 + 10);
  EXPECT_EQ(m.off_b2() + 10, m.params().size());
}

TEST(ForwardTest, ZeroModelIsUniform) {
  const auto m = ToyModel::zeros(Small(10));
  const auto d = forward_p(m, TinyData()[0]);
  ASSERT_EQ(d.size(), 2u);
  for (const auto& row : d) {
    for (const auto v : row) EXPECT_DOUBLE_EQ(v, 0.1);
  }
}

TEST(ForwardTest, SinglePositionAndNormalization) {
  const auto m = ToyModel::random(Small(10), 3);
  const auto d = forward_p(m, TinyData()[1]);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(std::accumulate(d[0].begin(), d[0].end(), 0.0), 1.0, 1e-9);
}

TEST(ForwardTest, Deterministic) {
  const auto a = forward_q(ToyModel::random(Small(10), 5), TinyData()[0]);
  const auto b = forward_q(ToyModel::random(Small(10), 5), TinyData()[0]);
  EXPECT_EQ(a, b);
}

TEST(ForwardTest, ContextsAndWindow) {
  const TrainingExample ex{{kBos, 4}, {6}, {8, 9}};
  EXPECT_EQ(p_context(ex, 1), (std::vector<TokenId>{kBos, 4, 8}));
  EXPECT_EQ(q_context(ex, 1), (std::vector<TokenId>{kBos, 4, kSep, 6, 8}));
  const TrainingExample no_rats{{kBos, 4}, {}, {8}};
  EXPECT_EQ(q_context(no_rats, 0), p_context(no_rats, 0));
  // With an empty rationale the same weights give identical p and q.
  const auto m = ToyModel::random(Small(10), 2);
  EXPECT_EQ(forward_p(m, no_rats), forward_q(m, no_rats));
  // Tokens older than the window do not matter.
  const std::vector<TokenId> long_ctx{7, 7, 7, 4, 5, 6, 8};
  const std::vector<TokenId> other{9, 4, 5, 6, 8};
  EXPECT_EQ(next_token_distribution(m, long_ctx), next_token_distribution(m, other));
  EXPECT_THROW(next_token_distribution(m, std::vector<TokenId>{42}), ShapeError);
}

TEST(KlLossTest, IdentityAndHandCase) {
  const Distributions p{{0.2, 0.3, 0.5}, {1.0, 0.0, 0.0}};
  const auto self = kl_loss(p, p);
  for (const auto v : self.per_position) EXPECT_LT(std::abs(v), 1e-10);
  const auto hand = kl_loss({{1.0, 0.0}}, {{0.5, 0.5}});
  EXPECT_NEAR(hand.mean, std::log(2.0), 1e-9);
  EXPECT_THROW(kl_loss({{1.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}), ShapeError);
  EXPECT_THROW(kl_loss({{1.0, 0.0}}, {{1.0, 0.0, 0.0}}), ShapeError);
}

TEST(KlLossTest, FloorKeepsValuesFinite) {
  const auto r = kl_loss({{0.5, 0.5}}, {{1.0, 0.0}});
  EXPECT_TRUE(std::isfinite(r.mean));
  EXPECT_NEAR(r.mean, oracle::kl({0.5, 0.5}, {1.0, 0.0}), 1e-12);
}

TEST(KlLossTest, NonNegativeAndMatchesOracle) {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto n = 2 + rng.below(8);
    const auto p = RandomDistribution(rng, n, i % 2 == 0);
    const auto q = RandomDistribution(rng, n, i % 3 == 0);
    const auto r = kl_loss({p}, {q});
    EXPECT_GE(r.per_position[0], -1e-12);
    EXPECT_NEAR(r.per_position[0], oracle::kl(p, q), 1e-9);
  }
}

TEST(GradientTest, MatchesFiniteDifferences) {
  const auto data = TinyData();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = ToyModel::random(Small(10), seed, 0.5);
    const auto q = ToyModel::random(Small(10), seed + 100, 0.5);
    EXPECT_LT(grad_check(p, q, data, 1e-4, seed), 1e-4);
    EXPECT_LT(grad_check(p, q, data, 1e-4, seed, 50, KLDirection::kQP), 1e-4);
  }
  EXPECT_THROW(grad_check(ToyModel::zeros(Small(10)), ToyModel::zeros(Small(10)), data, 1e-2, 0),
               ConfigError);
}

TEST(GradientTest, ZeroAtMinimum) {
  const std::vector<TrainingExample> data{{{kBos, 4}, {}, {5, kEos}}};
  const auto m = ToyModel::random(Small(10), 9, 0.5);
  const auto lg = ka_loss_and_grad(m, data, frozen_targets(m, data));
  EXPECT_LT(std::abs(lg.loss), 1e-12);
  for (const auto g : lg.grad) {
    EXPECT_TRUE(std::isfinite(g));
    EXPECT_LT(std::abs(g), 1e-12);
  }
}

TEST(TrainTest, StationaryWhenPEqualsQ) {
  const std::vector<TrainingExample> data{{{kBos, 4}, {}, {5}}};
  const auto m = ToyModel::random(Small(10), 4);
  const auto r = train(m, m, data, {20, 0.1});
  EXPECT_LT(r.trace.front().loss, 1e-12);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    EXPECT_NEAR(r.model.params()[i], m.params()[i], 1e-12);
  }
}

TEST(TrainTest, ValidationAndTraceLength) {
  const auto m = ToyModel::random(Small(10), 4);
  EXPECT_THROW(train(m, m, {}, {}), ConfigError);
  EXPECT_THROW(train(m, m, TinyData(), {10, 0.0}), ConfigError);
  EXPECT_THROW(train(m, ToyModel::zeros(Small(11)), TinyData(), {}), ShapeError);
  const auto r = train(m, ToyModel::random(Small(10), 5), TinyData(), {7, 0.1});
  EXPECT_EQ(r.trace.size(), 8u);
  EXPECT_EQ(r.trace.back().step, 7u);
}

TEST(TrainTest, NonFiniteAborts) {
  auto m = ToyModel::random(Small(10), 4);
  m.params()[m.off_b2()] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(m, ToyModel::random(Small(10), 5), TinyData(), {3, 0.1}), NumericError);
}

TEST(TrainTest, CheckedInTaskMatchesGenerator) {
  const auto recs = synthetic_task_records();
  std::ostringstream expected;
  for (const auto& r : recs) expected << r.dump() << '\n';
  EXPECT_EQ(oracle::slurp(kData / "synthetic_task.jsonl"), expected.str());
}

TEST(TrainTest, QPretrainingRaisesAnswerMass) {
  const auto ds = SyntheticTask();
  Hyper hp;
  hp.vocab = ds.vocab.size();
  const auto init = ToyModel::random(hp, 3);
  const auto q = pretrain_q(init, ds.examples, {300, 0.5}).model;
  EXPECT_LT(cross_entropy_loss(q, ds.examples), cross_entropy_loss(init, ds.examples));
  for (const auto& ex : ds.examples) {
    const auto pd = forward_p(q, ex);
    const auto qd = forward_q(q, ex);
    EXPECT_GT(qd[0][ex.out[0]], pd[0][ex.out[0]]);
  }
}

TEST(TrainTest, ReferenceRunAligns) {
  auto ref = reference_run(SyntheticTask(), 7);
  const auto q_sum = ref.q.checksum();
  const double before = argmax_agreement(ref.p, ref.q, ref.data.examples);
  const auto r = train(ref.p, ref.q, ref.data.examples, {});
  EXPECT_EQ(ref.q.checksum(), q_sum);
  EXPECT_LE(r.trace.back().loss, 0.1 * r.trace.front().loss);
  EXPECT_LE(r.trace.back().loss, r.trace.front().loss);
  const double after = argmax_agreement(r.model, ref.q, ref.data.examples);
  EXPECT_GE(after, 0.95);
  EXPECT_LT(before, after);
  EXPECT_DOUBLE_EQ(argmax_agreement(ref.q, ref.q, ref.data.examples), 1.0);

  const auto again = train(ref.p, ref.q, ref.data.examples, {});
  EXPECT_EQ(again.model, r.model);
  ASSERT_EQ(again.trace.size(), r.trace.size());
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(again.trace[i].loss, r.trace[i].loss);
}

TEST(CheckpointTest, RoundTrip) {
  const auto ds = SyntheticTask();
  Hyper hp;
  hp.vocab = ds.vocab.size();
  const auto m = ToyModel::random(hp, 12);
  const auto path = std::filesystem::temp_directory_path() / "kgrat_ckpt_test.json";
  save_checkpoint(path, m, &ds.vocab);
  const auto c = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(c.model, m);
  EXPECT_EQ(c.model.checksum(), m.checksum());
  ASSERT_TRUE(c.vocab.has_value());
  EXPECT_EQ(c.vocab->tokens(), ds.vocab.tokens());
  EXPECT_EQ(forward_q(c.model, ds.examples[0]), forward_q(m, ds.examples[0]));
}

TEST(TraceCsvTest, Format) {
  std::ostringstream out;
  write_trace_csv(out, {{0, 1.5, 2.0}, {1, 0.25, 0.5}});
  EXPECT_EQ(out.str(), "step,loss,grad_norm\n0,1.5,2\n1,0.25,0.5\n");
}

TEST(DatasetTest, SkipsFailedRecords) {
  std::istringstream in(
      "{\"instruction\":\"i\",\"question\":\"q one\",\"answer\":\"a\",\"rationale\":\"r\","
      "\"status\":\"ok\"}\n"
      "{\"instruction\":\"i\",\"question\":\"q\",\"answer\":\"b\",\"rationale\":\"\","
      "\"status\":\"failed\"}\n");
  const auto ds = dataset_from_jsonl(in);
  ASSERT_EQ(ds.examples.size(), 1u);
  EXPECT_EQ(ds.examples[0].inp.front(), kBos);
  EXPECT_EQ(ds.examples[0].out.size(), 1u);
  EXPECT_FALSE(ds.vocab.find("b").has_value());
}

}  // namespace
}  // namespace kgrat::ka
