#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "senselab/cli/selfcheck.hpp"
#include "senselab/io.hpp"
#include "senselab/lstm/checkpoint.hpp"
#include "senselab/lstm/inference.hpp"
#include "senselab/lstm/network.hpp"
#include "senselab/lstm/train.hpp"
#include "senselab/random.hpp"

namespace senselab::lstm {
namespace {

using corpus::Sentence;
using corpus::Vocabulary;
using numeric::Matrix;

ModelConfig small_config(std::size_t V = 12) {
  ModelConfig c;
  c.vocab_size = V;
  c.context_dim = 4;
  c.hidden_dim = 6;
  return c;
}

Sentence sentence(std::vector<corpus::WordId> ids) {
  ids.push_back(Vocabulary::kEos);
  return Sentence{std::move(ids)};
}

// Sentences walking a ring of words, so every held-out word is predictable.
std::pair<Vocabulary, std::vector<Sentence>> ring_corpus(std::size_t words, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<corpus::SurfaceSentence> surf(n);
  for (auto& s : surf) {
    std::size_t w = rng.index(words);
    for (std::size_t k = 0, len = 4 + rng.index(3); k < len; ++k, w = (w + 1) % words) {
      s.push_back("r" + std::to_string(w));
    }
  }
  Vocabulary v = corpus::build_vocabulary(surf, 1000, 1);
  std::vector<Sentence> enc;
  for (const auto& s : surf) enc.push_back(corpus::encode(s, v));
  return {std::move(v), std::move(enc)};
}

TEST(Forward, ShapesOfCache) {
  const auto params = init_params(small_config(), 1);
  const auto s = sentence({4, 5, 6});
  const Example ex{&s, 1};
  const auto cache = forward(params, make_batch(std::span<const Example>(&ex, 1)));
  EXPECT_EQ(cache.h.size(), 4u);
  EXPECT_EQ(cache.h[0].cols(), 6u);
  EXPECT_EQ(cache.gates[0].cols(), 24u);
  EXPECT_EQ(cache.context.cols(), 4u);
  EXPECT_EQ(cache.logits.cols(), 12u);
  for (double v : cache.context.values()) EXPECT_LE(std::abs(v), 1.0);
}

TEST(Forward, ZeroOutputGivesUniformLoss) {
  const auto params = init_params(small_config(), 3, InitMode::zero_output);
  const auto s = sentence({4, 7, 9, 5});
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NEAR(forward_heldout(params, s, t).loss, std::log(12.0), 1e-12);
}

TEST(Forward, RejectsBadIds) {
  const auto params = init_params(small_config(), 1);
  const auto s = sentence({4, 50});
  EXPECT_THROW(forward_heldout(params, s, 0), DimensionError);
  const auto u = sentence({4, Vocabulary::kUnk});
  EXPECT_THROW(forward_heldout(params, u, 1), Error);
}

TEST(Forward, PaddingDoesNotChangeOutputs) {
  const auto [params, s] = cli::random_lstm_point(5);
  const Example ex{&s, 2};
  const auto plain = forward(params, make_batch(std::span<const Example>(&ex, 1)));
  const auto padded = forward(params, make_batch(std::span<const Example>(&ex, 1), s.ids.size() + 7));
  EXPECT_EQ(plain.context, padded.context);
  EXPECT_EQ(plain.logits, padded.logits);

  // Rows in a mixed-length batch match their single-row values exactly.
  const auto longer = sentence({4, 5, 6, 7, 8, 9, 10, 11});
  const std::vector<Example> both{{&s, 2}, {&longer, 5}};
  const auto batched = forward(params, make_batch(both));
  const Example ex2{&longer, 5};
  const auto alone = forward(params, make_batch(std::span<const Example>(&ex2, 1)));
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(batched.context(0, j), plain.context(0, j));
    EXPECT_EQ(batched.context(1, j), alone.context(0, j));
  }
}

TEST(Forward, TargetIdentityIsHidden) {
  const auto params = init_params(small_config(), 2);
  const auto a = sentence({4, 5, 6}), b = sentence({4, 9, 6});
  EXPECT_EQ(forward_heldout(params, a, 1).context.values, forward_heldout(params, b, 1).context.values);
  EXPECT_NE(forward_heldout(params, a, 0).context.values, forward_heldout(params, b, 0).context.values);
}

class LstmGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LstmGradient, AllMatricesMatchFiniteDifferences) {
  const auto [params, s] = cli::random_lstm_point(GetParam());
  for (std::size_t m = 0; m < 7; ++m) {
    const auto report = cli::check_lstm_matrix(params, s, 1 + GetParam() % 3, m, 1e-6);
    EXPECT_TRUE(report.passed()) << report.op << " max_rel=" << report.max_rel_error;
    EXPECT_GT(report.checked, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LstmGradient, ::testing::Values(1u, 2u, 3u));

TEST(Gradient, BatchGradientIsSumOfRowGradients) {
  const auto [params, s] = cli::random_lstm_point(8);
  const auto t = sentence({5, 6, 7});
  const std::vector<Example> both{{&s, 1}, {&t, 2}};
  auto zero = [&] { return LstmParams::zeros(12, 4, 6); };
  LstmParams g_both = zero(), g_sep = zero();
  const double l2 = accumulate_gradients(params, make_batch(both), g_both, 1.0);
  double l1 = accumulate_gradients(params, make_batch(std::span<const Example>(&both[0], 1)), g_sep, 1.0);
  l1 += accumulate_gradients(params, make_batch(std::span<const Example>(&both[1], 1)), g_sep, 1.0);
  EXPECT_NEAR(l1, l2, 1e-12);
  for (std::size_t m = 0; m < 7; ++m)
    for (std::size_t i = 0; i < g_both.at(m).size(); ++i) EXPECT_NEAR(g_both.at(m)[i], g_sep.at(m)[i], 1e-12);
}

TEST(Clipping, BoundsGlobalNorm) {
  auto g = LstmParams::zeros(6, 2, 3);
  g.O.fill(10.0);
  const double before = clip_global_norm(g, 5.0);
  EXPECT_NEAR(before, 10.0 * std::sqrt(12.0), 1e-12);
  EXPECT_NEAR(global_norm(g), 5.0, 1e-12);
  auto small = LstmParams::zeros(6, 2, 3);
  small.b.fill(0.1);
  clip_global_norm(small, 5.0);
  EXPECT_EQ(small.b[0], 0.1);
}

TEST(Init, DeterministicWithForgetBias) {
  const auto cfg = small_config();
  const auto a = init_params(cfg, 42), b = init_params(cfg, 42), c = init_params(cfg, 43);
  EXPECT_EQ(a.E, b.E);
  EXPECT_EQ(a.O, b.O);
  EXPECT_NE(a.E, c.E);
  for (std::size_t j = 0; j < 24; ++j) EXPECT_EQ(a.b[j], (j >= 6 && j < 12) ? 1.0 : 0.0);
  for (double v : a.W_x.values()) EXPECT_LE(std::abs(v), 0.05);
  for (double v : a.b_o.values()) EXPECT_EQ(v, 0.0);
}

// Each sentence repeats one word, so any held-out word is recoverable.
std::pair<Vocabulary, std::vector<Sentence>> repeat_corpus(std::size_t words, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<corpus::SurfaceSentence> surf(n);
  for (auto& s : surf) s.assign(4 + rng.index(5), "w" + std::to_string(rng.index(words)));
  Vocabulary v = corpus::build_vocabulary(surf, 1000, 1);
  std::vector<Sentence> enc;
  for (const auto& s : surf) enc.push_back(corpus::encode(s, v));
  return {std::move(v), std::move(enc)};
}

TEST(Training, LossDecreases) {
  auto [vocab, corpus] = repeat_corpus(10, 50, 3);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 16;
  cfg.hidden_dim = 32;
  cfg.batch_size = 1;
  cfg.clip_norm = 1.0;
  cfg.epochs = 40;
  cfg.seed = 3;
  const auto r = train(cfg, corpus, vocab);
  ASSERT_EQ(r.loss_curve.size(), 40u);
  EXPECT_LT(r.loss_curve.back(), 0.5 * r.loss_curve.front());
  EXPECT_LT(perplexity(r.params, corpus), 1.5);
}

TEST(Training, ThreadCountDoesNotChangeResults) {
  auto [vocab, corpus] = ring_corpus(10, 60, 4);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 8;
  cfg.hidden_dim = 12;
  cfg.batch_size = 8;
  cfg.epochs = 3;
  cfg.seed = 7;
  const auto r1 = train(cfg, corpus, vocab);
  cfg.threads = 3;
  const auto r3 = train(cfg, corpus, vocab);
  EXPECT_EQ(r1.loss_curve, r3.loss_curve);
  EXPECT_EQ(r1.params.E, r3.params.E);
  EXPECT_EQ(r1.params.O, r3.params.O);
  cfg.seed = 8;
  EXPECT_NE(train(cfg, corpus, vocab).loss_curve, r1.loss_curve);
}

TEST(Training, ProgressReportsEveryBatch) {
  auto [vocab, corpus] = ring_corpus(8, 20, 2);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 4;
  cfg.hidden_dim = 4;
  cfg.batch_size = 6;
  cfg.epochs = 2;
  std::size_t calls = 0;
  train(cfg, corpus, vocab, [&](const TrainProgress& p) {
    ++calls;
    EXPECT_EQ(p.batches, 4u);
    EXPECT_TRUE(std::isfinite(p.running_loss));
  });
  EXPECT_EQ(calls, 8u);
}

TEST(Training, ErrorsOnUnusableCorpora) {
  const auto vocab = corpus::build_vocabulary({{"a", "b"}}, 100, 1);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  EXPECT_THROW(train(cfg, std::vector<Sentence>{}, vocab), TrainingError);
  const std::vector<Sentence> only_unk{sentence({Vocabulary::kUnk})};
  EXPECT_THROW(train(cfg, only_unk, vocab), TrainingError);
  cfg.vocab_size = 99;
  const std::vector<Sentence> ok{sentence({4, 5})};
  EXPECT_THROW(train(cfg, ok, vocab), DimensionError);
  cfg.vocab_size = vocab.size();
  cfg.hidden_dim = 0;
  EXPECT_THROW(train(cfg, ok, vocab), Error);
}

TEST(Training, SplitLongSentences) {
  const std::vector<Sentence> in{sentence({4, 5, 6, 7, 8})};
  const auto out = split_for_training(in, 3);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].ids, (std::vector<corpus::WordId>{4, 5, 6}));
  EXPECT_EQ(out[1].ids.back(), Vocabulary::kEos);
}

TEST(Perplexity, UniformModelGivesVocabularySize) {
  auto [vocab, corpus] = ring_corpus(6, 10, 1);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 4;
  cfg.hidden_dim = 4;
  const auto params = init_params(cfg, 1, InitMode::zero_output);
  EXPECT_NEAR(perplexity(params, corpus), static_cast<double>(vocab.size()), 1e-9);
  EXPECT_GE(perplexity(init_params(cfg, 1), corpus), 1.0);
}

TEST(Inference, BatchedExtractionMatchesSingle) {
  auto [vocab, corpus] = ring_corpus(8, 100, 3);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.context_dim = 5;
  cfg.hidden_dim = 7;
  const auto params = init_params(cfg, 9);
  std::vector<Example> ex;
  for (const auto& s : corpus) ex.push_back({&s, 1});
  const auto many = contexts_of(params, ex, 3);
  ASSERT_EQ(many.size(), 100u);
  for (std::size_t i = 0; i < ex.size(); i += 17) {
    EXPECT_EQ(many[i], forward_heldout(params, corpus[i], 1).context.values);
  }
}

class CheckpointTest : public ::testing::Test {
 protected:
  ModelConfig cfg = small_config();
  LstmParams params = init_params(cfg, 11);
  io::Digest digest = io::sha256("vocab");
  std::string bytes = serialize_checkpoint(params, cfg, digest);

  CheckpointError::Kind kind_of(std::string_view b, std::optional<io::Digest> d = std::nullopt) {
    try {
      parse_checkpoint(b, d);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "checkpoint accepted";
    return CheckpointError::Kind::io;
  }
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const auto ck = parse_checkpoint(bytes, digest);
  EXPECT_EQ(ck.vocab_digest, digest);
  EXPECT_EQ(ck.config.vocab_size, 12u);
  EXPECT_EQ(ck.config.hidden_dim, 6u);
  for (std::size_t m = 0; m < 7; ++m) EXPECT_EQ(ck.params.at(m), params.at(m));
  EXPECT_EQ(serialize_checkpoint(ck.params, ck.config, ck.vocab_digest), bytes);
}

TEST_F(CheckpointTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "senselab_ckpt_test.bin";
  save_checkpoint(params, cfg, digest, path);
  EXPECT_EQ(load_checkpoint(path).params.W_h, params.W_h);
  std::filesystem::remove(path);
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::io);
  }
}

TEST_F(CheckpointTest, CorruptionIsDetected) {
  using K = CheckpointError::Kind;
  std::string b = bytes;
  b[0] = 'X';
  EXPECT_EQ(kind_of(b), K::bad_magic);
  b = bytes;
  b[6] = 2;
  EXPECT_EQ(kind_of(b), K::version_mismatch);
  EXPECT_EQ(kind_of(bytes.substr(0, bytes.size() - 9)), K::truncated);
  EXPECT_EQ(kind_of(bytes.substr(0, 20)), K::truncated);
  b = bytes;
  b[200] ^= 0x01;
  EXPECT_EQ(kind_of(b), K::checksum);
  EXPECT_EQ(kind_of(bytes + "x"), K::checksum);
  EXPECT_EQ(kind_of(bytes, io::sha256("other")), K::digest_mismatch);
}

}  // namespace
}  // namespace senselab::lstm
