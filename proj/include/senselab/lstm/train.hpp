#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "senselab/corpus/vocabulary.hpp"
#include "senselab/error.hpp"
#include "senselab/lstm/network.hpp"
#include "senselab/lstm/params.hpp"
#include "senselab/random.hpp"

namespace senselab::lstm {

inline bool eligible_target(WordId id) {
  return id != Vocabulary::kUnk && id != Vocabulary::kEos && id != Vocabulary::kPad &&
         id != Vocabulary::kTgt;
}

inline std::vector<std::size_t> eligible_positions(const Sentence& s) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < s.ids.size(); ++t) {
    if (eligible_target(s.ids[t])) out.push_back(t);
  }
  return out;
}

// Cuts sentences longer than max_len ids into consecutive pieces.
inline std::vector<Sentence> split_for_training(std::span<const Sentence> corpus, std::size_t max_len) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    if (s.ids.size() <= max_len) {
      out.push_back(s);
      continue;
    }
    for (std::size_t off = 0; off < s.ids.size(); off += max_len) {
      const std::size_t end = std::min(s.ids.size(), off + max_len);
      Sentence piece;
      piece.ids.assign(s.ids.begin() + static_cast<std::ptrdiff_t>(off),
                       s.ids.begin() + static_cast<std::ptrdiff_t>(end));
      out.push_back(std::move(piece));
    }
  }
  return out;
}

struct TrainProgress {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::size_t batches = 0;
  double running_loss = 0.0;
};

struct TrainResult {
  LstmParams params;
  std::vector<double> loss_curve;  // mean held-out loss per epoch
};

// Fixed split of each batch into gradient shards. The reduction order is a
// function of the batch alone, so results do not depend on thread count.
inline constexpr std::size_t kGradientShards = 4;

class Trainer {
 public:
  Trainer(const ModelConfig& config, LstmParams params)
      : config_(config), params_(std::move(params)), sample_rng_(config.seed ^ 0x9E3779B97F4A7C15ull) {
    config_.validate();
    params_.check_consistent();
    if (params_.vocab_size() != config_.vocab_size) {
      throw DimensionError("parameters and config disagree on vocabulary size");
    }
    const std::size_t V = config_.vocab_size, p = config_.context_dim, h = config_.hidden_dim;
    grads_ = LstmParams::zeros(V, p, h);
    for (auto& s : shard_grads_) s = LstmParams::zeros(V, p, h);
  }

  const LstmParams& params() const { return params_; }
  LstmParams release() && { return std::move(params_); }

  // One SGD step on the examples; returns their mean loss before the update.
  double step(std::span<const Example> examples) {
    const std::size_t B = examples.size();
    const std::size_t shards = std::min(B, kGradientShards);
    const double scale = 1.0 / static_cast<double>(B);
    std::array<double, kGradientShards> losses{};
    auto work = [&](std::size_t s) {
      const std::size_t lo = B * s / shards, hi = B * (s + 1) / shards;
      shard_grads_[s].set_zero();
      const Batch batch = make_batch(examples.subspan(lo, hi - lo));
      losses[s] = accumulate_gradients(params_, batch, shard_grads_[s], scale);
    };
    const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(config_.threads, 1), shards);
    if (workers <= 1) {
      for (std::size_t s = 0; s < shards; ++s) work(s);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t s = w; s < shards; s += workers) work(s);
        });
      }
    }
    grads_.set_zero();
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < shards; ++s) {
      loss_sum += losses[s];
      for (std::size_t m = 0; m < 7; ++m) numeric::axpy(1.0, shard_grads_[s].at(m), grads_.at(m));
    }
    clip_global_norm(grads_, config_.clip_norm);
    for (std::size_t m = 0; m < 7; ++m) numeric::axpy(-config_.learning_rate, grads_.at(m), params_.at(m));
    return loss_sum * scale;
  }

  // Samples one eligible held-out position per sentence in a seeded order
  // and trains on consecutive batches. Returns the epoch's mean loss.
  double epoch(std::span<const Sentence> corpus, std::size_t epoch_index,
               const std::function<void(const TrainProgress&)>& progress = {}) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    sample_rng_.shuffle(order);
    std::vector<Example> examples;
    examples.reserve(order.size());
    for (std::size_t i : order) {
      const auto positions = eligible_positions(corpus[i]);
      if (positions.empty()) continue;
      examples.push_back({&corpus[i], positions[sample_rng_.index(positions.size())]});
    }
    if (examples.empty()) throw TrainingError("corpus has no eligible held-out positions");

    const std::size_t batches = (examples.size() + config_.batch_size - 1) / config_.batch_size;
    double weighted = 0.0;
    for (std::size_t k = 0; k < batches; ++k) {
      const std::size_t lo = k * config_.batch_size;
      const std::size_t n = std::min(config_.batch_size, examples.size() - lo);
      weighted += step(std::span<const Example>(examples).subspan(lo, n)) * static_cast<double>(n);
      if (progress) {
        progress({epoch_index, k + 1, batches,
                  weighted / static_cast<double>(lo + n)});
      }
    }
    return weighted / static_cast<double>(examples.size());
  }

 private:
  ModelConfig config_;
  LstmParams params_;
  LstmParams grads_;
  std::array<LstmParams, kGradientShards> shard_grads_;
  Rng sample_rng_;
};

// Keeps a seeded share of the corpus (all of it when fraction is 1).
inline std::vector<Sentence> subsample(std::span<const Sentence> corpus, double fraction,
                                       std::uint64_t seed) {
  if (fraction >= 1.0) return {corpus.begin(), corpus.end()};
  std::vector<std::size_t> idx(corpus.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed ^ 0x5DEECE66Dull);
  rng.shuffle(idx);
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(corpus.size())));
  idx.resize(std::min(keep, idx.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<Sentence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(corpus[i]);
  return out;
}

inline TrainResult train(const ModelConfig& config, std::span<const Sentence> corpus,
                         const Vocabulary& vocab,
                         const std::function<void(const TrainProgress&)>& progress = {},
                         InitMode init = InitMode::standard) {
  config.validate();
  if (config.vocab_size != vocab.size()) {
    throw DimensionError("config vocab_size " + std::to_string(config.vocab_size) +
                         " differs from vocabulary size " + std::to_string(vocab.size()));
  }
  if (corpus.empty()) throw TrainingError("training corpus is empty");
  for (const auto& s : corpus) {
    for (WordId id : s.ids) {
      if (id >= vocab.size()) throw DimensionError("corpus id outside the vocabulary");
    }
  }
  const std::vector<Sentence> pieces =
      split_for_training(subsample(corpus, config.train_fraction, config.seed), config.max_len);
  const bool any_eligible = std::any_of(pieces.begin(), pieces.end(), [](const Sentence& s) {
    return !eligible_positions(s).empty();
  });
  if (!any_eligible) throw TrainingError("corpus has no eligible held-out positions");

  Trainer trainer(config, init_params(config, config.seed, init));
  TrainResult result;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    result.loss_curve.push_back(trainer.epoch(pieces, e, progress));
  }
  result.params = std::move(trainer).release();
  return result;
}

}  // namespace senselab::lstm
