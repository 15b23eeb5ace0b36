#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

#include "senselab/corpus/annotated.hpp"
#include "senselab/error.hpp"
#include "senselab/lstm/network.hpp"
#include "senselab/lstm/train.hpp"

namespace senselab::lstm {

struct ExtractOptions {
  corpus::TokenizeOptions tokens{};
  std::size_t max_len = 100;
  std::size_t threads = 1;
};

// Context vectors for many (sentence, position) pairs. Batch rows are
// computed independently, so each vector equals its single-example value.
inline std::vector<std::vector<double>> contexts_of(const LstmParams& params,
                                                    std::span<const Example> examples,
                                                    std::size_t threads = 1) {
  constexpr std::size_t kChunk = 64;
  std::vector<std::vector<double>> out(examples.size());
  const std::size_t chunks = (examples.size() + kChunk - 1) / kChunk;
  auto work = [&](std::size_t k) {
    const std::size_t lo = k * kChunk, n = std::min(kChunk, examples.size() - lo);
    const ForwardCache cache = forward(params, make_batch(examples.subspan(lo, n)));
    for (std::size_t r = 0; r < n; ++r) {
      out[lo + r].assign(cache.context.row(r).begin(), cache.context.row(r).end());
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), chunks);
  if (workers <= 1) {
    for (std::size_t k = 0; k < chunks; ++k) work(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < chunks; k += workers) work(k);
      });
    }
  }
  return out;
}

// Context vector of an annotated occurrence: the instance sentence is
// encoded under `vocab` and read with its target held out. The target
// itself may be out of vocabulary since no loss is computed.
inline ContextVector extract_context(const LstmParams& params, const corpus::AnnotatedInstance& inst,
                                     const Vocabulary& vocab, const ExtractOptions& opts = {}) {
  const auto enc = corpus::encode_instance(inst, vocab, opts.tokens, opts.max_len);
  const Example ex{&enc.sentence, enc.target_position};
  ContextVector cv;
  cv.values = std::move(contexts_of(params, std::span<const Example>(&ex, 1))[0]);
  cv.sentence_id = inst.sentence_id;
  cv.target_position = inst.target_position;
  return cv;
}

inline std::vector<std::vector<double>> extract_contexts(
    const LstmParams& params, std::span<const corpus::AnnotatedInstance> instances,
    const Vocabulary& vocab, const ExtractOptions& opts = {}) {
  std::vector<corpus::EncodedInstance> encoded;
  encoded.reserve(instances.size());
  for (const auto& inst : instances) {
    encoded.push_back(corpus::encode_instance(inst, vocab, opts.tokens, opts.max_len));
  }
  std::vector<Example> examples;
  examples.reserve(encoded.size());
  for (const auto& e : encoded) examples.push_back({&e.sentence, e.target_position});
  return contexts_of(params, examples, opts.threads);
}

// exp(mean held-out cross-entropy), holding out the middle eligible
// position of every sentence.
inline double perplexity(const LstmParams& params, std::span<const Sentence> corpus) {
  std::vector<Example> examples;
  for (const auto& s : corpus) {
    const auto positions = eligible_positions(s);
    if (positions.empty()) continue;
    examples.push_back({&s, positions[positions.size() / 2]});
  }
  if (examples.empty()) throw Error("perplexity: corpus has no eligible positions");
  constexpr std::size_t kChunk = 64;
  double total = 0.0;
  for (std::size_t lo = 0; lo < examples.size(); lo += kChunk) {
    const std::size_t n = std::min(kChunk, examples.size() - lo);
    for (double l : row_losses(params, make_batch(std::span<const Example>(examples).subspan(lo, n)))) {
      total += l;
    }
  }
  return std::exp(total / static_cast<double>(examples.size()));
}

}  // namespace senselab::lstm
