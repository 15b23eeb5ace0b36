#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "senselab/error.hpp"
#include "senselab/numeric/matrix.hpp"
#include "senselab/random.hpp"

namespace senselab::lstm {

using numeric::Matrix;

struct ModelConfig {
  std::size_t vocab_size = 0;   // V
  std::size_t context_dim = 32; // p: embedding and context width
  std::size_t hidden_dim = 64;  // h
  double learning_rate = 1.0;
  double clip_norm = 1.0;
  std::size_t batch_size = 8;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  std::size_t max_len = 100;
  double train_fraction = 1.0;  // share of the corpus used for training
  std::size_t threads = 1;

  void validate() const {
    if (vocab_size < 1 || context_dim < 1 || hidden_dim < 1 || batch_size < 1 || epochs < 1) {
      throw Error("model config: V, p, h, batch_size and epochs must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw Error("model config: learning_rate must be > 0");
    if (!(clip_norm > 0.0)) throw Error("model config: clip_norm must be > 0");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
      throw Error("model config: train_fraction must be in (0, 1]");
    }
    if (max_len < 2) throw Error("model config: max_len must be >= 2");
  }
};

// Gate blocks inside the 4h-wide gate pre-activations.
enum Gate : std::size_t { kInput = 0, kForget = 1, kCandidate = 2, kOutput = 3 };

struct LstmParams {
  Matrix E;    // V x p input embeddings
  Matrix W_x;  // p x 4h
  Matrix W_h;  // h x 4h
  Matrix b;    // 1 x 4h
  Matrix W_c;  // h x p context projection
  Matrix O;    // V x p output embeddings
  Matrix b_o;  // 1 x V

  static constexpr std::array<std::string_view, 7> kNames{"E", "W_x", "W_h", "b", "W_c", "O", "b_o"};

  static LstmParams zeros(std::size_t V, std::size_t p, std::size_t h) {
    return {Matrix(V, p), Matrix(p, 4 * h), Matrix(h, 4 * h), Matrix(1, 4 * h),
            Matrix(h, p), Matrix(V, p),     Matrix(1, V)};
  }

  std::size_t vocab_size() const { return E.rows(); }
  std::size_t context_dim() const { return E.cols(); }
  std::size_t hidden_dim() const { return W_h.rows(); }

  // Visits the matrices in checkpoint order.
  template <typename F>
  void for_each(F&& f) {
    f(kNames[0], E); f(kNames[1], W_x); f(kNames[2], W_h); f(kNames[3], b);
    f(kNames[4], W_c); f(kNames[5], O); f(kNames[6], b_o);
  }
  template <typename F>
  void for_each(F&& f) const {
    f(kNames[0], E); f(kNames[1], W_x); f(kNames[2], W_h); f(kNames[3], b);
    f(kNames[4], W_c); f(kNames[5], O); f(kNames[6], b_o);
  }

  Matrix& at(std::size_t i) {
    std::array<Matrix*, 7> all{&E, &W_x, &W_h, &b, &W_c, &O, &b_o};
    return *all.at(i);
  }
  const Matrix& at(std::size_t i) const { return const_cast<LstmParams&>(*this).at(i); }

  void set_zero() {
    for_each([](std::string_view, Matrix& m) { m.fill(0.0); });
  }

  void check_consistent() const {
    const std::size_t V = vocab_size(), p = context_dim(), h = hidden_dim();
    const bool ok = E.rows() == V && E.cols() == p && W_x.rows() == p && W_x.cols() == 4 * h &&
                    W_h.cols() == 4 * h && b.rows() == 1 && b.cols() == 4 * h &&
                    W_c.rows() == h && W_c.cols() == p && O.rows() == V && O.cols() == p &&
                    b_o.rows() == 1 && b_o.cols() == V;
    if (!ok) throw DimensionError("LSTM parameter shapes are inconsistent");
  }

  bool operator==(const LstmParams&) const = default;
};

enum class InitMode {
  standard,
  zero_output,  // diagnostic: O = 0 so every prediction is uniform
};

// Weights ~ U(-0.05, 0.05) drawn in the order E, W_x, W_h, W_c, O; gate
// bias zero except the forget block at 1.0; output bias zero.
inline LstmParams init_params(const ModelConfig& config, std::uint64_t seed,
                              InitMode mode = InitMode::standard) {
  config.validate();
  const std::size_t h = config.hidden_dim;
  LstmParams params = LstmParams::zeros(config.vocab_size, config.context_dim, h);
  Rng rng(seed);
  for (Matrix* m : {&params.E, &params.W_x, &params.W_h, &params.W_c, &params.O}) {
    for (auto& v : m->values()) v = rng.uniform(-0.05, 0.05);
  }
  for (std::size_t j = kForget * h; j < (kForget + 1) * h; ++j) params.b[j] = 1.0;
  if (mode == InitMode::zero_output) params.O.fill(0.0);
  return params;
}

}  // namespace senselab::lstm
