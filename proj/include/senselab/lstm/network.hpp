#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "senselab/corpus/vocabulary.hpp"
#include "senselab/error.hpp"
#include "senselab/lstm/params.hpp"
#include "senselab/numeric/matrix.hpp"
#include "senselab/numeric/ops.hpp"

namespace senselab::lstm {

using corpus::Sentence;
using corpus::Vocabulary;
using corpus::WordId;

// One held-out-word example: a sentence and the position to predict.
struct Example {
  const Sentence* sentence = nullptr;
  std::size_t target_position = 0;
};

// Rows are examples, columns time steps. The target token of each row is
// replaced by TGT and rows are padded with PAD up to the longest row.
struct Batch {
  std::size_t rows = 0;
  std::size_t steps = 0;
  std::vector<WordId> inputs;   // rows x steps
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> targets;  // held-out word ids

  WordId input(std::size_t r, std::size_t t) const { return inputs[r * steps + t]; }
};

inline Batch make_batch(std::span<const Example> examples, std::size_t min_steps = 0) {
  Batch batch;
  batch.rows = examples.size();
  batch.steps = min_steps;
  for (const auto& ex : examples) {
    if (ex.sentence->ids.empty()) throw Error("empty sentence in batch");
    if (ex.target_position >= ex.sentence->ids.size()) {
      throw Error("target position " + std::to_string(ex.target_position) +
                  " outside sentence of length " + std::to_string(ex.sentence->ids.size()));
    }
    batch.steps = std::max(batch.steps, ex.sentence->ids.size());
  }
  batch.inputs.assign(batch.rows * batch.steps, Vocabulary::kPad);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto& ids = examples[r].sentence->ids;
    for (std::size_t t = 0; t < ids.size(); ++t) batch.inputs[r * batch.steps + t] = ids[t];
    batch.inputs[r * batch.steps + examples[r].target_position] = Vocabulary::kTgt;
    batch.lengths.push_back(ids.size());
    batch.targets.push_back(ids[examples[r].target_position]);
  }
  return batch;
}

// Activations kept for the backward pass.
struct ForwardCache {
  std::vector<Matrix> x;      // per step: rows x p
  std::vector<Matrix> gates;  // per step: rows x 4h, after nonlinearities
  std::vector<Matrix> c;      // per step: rows x h
  std::vector<Matrix> tanh_c;
  std::vector<Matrix> h;
  Matrix context;  // rows x p
  Matrix logits;   // rows x V
};

inline void check_ids(const LstmParams& params, const Batch& batch) {
  const std::size_t V = params.vocab_size();
  for (WordId id : batch.inputs) {
    if (id >= V) {
      throw DimensionError("word id " + std::to_string(id) + " outside vocabulary of size " +
                           std::to_string(V));
    }
  }
}

// Runs the recurrence over every row of the batch from a zero state.
// Steps past a row's length leave its state untouched.
inline ForwardCache forward(const LstmParams& params, const Batch& batch) {
  params.check_consistent();
  check_ids(params, batch);
  const std::size_t B = batch.rows, T = batch.steps, p = params.context_dim(),
                    h = params.hidden_dim();
  ForwardCache cache;
  cache.x.reserve(T);
  cache.gates.reserve(T);
  cache.c.reserve(T);
  cache.tanh_c.reserve(T);
  cache.h.reserve(T);
  Matrix h_prev(B, h), c_prev(B, h);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix x(B, p);
    for (std::size_t r = 0; r < B; ++r) {
      const WordId id = batch.input(r, t);
      if (id == Vocabulary::kPad) continue;
      auto src = params.E.row(id);
      std::copy(src.begin(), src.end(), x.row(r).begin());
    }
    Matrix z = numeric::matmul(x, params.W_x);
    numeric::add_row_bias(z, params.b);
    const Matrix zh = numeric::matmul(h_prev, params.W_h);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += zh[i];

    Matrix c(B, h), tc(B, h), hh(B, h);
    for (std::size_t r = 0; r < B; ++r) {
      auto zr = z.row(r);
      if (t >= batch.lengths[r]) {
        std::fill(zr.begin(), zr.end(), 0.0);
        for (std::size_t j = 0; j < h; ++j) {
          c(r, j) = c_prev(r, j);
          hh(r, j) = h_prev(r, j);
          tc(r, j) = 0.0;
        }
        continue;
      }
      for (std::size_t j = 0; j < h; ++j) {
        const double in = numeric::sigmoid(zr[kInput * h + j]);
        const double fg = numeric::sigmoid(zr[kForget * h + j]);
        const double cand = std::tanh(zr[kCandidate * h + j]);
        const double out = numeric::sigmoid(zr[kOutput * h + j]);
        zr[kInput * h + j] = in;
        zr[kForget * h + j] = fg;
        zr[kCandidate * h + j] = cand;
        zr[kOutput * h + j] = out;
        c(r, j) = fg * c_prev(r, j) + in * cand;
        tc(r, j) = std::tanh(c(r, j));
        hh(r, j) = out * tc(r, j);
      }
    }
    cache.x.push_back(std::move(x));
    cache.gates.push_back(std::move(z));
    cache.c.push_back(c);
    cache.tanh_c.push_back(std::move(tc));
    cache.h.push_back(hh);
    h_prev = std::move(hh);
    c_prev = std::move(c);
  }
  cache.context = numeric::tanh(numeric::matmul(h_prev, params.W_c));
  cache.logits = numeric::matmul_nt(cache.context, params.O);
  numeric::add_row_bias(cache.logits, params.b_o);
  return cache;
}

// Adds grad_scale * d(sum of row losses)/d(params) into `grads` and
// returns the sum of row losses.
inline double accumulate_gradients(const LstmParams& params, const Batch& batch, LstmParams& grads,
                                   double grad_scale) {
  const ForwardCache cache = forward(params, batch);
  const std::size_t B = batch.rows, T = batch.steps, h = params.hidden_dim();

  double loss_sum = 0.0;
  const Matrix dlogits = numeric::xent_rows(cache.logits, batch.targets, grad_scale, loss_sum);

  numeric::add_matmul_tn(grads.O, dlogits, cache.context);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t v = 0; v < dlogits.cols(); ++v) grads.b_o[v] += dlogits(r, v);

  Matrix da = numeric::matmul(dlogits, params.O);  // d context
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double u = cache.context[i];
    da[i] *= 1.0 - u * u;
  }
  const Matrix& h_final = T > 0 ? cache.h.back() : Matrix(B, h);
  numeric::add_matmul_tn(grads.W_c, h_final, da);
  Matrix dh = numeric::matmul_nt(da, params.W_c);
  Matrix dc(B, h);
  const Matrix zeros(B, h);

  for (std::size_t t = T; t-- > 0;) {
    const Matrix& g = cache.gates[t];
    const Matrix& c_prev = t > 0 ? cache.c[t - 1] : zeros;
    const Matrix& h_prev = t > 0 ? cache.h[t - 1] : zeros;
    Matrix dz(B, 4 * h);
    for (std::size_t r = 0; r < B; ++r) {
      if (t >= batch.lengths[r]) continue;  // masked: dh, dc pass through unchanged
      for (std::size_t j = 0; j < h; ++j) {
        const double in = g(r, kInput * h + j);
        const double fg = g(r, kForget * h + j);
        const double cand = g(r, kCandidate * h + j);
        const double out = g(r, kOutput * h + j);
        const double tc = cache.tanh_c[t](r, j);
        const double dhv = dh(r, j);
        const double dct = dc(r, j) + dhv * out * (1.0 - tc * tc);
        dz(r, kInput * h + j) = dct * cand * in * (1.0 - in);
        dz(r, kForget * h + j) = dct * c_prev(r, j) * fg * (1.0 - fg);
        dz(r, kCandidate * h + j) = dct * in * (1.0 - cand * cand);
        dz(r, kOutput * h + j) = dhv * tc * out * (1.0 - out);
        dc(r, j) = dct * fg;
      }
    }
    numeric::add_matmul_tn(grads.W_x, cache.x[t], dz);
    numeric::add_matmul_tn(grads.W_h, h_prev, dz);
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t j = 0; j < 4 * h; ++j) grads.b[j] += dz(r, j);

    const Matrix dx = numeric::matmul_nt(dz, params.W_x);
    for (std::size_t r = 0; r < B; ++r) {
      if (t >= batch.lengths[r]) continue;
      auto dst = grads.E.row(batch.input(r, t));
      auto src = dx.row(r);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    const Matrix dh_prev = numeric::matmul_nt(dz, params.W_h);
    for (std::size_t r = 0; r < B; ++r) {
      if (t >= batch.lengths[r]) continue;
      for (std::size_t j = 0; j < h; ++j) dh(r, j) = dh_prev(r, j);
    }
  }
  return loss_sum;
}

// Per-row losses of a batch without gradients.
inline std::vector<double> row_losses(const LstmParams& params, const Batch& batch) {
  const ForwardCache cache = forward(params, batch);
  std::vector<double> losses;
  losses.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    double loss = 0.0;
    const Matrix row = Matrix::from(1, cache.logits.cols(),
                                    std::vector<double>(cache.logits.row(r).begin(),
                                                        cache.logits.row(r).end()));
    const std::size_t target = batch.targets[r];
    numeric::xent_rows(row, std::span<const std::size_t>(&target, 1), 1.0, loss);
    losses.push_back(loss);
  }
  return losses;
}

inline double global_norm(const LstmParams& grads) {
  double s = 0.0;
  grads.for_each([&](std::string_view, const Matrix& m) { s += numeric::sum_squares(m); });
  return std::sqrt(s);
}

// Rescales grads so their global norm is at most clip_norm; returns the
// norm before clipping.
inline double clip_global_norm(LstmParams& grads, double clip_norm) {
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    grads.for_each([&](std::string_view, Matrix& m) {
      for (auto& v : m.values()) v *= scale;
    });
  }
  return norm;
}

struct ContextVector {
  std::vector<double> values;
  std::string sentence_id;
  std::size_t target_position = 0;
};

struct HeldoutResult {
  ContextVector context;
  Matrix logits;  // 1 x V
  double loss = 0.0;
};

// Replaces the target with TGT, reads the whole sentence, and predicts the
// held-out word.
inline HeldoutResult forward_heldout(const LstmParams& params, const Sentence& sentence,
                                     std::size_t target_position) {
  if (target_position < sentence.ids.size() && sentence.ids[target_position] == Vocabulary::kUnk) {
    throw Error("UNK cannot be a held-out target");
  }
  const Example ex{&sentence, target_position};
  const Batch batch = make_batch(std::span<const Example>(&ex, 1));
  const ForwardCache cache = forward(params, batch);
  HeldoutResult res;
  res.context.values.assign(cache.context.row(0).begin(), cache.context.row(0).end());
  res.context.target_position = target_position;
  res.logits = cache.logits;
  double loss = 0.0;
  numeric::xent_rows(cache.logits, batch.targets, 1.0, loss);
  res.loss = loss;
  return res;
}

}  // namespace senselab::lstm
