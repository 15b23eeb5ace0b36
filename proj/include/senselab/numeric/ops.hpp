#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "senselab/numeric/matrix.hpp"

namespace senselab::numeric {

inline double sigmoid(double x) {
  // Branches keep exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Matrix sigmoid(const Matrix& m) {
  Matrix out = m;
  for (auto& v : out.values()) v = sigmoid(v);
  return out;
}

inline Matrix tanh(const Matrix& m) {
  Matrix out = m;
  for (auto& v : out.values()) v = std::tanh(v);
  return out;
}

// Row-wise softmax, stabilized by subtracting each row's maximum.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto o = out.row(i);
    double mx = in.empty() ? 0.0 : in[0];
    for (double v : in) mx = std::max(mx, v);
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (auto& v : o) v /= total;
  }
  return out;
}

struct XentResult {
  double loss = 0.0;  // mean over rows
  Matrix dlogits;     // gradient of the mean loss
};

// Softmax cross-entropy. Per-row losses are summed into `loss_sum`;
// dlogits = (softmax - onehot) * grad_scale.
inline Matrix xent_rows(const Matrix& logits, std::span<const std::size_t> targets,
                        double grad_scale, double& loss_sum) {
  if (targets.size() != logits.rows()) {
    throw DimensionError("softmax_xent: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(logits.rows()) + " rows");
  }
  Matrix grad(logits.rows(), logits.cols());
  loss_sum = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const std::size_t t = targets[i];
    if (t >= logits.cols()) {
      throw DimensionError("softmax_xent: target " + std::to_string(t) + " out of range " +
                           std::to_string(logits.cols()));
    }
    auto in = logits.row(i);
    auto g = grad.row(i);
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      g[j] = std::exp(in[j] - mx);
      total += g[j];
    }
    loss_sum += std::log(total) - (in[t] - mx);
    for (auto& v : g) v = v / total * grad_scale;
    g[t] -= grad_scale;
  }
  return grad;
}

inline XentResult softmax_xent(const Matrix& logits, std::span<const std::size_t> targets) {
  if (logits.rows() == 0 || logits.cols() == 0) throw DimensionError("softmax_xent: empty logits");
  const double inv = 1.0 / static_cast<double>(logits.rows());
  double loss_sum = 0.0;
  XentResult r;
  r.dlogits = xent_rows(logits, targets, inv, loss_sum);
  r.loss = loss_sum * inv;
  return r;
}

}  // namespace senselab::numeric
