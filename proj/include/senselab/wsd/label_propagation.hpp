#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "senselab/error.hpp"
#include "senselab/numeric/matrix.hpp"
#include "senselab/wsd/classify.hpp"

namespace senselab::wsd {

using numeric::Matrix;

struct LpProblem {
  std::vector<std::vector<double>> vectors;
  std::vector<std::optional<std::size_t>> labels;  // index into label_names; nullopt = unlabeled
  std::vector<std::string> label_names;
  std::size_t k = 10;
  double sigma = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 1000;
};

struct LpResult {
  std::vector<std::size_t> unlabeled;            // node indices, ascending
  std::vector<std::vector<double>> distributions; // per unlabeled node
  std::vector<Prediction> predictions;           // per unlabeled node; instance_id left empty
  std::vector<bool> isolated;                    // per unlabeled node: no affinities at all
  std::size_t iterations = 0;
  bool converged = false;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Median of all pairwise Euclidean distances (mean of the middle pair for
// an even count); 1.0 when that median is zero.
inline double median_sigma(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw Error("median_sigma needs at least two vectors");
  std::vector<double> d;
  d.reserve(vectors.size() * (vectors.size() - 1) / 2);
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      d.push_back(std::sqrt(squared_distance(vectors[i], vectors[j])));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  return median == 0.0 ? 1.0 : median;
}

// Symmetrized kNN Gaussian affinities with zero diagonal.
inline Matrix knn_affinity(std::span<const std::vector<double>> vectors, std::size_t k, double sigma) {
  const std::size_t n = vectors.size();
  Matrix w(n, n);
  const double inv_s2 = 1.0 / (sigma * sigma);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back(squared_distance(vectors[i], vectors[j]), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t m = 0; m < k; ++m) w(i, dist[m].second) = std::exp(-dist[m].first * inv_s2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max(w(i, j), w(j, i));
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return w;
}

// Labeled rows are reset to their one-hot after every propagation step.
inline void clamp_labeled(Matrix& y, const LpProblem& problem) {
  for (std::size_t i = 0; i < problem.labels.size(); ++i) {
    if (!problem.labels[i]) continue;
    auto row = y.row(i);
    std::fill(row.begin(), row.end(), 0.0);
    row[*problem.labels[i]] = 1.0;
  }
}

// Iterates Y <- T Y with labeled rows clamped until the largest entry
// change drops below tol. `observe`, when set, sees Y after every step.
inline LpResult propagate_labels(const LpProblem& problem,
                                 const std::function<void(std::size_t, const Matrix&)>& observe = {}) {
  const std::size_t n = problem.vectors.size();
  const std::size_t L = problem.label_names.size();
  if (n == 0) throw Error("label propagation: no vectors");
  if (problem.labels.size() != n) throw Error("label propagation: one label slot per vector required");
  if (L == 0) throw Error("label propagation: no label names");
  if (problem.k < 1 || problem.k >= n) {
    throw Error("label propagation: k=" + std::to_string(problem.k) + " must be in [1, n) with n=" +
                std::to_string(n));
  }
  if (!(problem.sigma > 0.0)) throw Error("label propagation: sigma must be > 0");
  const std::size_t dim = problem.vectors[0].size();
  bool any_labeled = false;
  LpResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (problem.vectors[i].size() != dim) throw DimensionError("label propagation: ragged vectors");
    if (problem.labels[i]) {
      if (*problem.labels[i] >= L) throw Error("label propagation: label index out of range");
      any_labeled = true;
    } else {
      result.unlabeled.push_back(i);
    }
  }
  if (!any_labeled) throw Error("label propagation: no labeled vectors");
  if (result.unlabeled.empty()) {
    result.converged = true;
    return result;
  }

  Matrix t = knn_affinity(problem.vectors, problem.k, problem.sigma);
  std::vector<bool> isolated(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = t.row(i);
    double s = 0.0;
    for (double v : row) s += v;
    if (s == 0.0) {
      isolated[i] = true;
      continue;
    }
    for (auto& v : row) v /= s;
  }

  Matrix y(n, L, 1.0 / static_cast<double>(L));
  clamp_labeled(y, problem);
  while (result.iterations < problem.max_iter) {
    Matrix next = numeric::matmul(t, y);
    for (std::size_t i = 0; i < n; ++i) {
      if (!isolated[i]) continue;
      auto src = y.row(i);
      std::copy(src.begin(), src.end(), next.row(i).begin());
    }
    clamp_labeled(next, problem);
    double delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) delta = std::max(delta, std::abs(next[i] - y[i]));
    y = std::move(next);
    ++result.iterations;
    if (observe) observe(result.iterations, y);
    if (delta < problem.tol) {
      result.converged = true;
      break;
    }
  }

  for (std::size_t u : result.unlabeled) {
    std::vector<double> dist(y.row(u).begin(), y.row(u).end());
    double s = 0.0;
    for (double v : dist) s += v;
    for (auto& v : dist) v /= s;
    std::size_t best = 0;
    for (std::size_t c = 1; c < L; ++c) {
      if (dist[c] > dist[best] ||
          (dist[c] == dist[best] && problem.label_names[c] < problem.label_names[best])) {
        best = c;
      }
    }
    Prediction p;
    p.sense_key = problem.label_names[best];
    p.score = dist[best];
    p.strategy = Strategy::lp;
    result.predictions.push_back(std::move(p));
    result.distributions.push_back(std::move(dist));
    result.isolated.push_back(isolated[u]);
  }
  return result;
}

}  // namespace senselab::wsd
