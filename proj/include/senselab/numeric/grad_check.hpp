#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "senselab/numeric/matrix.hpp"

namespace senselab::numeric {

struct GradCheckReport {
  std::string op;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Flat index of the worst coordinate when it exceeded the tolerance.
  std::optional<std::size_t> failing_coordinate;

  bool passed() const { return !failing_coordinate; }
};

// A scalar function of one matrix argument together with its analytic gradient.
template <typename Op>
concept DifferentiableOp = requires(const Op& op, const Matrix& x) {
  { op.value(x) } -> std::convertible_to<double>;
  { op.gradient(x) } -> std::same_as<Matrix>;
};

template <typename ValueFn, typename GradFn>
struct LambdaOp {
  ValueFn value_fn;
  GradFn grad_fn;
  double value(const Matrix& x) const { return value_fn(x); }
  Matrix gradient(const Matrix& x) const { return grad_fn(x); }
};

template <typename ValueFn, typename GradFn>
auto make_op(ValueFn v, GradFn g) {
  return LambdaOp<ValueFn, GradFn>{std::move(v), std::move(g)};
}

// |a - n| / max(1, |a|, |n|)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

// Compares the analytic gradient with central differences of step epsilon
// at every coordinate of `point`.
template <DifferentiableOp Op>
GradCheckReport grad_check(std::string name, const Op& op, const Matrix& point,
                           double epsilon = 1e-5, double tolerance = 1e-4) {
  GradCheckReport report;
  report.op = std::move(name);
  const Matrix analytic = op.gradient(point);
  require_same_shape(analytic, point, "grad_check");
  Matrix probe = point;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + epsilon;
    const double up = op.value(probe);
    probe[i] = saved - epsilon;
    const double down = op.value(probe);
    probe[i] = saved;
    const double err = relative_error(analytic[i], (up - down) / (2.0 * epsilon));
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      worst = i;
    }
    ++report.checked;
  }
  if (report.max_rel_error > tolerance) report.failing_coordinate = worst;
  return report;
}

}  // namespace senselab::numeric
