#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "senselab/eval/score.hpp"
#include "senselab/lstm/network.hpp"
#include "senselab/numeric/grad_check.hpp"
#include "senselab/numeric/ops.hpp"
#include "senselab/random.hpp"
#include "senselab/wsd/classify.hpp"
#include "senselab/wsd/label_propagation.hpp"

// Built-in verification run by `senselab selfcheck`: analytic gradients
// against central differences, plus small oracle fixtures for the
// classifier, label propagation and the scorer.
namespace senselab::cli {

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Gradient check of the held-out loss w.r.t. parameter matrix `which`.
inline numeric::GradCheckReport check_lstm_matrix(const lstm::LstmParams& params,
                                                  const corpus::Sentence& sentence,
                                                  std::size_t target, std::size_t which,
                                                  double tolerance = 1e-4) {
  auto with = [&](const numeric::Matrix& m) {
    lstm::LstmParams p = params;
    p.at(which) = m;
    return p;
  };
  auto op = numeric::make_op(
      [&](const numeric::Matrix& m) { return lstm::forward_heldout(with(m), sentence, target).loss; },
      [&](const numeric::Matrix& m) {
        const lstm::LstmParams p = with(m);
        lstm::LstmParams g = lstm::LstmParams::zeros(p.vocab_size(), p.context_dim(), p.hidden_dim());
        const lstm::Example ex{&sentence, target};
        lstm::accumulate_gradients(p, lstm::make_batch(std::span<const lstm::Example>(&ex, 1)), g, 1.0);
        return g.at(which);
      });
  return numeric::grad_check(std::string(lstm::LstmParams::kNames[which]), op, params.at(which), 1e-5,
                             tolerance);
}

// Random small model and a 5-token sentence (4 words + EOS).
inline std::pair<lstm::LstmParams, corpus::Sentence> random_lstm_point(std::uint64_t seed) {
  lstm::ModelConfig cfg;
  cfg.vocab_size = 12;
  cfg.context_dim = 4;
  cfg.hidden_dim = 6;
  lstm::LstmParams params = lstm::init_params(cfg, seed);
  // Larger weights than the init range so the nonlinearities are exercised.
  Rng rng(seed * 7919 + 13);
  params.for_each([&](std::string_view, numeric::Matrix& m) {
    for (auto& v : m.values()) v = rng.uniform(-0.8, 0.8);
  });
  corpus::Sentence s;
  for (int i = 0; i < 4; ++i) s.ids.push_back(static_cast<corpus::WordId>(4 + rng.index(8)));
  s.ids.push_back(corpus::Vocabulary::kEos);
  return {params, s};
}

inline std::vector<CheckLine> run_selfcheck(std::uint64_t seed = 1) {
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, bool ok, std::string detail) {
    lines.push_back({std::move(name), ok, std::move(detail)});
  };

  for (std::uint64_t s = seed; s < seed + 3; ++s) {
    auto [params, sentence] = random_lstm_point(s);
    for (std::size_t m = 0; m < 7; ++m) {
      const auto r = check_lstm_matrix(params, sentence, 2, m);
      add("grad forward_heldout/" + r.op + " seed=" + std::to_string(s), r.passed(),
          "max_rel=" + sci(r.max_rel_error));
    }
  }

  {
    Rng rng(seed);
    numeric::Matrix logits(3, 5);
    for (auto& v : logits.values()) v = rng.uniform(-2.0, 2.0);
    const std::vector<std::size_t> targets{1, 4, 0};
    auto op = numeric::make_op(
        [&](const numeric::Matrix& x) { return numeric::softmax_xent(x, targets).loss; },
        [&](const numeric::Matrix& x) { return numeric::softmax_xent(x, targets).dlogits; });
    const auto r = numeric::grad_check("softmax_xent", op, logits, 1e-5, 1e-6);
    add("grad softmax_xent", r.passed(), "max_rel=" + sci(r.max_rel_error));

    numeric::Matrix coef(2, 3);
    for (auto& v : coef.values()) v = rng.uniform(-3.0, 3.0);
    auto linear = numeric::make_op(
        [&](const numeric::Matrix& x) { return numeric::dot(coef.values(), x.values()); },
        [&](const numeric::Matrix&) { return coef; });
    const auto rl = numeric::grad_check("linear", linear, numeric::Matrix(2, 3, 0.5), 1e-5, 1e-9);
    add("grad linear", rl.passed(), "max_rel=" + sci(rl.max_rel_error));
  }

  {
    // Classifier against an exhaustive scan.
    Rng rng(seed + 101);
    std::size_t agree = 0;
    constexpr std::size_t kCases = 200;
    for (std::size_t c = 0; c < kCases; ++c) {
      const std::size_t p = 1 + rng.index(6), n = 1 + rng.index(5);
      wsd::SenseEmbeddingTable table(p);
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> v(p);
        for (auto& x : v) x = static_cast<double>(rng.index(5)) - 2.0;
        table.insert("s" + std::to_string(rng.index(1000)) + "_" + std::to_string(k), {"w", corpus::Pos::noun, v, 1});
      }
      std::vector<double> q(p);
      for (auto& x : q) x = static_cast<double>(rng.index(5)) - 2.0;
      const auto pred = wsd::nearest_sense(q, table, {"w", corpus::Pos::noun});
      std::string best;
      double best_score = -2.0;
      for (const auto& [key, e] : table.by_key()) {
        double qq = 0, cc = 0, qc = 0;
        for (std::size_t i = 0; i < p; ++i) {
          qq += q[i] * q[i];
          cc += e.centroid[i] * e.centroid[i];
          qc += q[i] * e.centroid[i];
        }
        const double cs = (qq == 0 || cc == 0) ? 0.0 : qc / (std::sqrt(qq) * std::sqrt(cc));
        if (cs > best_score) {
          best_score = cs;
          best = key;
        }
      }
      agree += pred.sense_key == best;
    }
    add("oracle classify_nn vs brute force", agree == kCases,
        std::to_string(agree) + "/" + std::to_string(kCases) + " agree");
  }

  {
    wsd::LpProblem chain;
    chain.vectors = {{0.0}, {10.0}, {1.0}};
    chain.labels = {0, 1, std::nullopt};
    chain.label_names = {"A", "B"};
    chain.k = 2;
    chain.sigma = 1.0;
    const auto r = wsd::propagate_labels(chain);
    const double expected = 1.0 / (1.0 + std::exp(-80.0));
    const bool ok = r.predictions.size() == 1 && r.predictions[0].sense_key == "A" &&
                    std::abs(r.distributions[0][0] - expected) < 1e-6;
    add("oracle label propagation chain", ok, "mass(A)=" + sci(r.distributions.empty() ? 0 : r.distributions[0][0]));
  }

  {
    const corpus::KeyMap gold{{"a", {"x"}}, {"b", {"y"}}, {"c", {"z"}}};
    std::vector<wsd::Prediction> preds(3);
    preds[0] = {"a", "x", 1.0, wsd::Strategy::nn};
    preds[1] = {"b", "y", 1.0, wsd::Strategy::nn};
    preds[2] = {"c", "q", 1.0, wsd::Strategy::nn};
    const auto r = eval::score(preds, gold);
    add("oracle scorer 2-of-3", std::abs(r.f1() - 2.0 / 3.0) < 1e-9, "f1=" + sci(r.f1()));
  }
  return lines;
}

}  // namespace senselab::cli
