#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senselab/corpus/annotated.hpp"
#include "senselab/io.hpp"
#include "senselab/wsd/classify.hpp"

namespace senselab::eval {

using corpus::Pos;
using wsd::Prediction;

struct Counts {
  std::size_t attempted = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double precision() const { return attempted ? static_cast<double>(correct) / attempted : 0.0; }
  double recall() const { return total ? static_cast<double>(correct) / total : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
};

struct ScoreReport {
  Counts overall;
  std::map<Pos, Counts> per_pos;
  std::map<std::string, std::size_t> per_strategy;
  std::vector<std::string> errors;  // predictions that could not be scored

  double precision() const { return overall.precision(); }
  double recall() const { return overall.recall(); }
  double f1() const { return overall.f1(); }

  std::string human() const {
    auto fixed = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", v);
      return std::string(buf);
    };
    std::string out;
    out += "attempted " + std::to_string(overall.attempted) + "\n";
    out += "correct " + std::to_string(overall.correct) + "\n";
    out += "total " + std::to_string(overall.total) + "\n";
    out += "precision " + fixed(precision()) + "\n";
    out += "recall " + fixed(recall()) + "\n";
    out += "f1 " + fixed(f1()) + "\n";
    for (const auto& [pos, c] : per_pos) {
      out += std::string(corpus::pos_name(pos)) + " p=" + fixed(c.precision()) + " r=" +
             fixed(c.recall()) + " f1=" + fixed(c.f1()) + " (" + std::to_string(c.correct) + "/" +
             std::to_string(c.attempted) + "/" + std::to_string(c.total) + ")\n";
    }
    for (const auto& [name, n] : per_strategy) out += "strategy " + name + " " + std::to_string(n) + "\n";
    if (!errors.empty()) {
      out += "errors " + std::to_string(errors.size()) + "\n";
      for (const auto& e : errors) out += "  " + e + "\n";
    }
    return out;
  }

  // `metric TAB value` lines.
  std::string machine() const {
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) { out += k + '\t' + v + '\n'; };
    auto quad = [&](const std::string& prefix, const Counts& c) {
      line(prefix + "attempted", std::to_string(c.attempted));
      line(prefix + "correct", std::to_string(c.correct));
      line(prefix + "total", std::to_string(c.total));
      line(prefix + "precision", io::format_double(c.precision()));
      line(prefix + "recall", io::format_double(c.recall()));
      line(prefix + "f1", io::format_double(c.f1()));
    };
    quad("", overall);
    for (const auto& [pos, c] : per_pos) quad(std::string(corpus::pos_name(pos)) + ".", c);
    for (const auto& [name, n] : per_strategy) line("strategy." + name, std::to_string(n));
    line("errors", std::to_string(errors.size()));
    return out;
  }
};

namespace detail {

struct Decision {
  std::string_view id;
  const std::string* key;  // null for abstain
  std::string_view strategy;
};

inline ScoreReport score_decisions(std::span<const Decision> decisions, const corpus::KeyMap& gold,
                                   const std::map<std::string, Pos>* pos_of) {
  ScoreReport report;
  report.overall.total = gold.size();
  if (pos_of) {
    for (const auto& [id, keys] : gold) {
      if (auto it = pos_of->find(id); it != pos_of->end()) ++report.per_pos[it->second].total;
    }
  }
  std::set<std::string_view> seen;
  for (const auto& d : decisions) {
    auto g = gold.find(std::string(d.id));
    if (g == gold.end()) {
      report.errors.push_back("prediction for unknown instance '" + std::string(d.id) + "'");
      continue;
    }
    if (!seen.insert(d.id).second) {
      report.errors.push_back("duplicate prediction for '" + std::string(d.id) + "'");
      continue;
    }
    ++report.per_strategy[std::string(d.strategy)];
    if (!d.key) continue;
    const bool ok = std::find(g->second.begin(), g->second.end(), *d.key) != g->second.end();
    ++report.overall.attempted;
    report.overall.correct += ok;
    if (pos_of) {
      if (auto it = pos_of->find(g->first); it != pos_of->end()) {
        auto& c = report.per_pos[it->second];
        ++c.attempted;
        c.correct += ok;
      }
    }
  }
  return report;
}

}  // namespace detail

// A prediction is correct when its key is one of the instance's gold keys.
// Abstentions are unattempted; gold instances without a prediction count
// toward the total only.
inline ScoreReport score(std::span<const Prediction> predictions, const corpus::KeyMap& gold,
                         const std::map<std::string, Pos>* pos_of = nullptr) {
  std::vector<detail::Decision> ds;
  ds.reserve(predictions.size());
  for (const auto& p : predictions) {
    ds.push_back({p.instance_id, p.sense_key ? &*p.sense_key : nullptr, wsd::strategy_name(p.strategy)});
  }
  return detail::score_decisions(ds, gold, pos_of);
}

// Scores a predictions key file. Its strategies are unknown and counted
// under "file"; only the first key of a line is the prediction.
inline ScoreReport score_key_file(std::string_view predictions_text, const corpus::KeyMap& gold,
                                  const std::map<std::string, Pos>* pos_of = nullptr) {
  const auto lines = corpus::parse_key_lines(predictions_text);
  std::vector<detail::Decision> ds;
  ds.reserve(lines.size());
  for (const auto& l : lines) ds.push_back({l.instance_id, &l.keys.front(), "file"});
  return detail::score_decisions(ds, gold, pos_of);
}

inline std::map<std::string, Pos> pos_map(std::span<const corpus::AnnotatedInstance> instances) {
  std::map<std::string, Pos> out;
  for (const auto& i : instances) out.emplace(i.id, i.pos);
  return out;
}

// Most frequent sense of each instance's (lemma, pos), ABSTAIN if unseen.
inline std::vector<Prediction> mfs_baseline(const wsd::SenseEmbeddingTable& table,
                                            std::span<const corpus::AnnotatedInstance> instances) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    Prediction p;
    p.instance_id = inst.id;
    if (const std::string* key = table.mfs({inst.lemma, inst.pos})) {
      p.sense_key = *key;
      p.strategy = wsd::Strategy::mfs;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace senselab::eval
