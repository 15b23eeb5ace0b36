#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senselab/corpus/annotated.hpp"
#include "senselab/lstm/inference.hpp"
#include "senselab/wsd/sense_table.hpp"

namespace senselab::wsd {

enum class Strategy { nn, mfs, lp, abstain };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::nn: return "nn";
    case Strategy::mfs: return "mfs";
    case Strategy::lp: return "lp";
    case Strategy::abstain: return "abstain";
  }
  return "abstain";
}

struct Prediction {
  std::string instance_id;
  std::optional<std::string> sense_key;  // nullopt means ABSTAIN
  double score = 0.0;
  Strategy strategy = Strategy::abstain;

  bool abstained() const { return !sense_key.has_value(); }
};

// Zero-norm vectors have cosine 0 with everything.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine: vectors differ in length");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

// Candidate with the highest cosine to `query`; candidates are scanned in
// key order, so equal scores keep the lexicographically first key.
inline Prediction nearest_sense(std::span<const double> query, const SenseEmbeddingTable& table,
                                const LemmaPos& lp) {
  Prediction pred;
  const auto keys = table.candidates(lp);
  for (const auto& key : keys) {
    const double s = cosine(query, table.find(key)->centroid);
    if (!pred.sense_key || s > pred.score) {
      pred.sense_key = key;
      pred.score = s;
    }
  }
  pred.strategy = pred.sense_key ? Strategy::nn : Strategy::abstain;
  return pred;
}

inline Prediction with_fallback(Prediction pred, const SenseEmbeddingTable& table, const LemmaPos& lp) {
  if (!pred.abstained()) return pred;
  if (const std::string* key = table.mfs(lp)) {
    pred.sense_key = *key;
    pred.score = 0.0;
    pred.strategy = Strategy::mfs;
  }
  return pred;
}

inline Prediction classify_nn(const corpus::AnnotatedInstance& inst, const lstm::LstmParams& params,
                              const SenseEmbeddingTable& table, const corpus::Vocabulary& vocab,
                              const lstm::ExtractOptions& opts = {}) {
  const LemmaPos lp{inst.lemma, inst.pos};
  Prediction pred;
  if (!table.candidates(lp).empty()) {
    pred = nearest_sense(lstm::extract_context(params, inst, vocab, opts).values, table, lp);
  }
  pred.instance_id = inst.id;
  return pred;
}

inline Prediction classify_with_fallback(const corpus::AnnotatedInstance& inst,
                                         const lstm::LstmParams& params, const SenseEmbeddingTable& table,
                                         const corpus::Vocabulary& vocab,
                                         const lstm::ExtractOptions& opts = {}) {
  return with_fallback(classify_nn(inst, params, table, vocab, opts), table, {inst.lemma, inst.pos});
}

// Classifies a whole test set; contexts are extracted only for instances
// whose lemma has candidates.
inline std::vector<Prediction> classify_all(std::span<const corpus::AnnotatedInstance> instances,
                                            const lstm::LstmParams& params,
                                            const SenseEmbeddingTable& table,
                                            const corpus::Vocabulary& vocab,
                                            const lstm::ExtractOptions& opts, bool fallback) {
  std::vector<corpus::AnnotatedInstance> known;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!table.candidates({instances[i].lemma, instances[i].pos}).empty()) {
      known.push_back(instances[i]);
      where.push_back(i);
    }
  }
  const auto contexts = lstm::extract_contexts(params, known, vocab, opts);
  std::vector<Prediction> preds(instances.size());
  for (std::size_t k = 0; k < known.size(); ++k) {
    preds[where[k]] = nearest_sense(contexts[k], table, {known[k].lemma, known[k].pos});
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    preds[i].instance_id = instances[i].id;
    if (fallback) preds[i] = with_fallback(std::move(preds[i]), table, {instances[i].lemma, instances[i].pos});
  }
  return preds;
}

// Averages the context vectors of every (instance, gold key) pair.
inline SenseEmbeddingTable build_sense_table(std::span<const corpus::AnnotatedInstance> instances,
                                             const lstm::LstmParams& params,
                                             const corpus::Vocabulary& vocab,
                                             const lstm::ExtractOptions& opts = {}) {
  for (const auto& inst : instances) {
    if (inst.gold_keys.empty()) throw Error("instance '" + inst.id + "' has no gold key");
  }
  const auto contexts = lstm::extract_contexts(params, instances, vocab, opts);
  SenseTableBuilder builder(params.context_dim());
  for (std::size_t i = 0; i < instances.size(); ++i) builder.add(instances[i], contexts[i]);
  return builder.build();
}

// Predictions file: `instance_id SPACE sense_key`, abstentions omitted.
inline std::string format_predictions(std::span<const Prediction> preds) {
  std::string out;
  for (const auto& p : preds) {
    if (p.abstained()) continue;
    out += p.instance_id + ' ' + *p.sense_key + '\n';
  }
  return out;
}

}  // namespace senselab::wsd
