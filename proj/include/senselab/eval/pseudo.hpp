#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "senselab/corpus/annotated.hpp"
#include "senselab/error.hpp"
#include "senselab/random.hpp"

// Synthetic pseudoword benchmark. Each pseudo-sense has a real word and
// sentence templates; annotated splits replace the word with the shared
// pseudoword surface, the LM corpus keeps the original word.
//
// Template syntax: whitespace-separated tokens, `{a|b c|d}` picks one
// alternative (which may span several tokens), and a lone `_` marks the
// slot of the sense word.
namespace senselab::eval {

struct PseudoSense {
  std::string key;
  std::string word;
  std::vector<std::string> templates;
};

struct PseudoCorpusSpec {
  std::vector<PseudoSense> senses;
  std::string pseudoword;
  std::size_t n_train_lm = 2000;
  std::size_t n_train_annotated = 20;  // per sense
  std::size_t n_test = 100;            // in total, spread evenly over senses
  std::uint64_t seed = 1;

  void validate() const {
    if (senses.size() < 2) throw Error("pseudo corpus: at least two pseudo-senses required");
    if (n_train_lm < 1 || n_train_annotated < 1 || n_test < 1) {
      throw Error("pseudo corpus: all counts must be >= 1");
    }
    if (pseudoword.empty()) throw Error("pseudo corpus: empty pseudoword");
    std::set<std::string> keys;
    for (const auto& s : senses) {
      if (s.templates.empty()) throw Error("pseudo-sense '" + s.key + "' has no templates");
      if (!keys.insert(s.key).second) throw Error("duplicate pseudo-sense key '" + s.key + "'");
    }
  }
};

struct PseudoCorpus {
  std::vector<corpus::SurfaceSentence> lm;
  std::vector<corpus::AnnotatedInstance> train;
  std::vector<corpus::AnnotatedInstance> test;
};

namespace detail {

// A parsed template: a sequence of slots, each a list of alternatives
// (token sequences). The target slot has the single alternative {"_"}.
class Template {
 public:
  explicit Template(std::string_view text) {
    std::size_t i = 0;
    std::size_t targets = 0;
    while (i < text.size()) {
      if (text[i] == ' ' || text[i] == '\t') {
        ++i;
      } else if (text[i] == '{') {
        const std::size_t close = text.find('}', i);
        if (close == std::string_view::npos) throw Error("template: unclosed '{' in \"" + std::string(text) + "\"");
        std::vector<std::vector<std::string>> alts;
        std::string_view body = text.substr(i + 1, close - i - 1);
        std::size_t s = 0;
        for (;;) {
          const std::size_t bar = body.find('|', s);
          alts.push_back(words(body.substr(s, bar == std::string_view::npos ? std::string_view::npos : bar - s)));
          if (bar == std::string_view::npos) break;
          s = bar + 1;
        }
        slots_.push_back(std::move(alts));
        i = close + 1;
      } else {
        std::size_t end = i;
        while (end < text.size() && text[end] != ' ' && text[end] != '\t' && text[end] != '{') ++end;
        const std::string word(text.substr(i, end - i));
        targets += word == "_";
        slots_.push_back({{word}});
        i = end;
      }
    }
    if (targets != 1) throw Error("template needs exactly one '_' slot: \"" + std::string(text) + "\"");
    combinations_ = 1;
    for (const auto& s : slots_) {
      if (combinations_ > (std::uint64_t{1} << 40) / s.size()) throw Error("template has too many combinations");
      combinations_ *= s.size();
    }
  }

  std::uint64_t combinations() const { return combinations_; }

  // Mixed-radix decoding of a combination index. Returns the tokens and
  // the index of the target token.
  std::pair<corpus::SurfaceSentence, std::size_t> expand(std::uint64_t index, std::string_view word) const {
    corpus::SurfaceSentence out;
    std::size_t target = 0;
    for (const auto& slot : slots_) {
      const auto& alt = slot[index % slot.size()];
      index /= slot.size();
      for (const auto& tok : alt) {
        if (tok == "_") {
          target = out.size();
          out.emplace_back(word);
        } else {
          out.push_back(tok);
        }
      }
    }
    return {out, target};
  }

 private:
  static std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && s[i] == ' ') ++i;
      const std::size_t start = i;
      while (i < s.size() && s[i] != ' ') ++i;
      if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
  }

  std::vector<std::vector<std::vector<std::string>>> slots_;
  std::uint64_t combinations_ = 0;
};

// All sentences of one sense, indexed by a single combination number.
class SenseSpace {
 public:
  explicit SenseSpace(const PseudoSense& sense) : word_(sense.word) {
    for (const auto& t : sense.templates) {
      templates_.emplace_back(t);
      offsets_.push_back(total_);
      total_ += templates_.back().combinations();
    }
  }

  std::uint64_t size() const { return total_; }

  std::pair<corpus::SurfaceSentence, std::size_t> sentence(std::uint64_t index, std::string_view word) const {
    std::size_t t = templates_.size() - 1;
    while (offsets_[t] > index) --t;
    return templates_[t].expand(index - offsets_[t], word);
  }
  std::pair<corpus::SurfaceSentence, std::size_t> original(std::uint64_t index) const {
    return sentence(index, word_);
  }

 private:
  std::string word_;
  std::vector<Template> templates_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t total_ = 0;
};

// Floyd's algorithm: k distinct values from [0, n), returned in draw order
// of a seeded shuffle.
inline std::vector<std::uint64_t> sample_distinct(Rng& rng, std::uint64_t n, std::size_t k) {
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    const std::uint64_t t = rng.index(static_cast<std::size_t>(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  rng.shuffle(out);
  return out;
}

inline std::string join(const corpus::SurfaceSentence& s) {
  std::string out;
  for (const auto& t : s) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace detail

inline PseudoCorpus make_pseudo_corpus(const PseudoCorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t S = spec.senses.size();

  std::vector<detail::SenseSpace> spaces;
  for (const auto& s : spec.senses) spaces.emplace_back(s);

  // Per sense: the first n_train_annotated draws train, the rest test.
  std::vector<std::size_t> test_per_sense(S);
  for (std::size_t s = 0; s < S; ++s) test_per_sense[s] = spec.n_test / S + (s < spec.n_test % S ? 1 : 0);
  std::vector<std::vector<std::uint64_t>> draws(S);
  std::vector<std::set<std::uint64_t>> test_combos(S);
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t need = spec.n_train_annotated + test_per_sense[s];
    if (spaces[s].size() < need) {
      throw Error("pseudo-sense '" + spec.senses[s].key + "': templates yield " +
                  std::to_string(spaces[s].size()) + " distinct sentences, " + std::to_string(need) +
                  " needed for disjoint splits");
    }
    draws[s] = detail::sample_distinct(rng, spaces[s].size(), need);
    test_combos[s].insert(draws[s].begin() + static_cast<std::ptrdiff_t>(spec.n_train_annotated), draws[s].end());
  }

  auto make_instance = [&](std::string_view split, std::size_t serial, std::size_t s, std::uint64_t combo) {
    auto [sentence, target] = spaces[s].sentence(combo, spec.pseudoword);
    corpus::AnnotatedInstance inst;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*s.s%05zu", static_cast<int>(split.size()), split.data(), serial);
    inst.sentence_id = buf;
    inst.id = inst.sentence_id + ".t" + std::to_string(target);
    inst.lemma = spec.pseudoword;
    inst.pos = corpus::Pos::noun;
    inst.sentence = std::move(sentence);
    inst.target_position = target;
    inst.gold_keys = {spec.senses[s].key};
    return inst;
  };

  PseudoCorpus out;
  // Train: sense-major, then shuffled.
  std::vector<std::pair<std::size_t, std::uint64_t>> train_items, test_items;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < draws[s].size(); ++i) {
      (i < spec.n_train_annotated ? train_items : test_items).emplace_back(s, draws[s][i]);
    }
  }
  rng.shuffle(train_items);
  rng.shuffle(test_items);
  std::set<std::string> train_surfaces;
  for (std::size_t i = 0; i < train_items.size(); ++i) {
    out.train.push_back(make_instance("train", i, train_items[i].first, train_items[i].second));
    train_surfaces.insert(detail::join(out.train.back().sentence));
  }
  for (std::size_t i = 0; i < test_items.size(); ++i) {
    out.test.push_back(make_instance("test", i, test_items[i].first, test_items[i].second));
    if (train_surfaces.count(detail::join(out.test.back().sentence))) {
      throw Error("pseudo corpus: templates of different senses produce identical merged sentences");
    }
  }

  // LM sentences keep the original word and avoid every test sentence.
  out.lm.reserve(spec.n_train_lm);
  while (out.lm.size() < spec.n_train_lm) {
    const std::size_t s = rng.index(S);
    const std::uint64_t combo = rng.index(static_cast<std::size_t>(spaces[s].size()));
    if (test_combos[s].count(combo)) continue;
    out.lm.push_back(spaces[s].original(combo).first);
  }
  return out;
}

// Two pseudo-senses, "banana" and "door", merged into "bananadoor".
inline PseudoCorpusSpec default_pseudo_spec() {
  PseudoCorpusSpec spec;
  spec.pseudoword = "bananadoor";
  spec.senses.push_back(
      {"bananadoor%banana",
       "banana",
       {"{she|he|the child|my neighbor|the cook} {ate|peeled|sliced|bought|mashed} {a|the|one} "
        "{ripe|yellow|sweet|soft|green} _ {for breakfast|after lunch|with honey|at the market|before school}",
        "{this|that|the|every} _ {tasted|smelled|looked} {sweet|ripe|fresh|delicious|rotten} "
        "{today|yesterday|again|this morning}",
        "{we|they|you|i} {blended|baked|froze|packed} {a|the} _ {into a smoothie|into bread|for the trip|with milk}"}});
  spec.senses.push_back(
      {"bananadoor%door",
       "door",
       {"{she|he|the child|my neighbor|the guard} {opened|closed|locked|painted|slammed} {a|the|one} "
        "{wooden|heavy|red|front|old} _ {for breakfast|after lunch|with a key|at the station|before school}",
        "{this|that|the|every} _ {creaked|squeaked|rattled} {loudly|softly|again|all night} "
        "{today|yesterday|again|this morning}",
        "{we|they|you|i} {knocked on|walked through|repaired|installed} {a|the} _ "
        "{of the house|in the hall|for the shop|with tools}"}});
  return spec;
}

// Templates file: `sense_key TAB word TAB template` per line; lines for the
// same key accumulate templates. Blank lines and `#` comments are skipped.
inline std::vector<PseudoSense> parse_templates(std::string_view text) {
  std::vector<PseudoSense> senses;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw Error("templates line " + std::to_string(line_no) + ": expected key TAB word TAB template");
    }
    const std::string key(line.substr(0, t1));
    const std::string word(line.substr(t1 + 1, t2 - t1 - 1));
    auto it = std::find_if(senses.begin(), senses.end(), [&](const PseudoSense& s) { return s.key == key; });
    if (it == senses.end()) {
      senses.push_back({key, word, {}});
      it = senses.end() - 1;
    } else if (it->word != word) {
      throw Error("templates line " + std::to_string(line_no) + ": conflicting word for '" + key + "'");
    }
    it->templates.emplace_back(line.substr(t2 + 1));
  }
  return senses;
}

}  // namespace senselab::eval
