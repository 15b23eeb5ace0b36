#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "senselab/corpus/tokenize.hpp"
#include "senselab/error.hpp"
#include "senselab/io.hpp"

namespace senselab::corpus {

using WordId = std::uint32_t;

// Token ids of one EOS-terminated sentence.
struct Sentence {
  std::vector<WordId> ids;
  bool operator==(const Sentence&) const = default;
};

class Vocabulary {
 public:
  static constexpr WordId kUnk = 0;
  static constexpr WordId kTgt = 1;
  static constexpr WordId kEos = 2;
  static constexpr WordId kPad = 3;
  static constexpr std::size_t kSpecials = 4;
  static constexpr std::array<std::string_view, kSpecials> kSpecialForms{"<unk>", "<tgt>", "</s>",
                                                                         "<pad>"};

  Vocabulary() {
    for (std::size_t i = 0; i < kSpecials; ++i) {
      forms_.emplace_back(kSpecialForms[i]);
      counts_.push_back(0);
    }
  }

  static bool is_special_form(std::string_view form) {
    return std::find(kSpecialForms.begin(), kSpecialForms.end(), form) != kSpecialForms.end();
  }

  std::size_t size() const noexcept { return forms_.size(); }

  // UNK for forms not in the vocabulary.
  WordId id(std::string_view form) const {
    auto it = ids_.find(std::string(form));
    return it == ids_.end() ? kUnk : it->second;
  }
  bool contains(std::string_view form) const { return ids_.count(std::string(form)) != 0; }

  const std::string& form(WordId id) const { return forms_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }

  // Line k holds `form TAB count` of id k; the first four lines are the
  // special tokens in id order.
  std::string serialize() const {
    std::string out;
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      out += forms_[i];
      out += '\t';
      out += std::to_string(counts_[i]);
      out += '\n';
    }
    return out;
  }

  io::Digest digest() const { return io::sha256(serialize()); }

  static Vocabulary parse(std::string_view text) {
    Vocabulary v;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      const std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      const std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw Error("vocabulary line " + std::to_string(line_no + 1) + ": missing TAB");
      }
      const std::string form(line.substr(0, tab));
      const auto count = io::parse_int<std::uint64_t>(line.substr(tab + 1));
      if (line_no < kSpecials) {
        if (form != kSpecialForms[line_no]) {
          throw Error("vocabulary line " + std::to_string(line_no + 1) + ": expected special '" +
                      std::string(kSpecialForms[line_no]) + "'");
        }
        v.counts_[line_no] = count;
      } else {
        if (form.empty() || is_special_form(form) || v.ids_.count(form)) {
          throw Error("vocabulary line " + std::to_string(line_no + 1) + ": bad or duplicate form");
        }
        v.ids_.emplace(form, static_cast<WordId>(v.forms_.size()));
        v.forms_.push_back(form);
        v.counts_.push_back(count);
      }
      ++line_no;
    }
    if (line_no < kSpecials) throw Error("vocabulary file lacks the special-token header");
    return v;
  }

  friend Vocabulary build_vocabulary(const std::vector<SurfaceSentence>&, std::size_t,
                                     std::uint64_t);

 private:
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> forms_;
  std::vector<std::uint64_t> counts_;
};

// Keeps the (max_size - 4) most frequent forms with count >= min_count,
// ties broken by byte-wise lexicographic order. Everything else is counted
// as UNK.
inline Vocabulary build_vocabulary(const std::vector<SurfaceSentence>& sentences,
                                   std::size_t max_size, std::uint64_t min_count) {
  if (max_size <= Vocabulary::kSpecials) {
    throw Error("vocabulary max_size must exceed " + std::to_string(Vocabulary::kSpecials));
  }
  std::map<std::string, std::uint64_t> freq;
  std::uint64_t special_tokens = 0;
  for (const auto& s : sentences) {
    for (const auto& tok : s) {
      if (Vocabulary::is_special_form(tok)) {
        ++special_tokens;
      } else {
        ++freq[tok];
      }
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  v.counts_[Vocabulary::kUnk] = special_tokens;
  v.counts_[Vocabulary::kEos] = sentences.size();
  const std::size_t room = max_size - Vocabulary::kSpecials;
  for (const auto& [form, count] : ranked) {
    if (v.forms_.size() - Vocabulary::kSpecials < room && count >= min_count) {
      v.ids_.emplace(form, static_cast<WordId>(v.forms_.size()));
      v.forms_.push_back(form);
      v.counts_.push_back(count);
    } else {
      v.counts_[Vocabulary::kUnk] += count;
    }
  }
  return v;
}

// Maps forms to ids (unknown forms to UNK) and appends EOS.
inline Sentence encode(const SurfaceSentence& surface, const Vocabulary& vocab) {
  Sentence s;
  s.ids.reserve(surface.size() + 1);
  for (const auto& form : surface) s.ids.push_back(vocab.id(form));
  s.ids.push_back(Vocabulary::kEos);
  return s;
}

// Inverse of encode for in-vocabulary sentences; drops the trailing EOS.
inline SurfaceSentence decode(const Sentence& sentence, const Vocabulary& vocab) {
  SurfaceSentence out;
  for (WordId id : sentence.ids) {
    if (id == Vocabulary::kEos) break;
    out.push_back(vocab.form(id));
  }
  return out;
}

}  // namespace senselab::corpus
