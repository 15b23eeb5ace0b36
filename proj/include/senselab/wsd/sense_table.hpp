#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senselab/corpus/annotated.hpp"
#include "senselab/error.hpp"
#include "senselab/io.hpp"

namespace senselab::wsd {

using corpus::Pos;

struct LemmaPos {
  std::string lemma;
  Pos pos = Pos::other;
  auto operator<=>(const LemmaPos&) const = default;
};

struct SenseEntry {
  std::string lemma;
  Pos pos = Pos::other;
  std::vector<double> centroid;  // mean of raw context vectors
  std::size_t support = 0;
};

// Sense key -> averaged context vector, with per-(lemma, pos) candidate
// lists and most-frequent senses derived from supports.
class SenseEmbeddingTable {
 public:
  explicit SenseEmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return by_key_.size(); }
  bool empty() const noexcept { return by_key_.empty(); }

  const std::map<std::string, SenseEntry>& by_key() const noexcept { return by_key_; }
  const SenseEntry* find(std::string_view key) const {
    auto it = by_key_.find(std::string(key));
    return it == by_key_.end() ? nullptr : &it->second;
  }

  // Candidate keys in lexicographic order; empty when the lemma is unseen.
  std::span<const std::string> candidates(const LemmaPos& lp) const {
    auto it = by_lemma_.find(lp);
    if (it == by_lemma_.end()) return {};
    return it->second;
  }

  const std::map<LemmaPos, std::vector<std::string>>& by_lemma() const noexcept { return by_lemma_; }

  const std::string* mfs(const LemmaPos& lp) const {
    auto it = mfs_of_.find(lp);
    return it == mfs_of_.end() ? nullptr : &it->second;
  }

  void insert(std::string key, SenseEntry entry) {
    if (entry.centroid.size() != dim_) {
      throw DimensionError("sense '" + key + "' has dimension " + std::to_string(entry.centroid.size()) +
                           ", table has " + std::to_string(dim_));
    }
    if (entry.support < 1) throw Error("sense '" + key + "' has zero support");
    if (by_key_.count(key)) throw Error("duplicate sense key '" + key + "'");
    const LemmaPos lp{entry.lemma, entry.pos};
    auto& keys = by_lemma_[lp];
    keys.insert(std::upper_bound(keys.begin(), keys.end(), key), key);
    // Ties go to the lexicographically smaller key.
    auto m = mfs_of_.find(lp);
    if (m == mfs_of_.end()) {
      mfs_of_.emplace(lp, key);
    } else {
      const std::size_t best = by_key_.at(m->second).support;
      if (entry.support > best || (entry.support == best && key < m->second)) m->second = key;
    }
    by_key_.emplace(std::move(key), std::move(entry));
  }

  // Adds most-frequent senses for (lemma, pos) pairs the table has no
  // vectors for, e.g. frequencies from another annotated corpus.
  void merge_mfs(const std::map<LemmaPos, std::string>& extra) {
    for (const auto& [lp, key] : extra) {
      if (!by_lemma_.count(lp)) mfs_of_.emplace(lp, key);
    }
  }

  // Header `p=<dim>`, then `key TAB lemma TAB pos TAB support TAB v1,...,vp`
  // per key in key order, floats in shortest round-trip form.
  std::string serialize() const {
    std::string out = "p=" + std::to_string(dim_) + "\n";
    for (const auto& [key, e] : by_key_) {
      out += key + '\t' + e.lemma + '\t' + std::string(corpus::pos_name(e.pos)) + '\t' +
             std::to_string(e.support) + '\t';
      for (std::size_t i = 0; i < e.centroid.size(); ++i) {
        if (i) out += ',';
        out += io::format_double(e.centroid[i]);
      }
      out += '\n';
    }
    return out;
  }

  static SenseEmbeddingTable parse(std::string_view text) {
    auto next_line = [&](std::size_t& pos) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      return line;
    };
    std::size_t pos = 0;
    const std::string_view header = next_line(pos);
    if (!header.starts_with("p=")) throw Error("sense table: missing 'p=<dim>' header");
    SenseEmbeddingTable table(io::parse_int<std::size_t>(header.substr(2)));
    std::size_t line_no = 1;
    while (pos < text.size()) {
      const std::string_view line = next_line(pos);
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string_view> fields;
      std::size_t start = 0;
      for (;;) {
        const std::size_t tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
      }
      if (fields.size() != 5) {
        throw Error("sense table line " + std::to_string(line_no) + ": expected 5 TAB-separated fields");
      }
      SenseEntry e;
      e.lemma = std::string(fields[1]);
      e.pos = corpus::pos_from_tag(fields[2]);
      e.support = io::parse_int<std::size_t>(fields[3]);
      std::size_t s = 0;
      const std::string_view values = fields[4];
      while (s <= values.size() && table.dim_ > 0) {
        const std::size_t comma = values.find(',', s);
        const std::size_t end = comma == std::string_view::npos ? values.size() : comma;
        e.centroid.push_back(io::parse_double(values.substr(s, end - s)));
        if (comma == std::string_view::npos) break;
        s = comma + 1;
      }
      try {
        table.insert(std::string(fields[0]), std::move(e));
      } catch (const Error& err) {
        throw Error("sense table line " + std::to_string(line_no) + ": " + err.what());
      }
    }
    return table;
  }

 private:
  std::size_t dim_;
  std::map<std::string, SenseEntry> by_key_;
  std::map<LemmaPos, std::vector<std::string>> by_lemma_;
  std::map<LemmaPos, std::string> mfs_of_;
};

// Accumulates context vectors per sense key. A key keeps the lemma and POS
// of its first occurrence.
class SenseTableBuilder {
 public:
  explicit SenseTableBuilder(std::size_t dim) : dim_(dim) {}

  void add(const corpus::AnnotatedInstance& inst, std::span<const double> context) {
    if (context.size() != dim_) throw DimensionError("context vector has the wrong dimension");
    if (inst.gold_keys.empty()) throw Error("instance '" + inst.id + "' has no gold key");
    for (const auto& key : inst.gold_keys) {
      auto [it, fresh] = sums_.try_emplace(key);
      Sum& s = it->second;
      if (fresh) {
        s.lemma = inst.lemma;
        s.pos = inst.pos;
        s.total.assign(dim_, 0.0);
      }
      for (std::size_t i = 0; i < dim_; ++i) s.total[i] += context[i];
      ++s.count;
    }
  }

  SenseEmbeddingTable build() const {
    SenseEmbeddingTable table(dim_);
    for (const auto& [key, s] : sums_) {
      SenseEntry e{s.lemma, s.pos, s.total, s.count};
      for (auto& v : e.centroid) v /= static_cast<double>(s.count);
      table.insert(key, std::move(e));
    }
    return table;
  }

 private:
  struct Sum {
    std::string lemma;
    Pos pos = Pos::other;
    std::vector<double> total;
    std::size_t count = 0;
  };
  std::size_t dim_;
  std::map<std::string, Sum> sums_;
};

// Most frequent sense per (lemma, pos) from gold annotations alone.
inline std::map<LemmaPos, std::string> mfs_from_instances(std::span<const corpus::AnnotatedInstance> instances) {
  std::map<LemmaPos, std::map<std::string, std::size_t>> counts;
  for (const auto& inst : instances) {
    for (const auto& k : inst.gold_keys) ++counts[{inst.lemma, inst.pos}][k];
  }
  std::map<LemmaPos, std::string> out;
  for (const auto& [lp, keys] : counts) {
    const std::string* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [k, c] : keys) {
      if (c > best_count) {
        best = &k;
        best_count = c;
      }
    }
    out.emplace(lp, *best);
  }
  return out;
}

}  // namespace senselab::wsd
