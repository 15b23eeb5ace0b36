#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senselab/corpus/tokenize.hpp"
#include "senselab/corpus/vocabulary.hpp"
#include "senselab/corpus/xml.hpp"
#include "senselab/error.hpp"

namespace senselab::corpus {

// Coarse part of speech shared by annotated corpora and key files.
enum class Pos { noun, verb, adj, adv, other };

inline std::string_view pos_name(Pos p) {
  switch (p) {
    case Pos::noun: return "NOUN";
    case Pos::verb: return "VERB";
    case Pos::adj: return "ADJ";
    case Pos::adv: return "ADV";
    case Pos::other: return "OTHER";
  }
  return "OTHER";
}

// Accepts universal tags (NOUN, VERB, ADJ, ADV), Penn tags (NN*, VB*, JJ*,
// RB*) and WordNet letters (n, v, a, s, r).
inline Pos pos_from_tag(std::string_view tag) {
  std::string t(tag);
  for (auto& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "NOUN" || t == "N" || t.starts_with("NN") || t == "PROPN") return Pos::noun;
  if (t == "VERB" || t == "V" || t.starts_with("VB")) return Pos::verb;
  if (t == "ADJ" || t == "A" || t == "S" || t == "J" || t.starts_with("JJ")) return Pos::adj;
  if (t == "ADV" || t == "R" || t.starts_with("RB")) return Pos::adv;
  return Pos::other;
}

struct AnnotatedInstance {
  std::string id;
  std::string sentence_id;
  std::string lemma;
  Pos pos = Pos::other;
  SurfaceSentence sentence;  // surface forms as they appear in the corpus
  std::size_t target_position = 0;
  std::vector<std::string> gold_keys;  // distinct, file order; empty for unlabeled data

  bool operator==(const AnnotatedInstance&) const = default;
};

// instance id -> sense keys
using KeyMap = std::map<std::string, std::vector<std::string>>;

struct KeyLine {
  std::string instance_id;
  std::vector<std::string> keys;
  std::size_t line = 0;
};

// `instance_id SPACE sense_key [SPACE sense_key]*` per line. Blank lines are
// skipped; a line without any key is an error.
inline std::vector<KeyLine> parse_key_lines(std::string_view text) {
  std::vector<KeyLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) fields.emplace_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;
    if (fields.size() < 2) {
      throw ParseError(ParseError::Kind::syntax, line_no,
                       "key line for '" + fields[0] + "' has no sense key");
    }
    KeyLine kl;
    kl.instance_id = fields[0];
    kl.keys.assign(fields.begin() + 1, fields.end());
    kl.line = line_no;
    out.push_back(std::move(kl));
  }
  return out;
}

inline void add_distinct(std::vector<std::string>& keys, const std::string& key) {
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
}

inline KeyMap parse_key_file(std::string_view text) {
  KeyMap map;
  for (auto& kl : parse_key_lines(text)) {
    auto& keys = map[kl.instance_id];
    for (const auto& k : kl.keys) add_distinct(keys, k);
  }
  return map;
}

inline std::string format_key_file(const KeyMap& keys) {
  std::string out;
  for (const auto& [id, ks] : keys) {
    out += id;
    for (const auto& k : ks) {
      out += ' ';
      out += k;
    }
    out += '\n';
  }
  return out;
}

struct AnnotatedCorpus {
  std::vector<AnnotatedInstance> instances;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view required(const xml::Element& el, std::string_view attr) {
  auto v = el.attribute(attr);
  if (!v) {
    throw ParseError(ParseError::Kind::missing_attribute, el.line,
                     "<" + el.name + "> lacks the '" + std::string(attr) + "' attribute");
  }
  return *v;
}

inline void expect_name(const xml::Element& el, std::string_view name) {
  if (el.name != name) {
    throw ParseError(ParseError::Kind::schema, el.line,
                     "expected <" + std::string(name) + ">, found <" + el.name + ">");
  }
}

}  // namespace detail

// Reads the unified evaluation XML shape
//   <corpus> <text> <sentence> (<wf> | <instance>)* ...
// and attaches gold keys from `key_text` (which may be empty).
inline AnnotatedCorpus parse_annotated_corpus(std::string_view xml_text, std::string_view key_text) {
  const xml::Element root = xml::parse(xml_text);
  detail::expect_name(root, "corpus");

  AnnotatedCorpus corpus;
  std::map<std::string, std::size_t> index;
  for (const auto& text : root.children) {
    detail::expect_name(text, "text");
    for (const auto& sent : text.children) {
      detail::expect_name(sent, "sentence");
      const std::string sentence_id(sent.attribute("id").value_or(""));
      SurfaceSentence surface;
      std::vector<const xml::Element*> targets;
      for (const auto& tok : sent.children) {
        if (tok.name == "instance") {
          targets.push_back(&tok);
        } else if (tok.name != "wf") {
          throw ParseError(ParseError::Kind::schema, tok.line,
                           "unexpected <" + tok.name + "> inside <sentence>");
        }
        surface.push_back(tok.text);
      }
      for (const xml::Element* tok : targets) {
        AnnotatedInstance inst;
        inst.id = std::string(detail::required(*tok, "id"));
        inst.lemma = std::string(detail::required(*tok, "lemma"));
        inst.pos = pos_from_tag(detail::required(*tok, "pos"));
        inst.sentence_id = sentence_id;
        inst.sentence = surface;
        inst.target_position = static_cast<std::size_t>(tok - sent.children.data());
        if (index.count(inst.id)) {
          throw ParseError(ParseError::Kind::duplicate_id, tok->line,
                           "duplicate instance id '" + inst.id + "'");
        }
        index.emplace(inst.id, corpus.instances.size());
        corpus.instances.push_back(std::move(inst));
      }
    }
  }

  for (auto& kl : parse_key_lines(key_text)) {
    auto it = index.find(kl.instance_id);
    if (it == index.end()) {
      corpus.warnings.push_back("key line " + std::to_string(kl.line) + ": unknown instance id '" +
                                kl.instance_id + "', skipped");
      continue;
    }
    auto& gold = corpus.instances[it->second].gold_keys;
    for (const auto& k : kl.keys) add_distinct(gold, k);
  }
  return corpus;
}

inline KeyMap gold_keys_of(const std::vector<AnnotatedInstance>& instances) {
  KeyMap map;
  for (const auto& inst : instances) {
    if (!inst.gold_keys.empty()) map[inst.id] = inst.gold_keys;
  }
  return map;
}

// Serializes instances back to the corpus XML shape. Consecutive instances
// sharing a sentence id become one <sentence>; non-target tokens are
// written as bare <wf> elements.
inline std::string to_xml(const std::vector<AnnotatedInstance>& instances) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<corpus lang=\"en\">\n<text id=\"d0\">\n";
  std::size_t i = 0;
  while (i < instances.size()) {
    std::size_t j = i + 1;
    while (j < instances.size() && instances[j].sentence_id == instances[i].sentence_id &&
           instances[j].sentence == instances[i].sentence) {
      ++j;
    }
    const auto& sent = instances[i].sentence;
    out += "<sentence id=\"" + xml::escape(instances[i].sentence_id) + "\">\n";
    for (std::size_t t = 0; t < sent.size(); ++t) {
      const AnnotatedInstance* target = nullptr;
      for (std::size_t k = i; k < j; ++k) {
        if (instances[k].target_position == t) target = &instances[k];
      }
      if (target) {
        out += "<instance id=\"" + xml::escape(target->id) + "\" lemma=\"" +
               xml::escape(target->lemma) + "\" pos=\"" + std::string(pos_name(target->pos)) +
               "\">" + xml::escape(sent[t]) + "</instance>\n";
      } else {
        out += "<wf>" + xml::escape(sent[t]) + "</wf>\n";
      }
    }
    out += "</sentence>\n";
    i = j;
  }
  out += "</text>\n</corpus>\n";
  return out;
}

struct EncodedInstance {
  Sentence sentence;
  std::size_t target_position = 0;
};

// Normalizes surfaces with the LM corpus options (internal whitespace of
// multiword surfaces becomes '_'), keeps a window of at most max_len - 1
// tokens around the target and appends EOS.
inline EncodedInstance encode_instance(const AnnotatedInstance& inst, const Vocabulary& vocab,
                                       const TokenizeOptions& opts, std::size_t max_len) {
  if (inst.target_position >= inst.sentence.size()) {
    throw Error("instance '" + inst.id + "': target position out of range");
  }
  std::size_t begin = 0;
  std::size_t end = inst.sentence.size();
  const std::size_t window = max_len > 1 ? max_len - 1 : 1;
  if (max_len > 0 && end > window) {
    const std::size_t half = window / 2;
    begin = inst.target_position > half ? inst.target_position - half : 0;
    begin = std::min(begin, end - window);
    end = begin + window;
  }
  EncodedInstance enc;
  enc.target_position = inst.target_position - begin;
  enc.sentence.ids.reserve(end - begin + 1);
  for (std::size_t t = begin; t < end; ++t) {
    std::string form;
    std::size_t pos = 0;
    const std::string& surface = inst.sentence[t];
    while (pos < surface.size()) {
      const std::size_t start = pos;
      const char32_t cp = utf8::decode(surface, pos);
      if (is_space(cp)) {
        if (!form.empty() && form.back() != '_') form += '_';
      } else {
        form.append(surface, start, pos - start);
      }
    }
    enc.sentence.ids.push_back(vocab.id(normalize_token(form, opts)));
  }
  enc.sentence.ids.push_back(Vocabulary::kEos);
  return enc;
}

}  // namespace senselab::corpus
