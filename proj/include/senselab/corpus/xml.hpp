#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senselab/corpus/tokenize.hpp"
#include "senselab/error.hpp"

// A small non-validating XML reader: elements, attributes, character data,
// the predefined and numeric entities, comments, CDATA, processing
// instructions and a skipped DOCTYPE. Enough for corpus files; no
// namespaces or DTD expansion.
namespace senselab::corpus::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data directly inside this element
  std::size_t line = 0;

  std::optional<std::string_view> attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return std::string_view(v);
    }
    return std::nullopt;
  }
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Element document() {
    skip_misc();
    if (at_end()) fail(ParseError::Kind::unexpected_eof, "document has no root element");
    if (peek() != '<') fail(ParseError::Kind::syntax, "content before the root element");
    Element root = element();
    skip_misc();
    if (!at_end()) fail(ParseError::Kind::syntax, "content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& what) const {
    throw ParseError(kind, line_, what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  void expect(std::string_view s) {
    if (at_end()) fail(ParseError::Kind::unexpected_eof, "expected '" + std::string(s) + "'");
    if (!starts_with(s)) fail(ParseError::Kind::syntax, "expected '" + std::string(s) + "'");
    advance(s.size());
  }

  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
      advance();
    }
  }

  // Advances past the next occurrence of `terminator`.
  void skip_past(std::string_view terminator, const char* construct) {
    const std::size_t found = text_.find(terminator, pos_);
    if (found == std::string_view::npos) {
      fail(ParseError::Kind::unexpected_eof, std::string("unterminated ") + construct);
    }
    advance(found + terminator.size() - pos_);
  }

  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_past("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_past("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        skip_past(">", "DOCTYPE");
      } else {
        return;
      }
    }
  }

  static bool name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
  }

  std::string name() {
    const std::size_t start = pos_;
    while (!at_end() && name_char(peek())) advance();
    if (pos_ == start) {
      if (at_end()) fail(ParseError::Kind::unexpected_eof, "expected a name");
      fail(ParseError::Kind::syntax, std::string("expected a name, found '") + peek() + "'");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void entity(std::string& out) {
    const std::size_t semi = text_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) {
      fail(ParseError::Kind::bad_entity, "unterminated entity reference");
    }
    const std::string_view ref = text_.substr(pos_ + 1, semi - pos_ - 1);
    if (ref == "amp") {
      out += '&';
    } else if (ref == "lt") {
      out += '<';
    } else if (ref == "gt") {
      out += '>';
    } else if (ref == "quot") {
      out += '"';
    } else if (ref == "apos") {
      out += '\'';
    } else if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x';
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      if (digits.empty()) fail(ParseError::Kind::bad_entity, "empty character reference");
      for (char c : digits) {
        int d = -1;
        if (c >= '0' && c <= '9') d = c - '0';
        if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        if (d < 0) fail(ParseError::Kind::bad_entity, "bad character reference &" + std::string(ref) + ";");
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) fail(ParseError::Kind::bad_entity, "character reference out of range");
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) {
        fail(ParseError::Kind::bad_entity, "invalid character reference");
      }
      utf8::encode(static_cast<char32_t>(cp), out);
    } else {
      fail(ParseError::Kind::bad_entity, "unknown entity &" + std::string(ref) + ";");
    }
    advance(semi + 1 - pos_);
  }

  std::string attribute_value() {
    if (at_end()) fail(ParseError::Kind::unexpected_eof, "expected attribute value");
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail(ParseError::Kind::syntax, "attribute value must be quoted");
    const std::size_t open_line = line_;
    advance();
    std::string value;
    for (;;) {
      if (at_end()) {
        throw ParseError(ParseError::Kind::unexpected_eof, open_line, "unterminated attribute value");
      }
      const char c = peek();
      if (c == quote) break;
      if (c == '<') fail(ParseError::Kind::syntax, "'<' inside attribute value");
      if (c == '&') {
        entity(value);
      } else {
        value += c;
        advance();
      }
    }
    advance();
    return value;
  }

  Element element() {
    Element el;
    el.line = line_;
    expect("<");
    el.name = name();
    for (;;) {
      skip_space();
      if (at_end()) fail(ParseError::Kind::unexpected_eof, "unterminated start tag <" + el.name + ">");
      if (starts_with("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      std::string key = name();
      skip_space();
      expect("=");
      skip_space();
      std::string value = attribute_value();
      for (const auto& [k, v] : el.attributes) {
        if (k == key) fail(ParseError::Kind::syntax, "duplicate attribute '" + key + "'");
      }
      el.attributes.emplace_back(std::move(key), std::move(value));
    }
    content(el);
    return el;
  }

  void content(Element& el) {
    for (;;) {
      if (at_end()) {
        throw ParseError(ParseError::Kind::unexpected_eof, line_,
                         "element <" + el.name + "> opened on line " + std::to_string(el.line) +
                             " is never closed");
      }
      if (starts_with("</")) {
        advance(2);
        const std::string closing = name();
        skip_space();
        expect(">");
        if (closing != el.name) {
          fail(ParseError::Kind::mismatched_tag,
               "closing tag </" + closing + "> does not match <" + el.name + "> opened on line " +
                   std::to_string(el.line));
        }
        return;
      }
      if (starts_with("<!--")) {
        skip_past("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        advance(9);
        const std::size_t end = text_.find("]]>", pos_);
        if (end == std::string_view::npos) fail(ParseError::Kind::unexpected_eof, "unterminated CDATA");
        el.text.append(text_.substr(pos_, end - pos_));
        advance(end + 3 - pos_);
      } else if (starts_with("<?")) {
        skip_past("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element());
      } else if (peek() == '&') {
        entity(el.text);
      } else {
        el.text += peek();
        advance();
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

inline Element parse(std::string_view text) {
  std::size_t pos = 0;
  // Reject bad encodings up front so the element reader can work on bytes.
  while (pos < text.size()) {
    const std::size_t at = pos;
    try {
      utf8::decode(text, pos);
    } catch (const IngestError&) {
      std::size_t line = 1;
      for (std::size_t i = 0; i < at; ++i) line += text[i] == '\n';
      throw ParseError(ParseError::Kind::syntax, line,
                       "invalid UTF-8 at byte offset " + std::to_string(at));
    }
  }
  return detail::Reader(text).document();
}

inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace senselab::corpus::xml
