#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "senselab/error.hpp"

namespace senselab::corpus {

using SurfaceSentence = std::vector<std::string>;

inline constexpr std::string_view kNumberForm = "<num>";

struct TokenizeOptions {
  bool lowercase = true;
  bool map_digits = true;  // digit tokens become kNumberForm
};

namespace utf8 {

// Decodes the code point starting at text[pos], advancing pos. Throws
// IngestError on malformed input.
inline char32_t decode(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  const auto lead = static_cast<unsigned char>(text[pos]);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  std::size_t extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    throw IngestError("invalid UTF-8 lead byte", start);
  }
  if (pos + extra >= text.size()) {
    throw IngestError("truncated UTF-8 sequence", start);
  }
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[pos + k]);
    if ((b & 0xC0) != 0x80) throw IngestError("invalid UTF-8 continuation byte", pos + k);
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min) throw IngestError("overlong UTF-8 encoding", start);
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw IngestError("invalid code point in UTF-8", start);
  }
  pos += extra + 1;
  return cp;
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline void validate(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) decode(text, pos);
}

}  // namespace utf8

// White_Space code points of the Unicode character database.
inline bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Simple case folding for Latin, Greek and Cyrillic capitals; other
// scripts pass through unchanged.
inline char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    const bool even_pairs = (cp <= 0x137 && cp != 0x131) || (cp >= 0x14A && cp <= 0x177);
    const bool odd_pairs = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if ((even_pairs && cp % 2 == 0) || (odd_pairs && cp % 2 == 1)) return cp + 1;
    return cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

inline std::string lowercase(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t pos = 0;
  while (pos < token.size()) utf8::encode(fold_case(utf8::decode(token, pos)), out);
  return out;
}

// A token made only of ASCII digits and the separators ".,-" with at least
// one digit, e.g. "1984", "3.14", "1,000".
inline bool is_number(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-') {
      return false;
    }
  }
  return digit;
}

inline std::string normalize_token(std::string_view token, const TokenizeOptions& opts) {
  if (opts.map_digits && is_number(token)) return std::string(kNumberForm);
  return opts.lowercase ? lowercase(token) : std::string(token);
}

// One sentence per line, tokens split on Unicode whitespace, empty lines
// dropped.
inline std::vector<SurfaceSentence> tokenize(std::string_view text, const TokenizeOptions& opts = {}) {
  std::vector<SurfaceSentence> sentences;
  SurfaceSentence current;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      current.push_back(normalize_token(token, opts));
      token.clear();
    }
  };
  auto flush_sentence = [&] {
    flush_token();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = utf8::decode(text, pos);
    if (cp == '\n') {
      flush_sentence();
    } else if (is_space(cp)) {
      flush_token();
    } else {
      token.append(text.substr(start, pos - start));
    }
  }
  flush_sentence();
  return sentences;
}

// Splits sentences longer than max_len tokens into consecutive pieces.
inline std::vector<SurfaceSentence> split_long(std::vector<SurfaceSentence> sentences,
                                               std::size_t max_len) {
  if (max_len == 0) return sentences;
  std::vector<SurfaceSentence> out;
  out.reserve(sentences.size());
  for (auto& s : sentences) {
    if (s.size() <= max_len) {
      out.push_back(std::move(s));
      continue;
    }
    for (std::size_t off = 0; off < s.size(); off += max_len) {
      const std::size_t end = std::min(s.size(), off + max_len);
      out.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(off),
                       s.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return out;
}

}  // namespace senselab::corpus
