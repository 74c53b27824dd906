// Copyright 2026 The promptcase Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// UTF-8 helpers and document normalization.

#pragma once

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "promptcase/util.hpp"

namespace promptcase::text {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first unit
  std::size_t length;  // byte length, 1..4
};

/// Decodes one code point at `pos`. Invalid sequences decode as U+FFFD with
/// length 1 so iteration always makes progress.
inline CodePoint decode_at(std::string_view s, std::size_t pos) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  unsigned char c = byte(pos);
  if (c < 0x80) return {c, pos, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return {0xFFFD, pos, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, pos, 1};
  for (std::size_t i = 1; i < len; ++i) {
    unsigned char cc = byte(pos + i);
    if ((cc & 0xC0) != 0x80) return {0xFFFD, pos, 1};
    cp = (cp << 6) | (cc & 0x3F);
  }
  return {cp, pos, len};
}

inline std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    CodePoint cp = decode_at(s, pos);
    out.push_back(cp);
    pos += cp.length;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

/// CJK unified ideographs (base block, extensions A-F) and compatibility ideographs.
constexpr bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x20000 && cp <= 0x2EBEF) || (cp >= 0xF900 && cp <= 0xFAFF);
}

constexpr bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

/// Letters and digits for term splitting: ASCII alphanumerics plus any
/// non-ASCII code point outside the common punctuation and symbol blocks.
constexpr bool is_word_char(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (is_space(cp)) return false;
  if (cp >= 0x00A1 && cp <= 0x00BF) return false;                 // Latin-1 punctuation
  if (cp == 0x00D7 || cp == 0x00F7) return false;                 // × ÷
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;                 // general punctuation, arrows, math
  if (cp >= 0x3000 && cp <= 0x303F) return false;                 // CJK symbols and punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;                 // CJK compatibility forms
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;                 // fullwidth punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp == 0xFFFD) return false;
  return true;
}

/// ASCII and Latin-1 Supplement lowercase mapping.
constexpr char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

inline std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) pos += decode_at(s, pos).length;
  return n;
}

/// Prefix of `s` holding at most `n` code points.
inline std::string_view take_code_points(std::string_view s, std::size_t n) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n && pos < s.size(); ++i) pos += decode_at(s, pos).length;
  return s.substr(0, pos);
}

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

/// Splits on blank lines into paragraphs, collapses every whitespace run
/// inside a paragraph to one ASCII space and trims. Empty paragraphs vanish.
inline std::vector<std::string> split_paragraphs(std::string_view s) {
  std::vector<std::string> paragraphs;
  std::string current;
  bool pending_space = false;
  int newlines = 0;
  auto flush = [&] {
    if (!current.empty()) paragraphs.push_back(std::move(current));
    current.clear();
    pending_space = false;
  };
  for (std::size_t pos = 0; pos < s.size();) {
    CodePoint cp = decode_at(s, pos);
    pos += cp.length;
    if (cp.value == '\n') {
      if (++newlines >= 2) flush();
      pending_space = !current.empty();
      continue;
    }
    if (is_space(cp.value)) {
      pending_space = !current.empty();
      continue;
    }
    newlines = 0;
    if (pending_space) current.push_back(' ');
    pending_space = false;
    append_utf8(current, cp.value);
  }
  flush();
  return paragraphs;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline constexpr std::string_view kParagraphBreak = "\n\n";

/// Unicode NFC, CRLF folding, per-paragraph whitespace collapsing, paragraphs
/// rejoined with a blank line.
inline std::string normalize_document(std::string_view raw) {
  std::string folded;
  folded.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r') {
      folded.push_back('\n');
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else {
      folded.push_back(raw[i]);
    }
  }
  return join(split_paragraphs(nfc(folded)), kParagraphBreak);
}

/// Whitespace-delimited tokens (any Unicode space).
inline std::vector<std::string_view> whitespace_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = std::string_view::npos;
  for (std::size_t pos = 0; pos < s.size();) {
    CodePoint cp = decode_at(s, pos);
    if (is_space(cp.value)) {
      if (start != std::string_view::npos) out.push_back(s.substr(start, pos - start));
      start = std::string_view::npos;
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos += cp.length;
  }
  if (start != std::string_view::npos) out.push_back(s.substr(start));
  return out;
}

}  // namespace promptcase::text
