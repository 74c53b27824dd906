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

// Rule-based sentence splitting. Sentences never cross a line break.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "promptcase/text.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

inline std::string_view slice(std::string_view s, Span span) { return s.substr(span.begin, span.size()); }

namespace segment {

// Words ending in '.' that do not end a sentence.
inline constexpr std::array<std::string_view, 20> kAbbreviations = {
    "v.",   "vs.",  "No.",  "Nos.", "Mr.",  "Mrs.", "Ms.",   "Dr.",    "Inc.", "Ltd.",
    "Co.",  "Corp.", "U.S.", "St.", "Jr.",  "para.", "paras.", "cf.", "e.g.", "i.e."};

namespace detail {

inline Span trimmed(std::string_view s, std::size_t begin, std::size_t end) {
  Span span{begin, end};
  std::string_view piece = s.substr(begin, end - begin);
  std::string_view t = trim(piece);
  if (t.empty()) return {end, end};
  span.begin = begin + static_cast<std::size_t>(t.data() - piece.data());
  span.end = span.begin + t.size();
  return span;
}

inline void emit(std::vector<Span>& out, std::string_view s, std::size_t begin, std::size_t end) {
  Span span = trimmed(s, begin, end);
  if (!span.empty()) out.push_back(span);
}

inline bool is_abbreviation(std::string_view s, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && s[start - 1] != ' ' && s[start - 1] != '\n' && s[start - 1] != '\t') --start;
  std::string_view word = s.substr(start, dot - start + 1);
  // Leading brackets or quotes do not belong to the abbreviation.
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' || word.front() == '['))
    word.remove_prefix(1);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace detail

/// English: a run of [.!?] ends a sentence when followed by whitespace and an
/// uppercase ASCII letter, or by the end of text. A period closing a word on
/// the abbreviation list never ends a sentence. Line breaks always do.
inline std::vector<Span> english_sentences(std::string_view s) {
  std::vector<Span> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      detail::emit(out, s, start, i);
      start = i + 1;
      ++i;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < s.size() && (s[run_end] == '.' || s[run_end] == '!' || s[run_end] == '?')) ++run_end;
    if (run_end - i == 1 && c == '.' && detail::is_abbreviation(s, i)) {
      i = run_end;
      continue;
    }
    if (run_end == s.size()) {
      detail::emit(out, s, start, run_end);
      start = run_end;
      i = run_end;
      continue;
    }
    std::size_t j = run_end;
    while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
    bool at_break = j < s.size() && s[j] == '\n';
    bool boundary = (j > run_end && j < s.size() && s[j] >= 'A' && s[j] <= 'Z') || j == s.size() || at_break;
    if (boundary) {
      detail::emit(out, s, start, run_end);
      start = run_end;
    }
    i = run_end;
  }
  detail::emit(out, s, start, s.size());
  return out;
}

/// Chinese: split after 。！？；(terminator kept with its sentence) and at line breaks.
inline std::vector<Span> chinese_sentences(std::string_view s) {
  std::vector<Span> out;
  std::size_t start = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    text::CodePoint cp = text::decode_at(s, pos);
    pos += cp.length;
    if (cp.value == U'。' || cp.value == U'！' || cp.value == U'？' || cp.value == U'；') {
      detail::emit(out, s, start, pos);
      start = pos;
    } else if (cp.value == '\n') {
      detail::emit(out, s, start, pos - 1);
      start = pos;
    }
  }
  detail::emit(out, s, start, s.size());
  return out;
}

}  // namespace segment
}  // namespace promptcase
