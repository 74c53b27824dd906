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

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "promptcase/text.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

enum class TokenizerKind { english_simple, chinese_bigram };

inline std::string_view to_string(TokenizerKind k) {
  return k == TokenizerKind::english_simple ? "english_simple" : "chinese_bigram";
}

inline TokenizerKind parse_tokenizer_kind(std::string_view s) {
  if (s == "english_simple") return TokenizerKind::english_simple;
  if (s == "chinese_bigram") return TokenizerKind::chinese_bigram;
  throw ConfigError("unknown tokenizer '" + std::string(s) + "' (expected english_simple or chinese_bigram)");
}

/// Text to retrieval terms. Implementations are stateless and deterministic.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenizerKind kind() const = 0;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

namespace detail {

// Lowercases and splits on non-word characters. CJK ideographs are word
// characters here; chinese_bigram peels them off before calling this.
inline void english_terms(std::string_view s, std::vector<std::string>& out) {
  std::string term;
  for (std::size_t pos = 0; pos < s.size();) {
    text::CodePoint cp = text::decode_at(s, pos);
    pos += cp.length;
    if (text::is_word_char(cp.value)) {
      text::append_utf8(term, text::to_lower(cp.value));
    } else if (!term.empty()) {
      out.push_back(std::move(term));
      term.clear();
    }
  }
  if (!term.empty()) out.push_back(std::move(term));
}

}  // namespace detail

class EnglishSimpleTokenizer final : public Tokenizer {
 public:
  TokenizerKind kind() const override { return TokenizerKind::english_simple; }
  std::vector<std::string> tokenize(std::string_view text) const override {
    std::vector<std::string> out;
    detail::english_terms(text, out);
    return out;
  }
};

/// Overlapping character bigrams over CJK runs; a lone ideograph becomes a
/// unigram. Everything between CJK runs goes through english_simple.
class ChineseBigramTokenizer final : public Tokenizer {
 public:
  TokenizerKind kind() const override { return TokenizerKind::chinese_bigram; }
  std::vector<std::string> tokenize(std::string_view s) const override {
    std::vector<std::string> out;
    std::vector<std::string_view> run;
    std::size_t other_start = 0;
    auto flush_run = [&] {
      if (run.size() == 1) {
        out.emplace_back(run[0]);
      } else {
        for (std::size_t i = 0; i + 1 < run.size(); ++i) {
          std::string bigram(run[i]);
          bigram += run[i + 1];
          out.push_back(std::move(bigram));
        }
      }
      run.clear();
    };
    for (std::size_t pos = 0; pos < s.size();) {
      text::CodePoint cp = text::decode_at(s, pos);
      if (text::is_cjk(cp.value)) {
        if (run.empty()) detail::english_terms(s.substr(other_start, pos - other_start), out);
        run.push_back(s.substr(pos, cp.length));
        pos += cp.length;
        other_start = pos;
      } else {
        if (!run.empty()) flush_run();
        pos += cp.length;
      }
    }
    if (!run.empty()) flush_run();
    detail::english_terms(s.substr(other_start), out);
    return out;
  }
};

inline std::unique_ptr<Tokenizer> make_tokenizer(TokenizerKind kind) {
  if (kind == TokenizerKind::english_simple) return std::make_unique<EnglishSimpleTokenizer>();
  return std::make_unique<ChineseBigramTokenizer>();
}

}  // namespace promptcase
