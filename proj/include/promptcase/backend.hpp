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

// Embedding backends. An input is one segment (dual encoding) or two
// segments (cross encoding); special tokens and truncation are the backend's
// business.

#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "promptcase/hash.hpp"
#include "promptcase/text.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

using json = nlohmann::json;
using Vector = std::vector<float>;

struct EncoderInput {
  std::vector<std::string> segments;

  EncoderInput() = default;
  explicit EncoderInput(std::string single) : segments{std::move(single)} {}
  EncoderInput(std::string first, std::string second) : segments{std::move(first), std::move(second)} {}

  bool is_pair() const { return segments.size() == 2; }
  friend bool operator==(const EncoderInput&, const EncoderInput&) = default;
};

inline void validate_input(const EncoderInput& in) {
  if (in.segments.empty() || in.segments.size() > 2) throw Error("encoder input must have 1 or 2 segments");
}

/// Canonical serialization used for cache keys and file-backend lookup.
inline std::string canonical_segments(const EncoderInput& in) { return json(in.segments).dump(); }

struct BackendDescriptor {
  std::string name;
  std::string version;
  std::size_t dim = 0;
  std::size_t max_tokens = 512;

  friend bool operator==(const BackendDescriptor&, const BackendDescriptor&) = default;
};

inline json to_json(const BackendDescriptor& d) {
  return json{{"name", d.name}, {"version", d.version}, {"dim", d.dim}, {"max_tokens", d.max_tokens}};
}

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual BackendDescriptor descriptor() const = 0;
  /// One vector per input, order-aligned. Must be safe to call concurrently.
  virtual std::vector<Vector> embed(std::span<const EncoderInput> inputs) const = 0;
};

/// Calls the backend and enforces the output contract: same length as the
/// input, every vector of the declared dimension with finite components.
inline std::vector<Vector> embed_batch(const EmbeddingBackend& backend, std::span<const EncoderInput> inputs) {
  if (inputs.empty()) throw Error("embed_batch: empty input list");
  for (const auto& in : inputs) validate_input(in);
  std::vector<Vector> out = backend.embed(inputs);
  if (out.size() != inputs.size())
    throw Error("malformed response: count mismatch (" + std::to_string(out.size()) + " vectors for " +
                std::to_string(inputs.size()) + " inputs)");
  const std::size_t dim = backend.descriptor().dim;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() != dim)
      throw Error("dimension mismatch: input " + std::to_string(i) + " returned dim " + std::to_string(out[i].size()) +
                  ", backend declares " + std::to_string(dim));
    for (float v : out[i])
      if (!std::isfinite(v)) throw Error("non-finite component in vector " + std::to_string(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncation budget shared by every token-aware backend.

struct SegmentBudget {
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Single segment: max_tokens minus [CLS] and [SEP]. Pair: max_tokens minus
/// [CLS], [SEP], [SEP], split evenly (the odd token goes to the second).
inline SegmentBudget token_budget(std::size_t max_tokens, bool pair) {
  if (!pair) return {max_tokens > 2 ? max_tokens - 2 : 0, 0};
  std::size_t b = max_tokens > 3 ? max_tokens - 3 : 0;
  return {b / 2, b - b / 2};
}

// ---------------------------------------------------------------------------
// Deterministic hashed bag-of-words backend.

inline constexpr std::string_view kMockSegmentMarker = "[SEP]";

/// Whitespace tokens, with every CJK ideograph split out as its own token.
inline std::vector<std::string> mock_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t pos = 0; pos < s.size();) {
    text::CodePoint cp = text::decode_at(s, pos);
    if (text::is_space(cp.value)) {
      flush();
    } else if (text::is_cjk(cp.value)) {
      flush();
      out.emplace_back(s.substr(pos, cp.length));
    } else {
      current.append(s.substr(pos, cp.length));
    }
    pos += cp.length;
  }
  flush();
  return out;
}

/// Each token adds 1 at seeded_hash(token, seed) mod dim; the vector is then
/// scaled by 1/sqrt(1 + token count). A pair is segment1, marker, segment2.
/// max_tokens of 0 disables truncation.
inline Vector mock_embed(const EncoderInput& input, std::size_t dim, std::uint64_t seed, std::size_t max_tokens = 0) {
  if (dim == 0) throw Error("mock_embed: dim must be >= 1");
  validate_input(input);
  std::vector<std::string> tokens = mock_tokens(input.segments[0]);
  if (input.is_pair()) {
    std::vector<std::string> second = mock_tokens(input.segments[1]);
    if (max_tokens) {
      SegmentBudget budget = token_budget(max_tokens, true);
      if (tokens.size() > budget.first) tokens.resize(budget.first);
      if (second.size() > budget.second) second.resize(budget.second);
    }
    tokens.emplace_back(kMockSegmentMarker);
    tokens.insert(tokens.end(), second.begin(), second.end());
  } else if (max_tokens) {
    SegmentBudget budget = token_budget(max_tokens, false);
    if (tokens.size() > budget.first) tokens.resize(budget.first);
  }
  std::vector<std::uint32_t> counts(dim, 0);
  for (const auto& t : tokens) ++counts[seeded_hash(t, seed) % dim];
  const double scale = 1.0 / std::sqrt(1.0 + static_cast<double>(tokens.size()));
  Vector v(dim, 0.0f);
  for (std::size_t i = 0; i < dim; ++i) v[i] = static_cast<float>(counts[i] * scale);
  return v;
}

class MockBackend final : public EmbeddingBackend {
 public:
  explicit MockBackend(std::size_t dim, std::uint64_t seed = 0, std::size_t max_tokens = 512)
      : dim_(dim), seed_(seed), max_tokens_(max_tokens) {
    if (dim == 0) throw ConfigError("mock backend: dim must be >= 1");
  }

  BackendDescriptor descriptor() const override {
    return {"mock-hashed-bow", "1+seed." + std::to_string(seed_), dim_, max_tokens_};
  }

  std::vector<Vector> embed(std::span<const EncoderInput> inputs) const override {
    std::vector<Vector> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(mock_embed(in, dim_, seed_, max_tokens_));
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t max_tokens_;
};

/// Serves precomputed vectors from a JSONL file. The first line is the
/// descriptor {"name","version","dim","max_tokens"}; every other line is
/// {"segments":[...], "vector":[...]}.
class FileBackend final : public EmbeddingBackend {
 public:
  explicit FileBackend(const fs::path& path) {
    auto lines = read_lines(path);
    bool have_header = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
      if (trim(lines[n]).empty()) continue;
      try {
        json j = json::parse(lines[n]);
        if (!have_header) {
          desc_.name = j.at("name").get<std::string>();
          desc_.version = j.at("version").get<std::string>();
          desc_.dim = j.at("dim").get<std::size_t>();
          desc_.max_tokens = j.value("max_tokens", std::size_t{512});
          have_header = true;
          continue;
        }
        EncoderInput in;
        in.segments = j.at("segments").get<std::vector<std::string>>();
        validate_input(in);
        Vector v = j.at("vector").get<Vector>();
        if (v.size() != desc_.dim) throw Error("vector has dim " + std::to_string(v.size()));
        vectors_[canonical_segments(in)] = std::move(v);
      } catch (const std::exception& e) {
        throw Error(path.string() + ":" + std::to_string(n + 1) + ": " + e.what());
      }
    }
    if (!have_header) throw Error("file backend " + path.string() + " has no descriptor line");
  }

  BackendDescriptor descriptor() const override { return desc_; }

  std::vector<Vector> embed(std::span<const EncoderInput> inputs) const override {
    std::vector<Vector> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
      auto it = vectors_.find(canonical_segments(in));
      if (it == vectors_.end()) throw Error("file backend has no vector for input " + canonical_segments(in));
      out.push_back(it->second);
    }
    return out;
  }

 private:
  BackendDescriptor desc_;
  std::unordered_map<std::string, Vector> vectors_;
};

/// Forwards to another backend and counts calls and embedded inputs.
class CountingBackend final : public EmbeddingBackend {
 public:
  explicit CountingBackend(const EmbeddingBackend& inner) : inner_(inner) {}

  BackendDescriptor descriptor() const override { return inner_.descriptor(); }
  std::vector<Vector> embed(std::span<const EncoderInput> inputs) const override {
    ++calls_;
    inputs_ += inputs.size();
    return inner_.embed(inputs);
  }

  std::size_t calls() const { return calls_; }
  std::size_t inputs_embedded() const { return inputs_; }

 private:
  const EmbeddingBackend& inner_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::atomic<std::size_t> inputs_{0};
};

}  // namespace promptcase
