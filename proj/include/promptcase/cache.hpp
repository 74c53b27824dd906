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

// Content-addressed embedding cache.
//
// On disk: <root>/<backend-dir>/<kk>.bin where kk is the first two hex digits
// of the key. Records are appended and fixed-width for a given dim:
//   u64 key | u32 checksum | u32 dim | f32[dim]      (little-endian)
// checksum = FNV-1a 32 over the key, dim and vector bytes as stored.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "promptcase/backend.hpp"
#include "promptcase/hash.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

inline std::uint64_t cache_key(const BackendDescriptor& desc, const EncoderInput& input) {
  std::uint64_t h = fnv1a64(desc.name);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(desc.version, h);
  h = fnv1a64(std::string_view("\0", 1), h);
  return fnv1a64(canonical_segments(input), h);
}

namespace detail {

inline std::string cache_record(std::uint64_t key, const Vector& v) {
  std::string payload;
  append_le<std::uint64_t>(payload, key);
  append_le<std::uint32_t>(payload, static_cast<std::uint32_t>(v.size()));
  for (float f : v) append_le<float>(payload, f);
  std::uint32_t checksum = fnv1a32(payload);
  std::string rec;
  rec.reserve(payload.size() + 4);
  rec.append(payload, 0, 8);
  append_le<std::uint32_t>(rec, checksum);
  rec.append(payload, 8, std::string::npos);
  return rec;
}

inline std::string sanitize_dir_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace detail

class EmbeddingCache {
 public:
  EmbeddingCache(const fs::path& root, BackendDescriptor desc) : desc_(std::move(desc)) {
    if (desc_.dim == 0) throw Error("cache: backend dim must be positive");
    dir_ = root / detail::sanitize_dir_name(desc_.name + "@" + desc_.version + "-d" + std::to_string(desc_.dim));
    fs::create_directories(dir_);
    load();
  }

  const BackendDescriptor& descriptor() const { return desc_; }
  const fs::path& directory() const { return dir_; }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }
  std::size_t corrupt_records() const { return corrupt_; }

  std::optional<Vector> get(std::uint64_t key) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(std::uint64_t key, const Vector& v) {
    if (v.size() != desc_.dim) throw Error("cache: vector dim does not match backend");
    std::string rec = detail::cache_record(key, v);
    std::unique_lock lock(mu_);
    std::ofstream out(shard_path(key), std::ios::binary | std::ios::app);
    if (!out) throw Error("cache: cannot append to " + shard_path(key).string());
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    entries_[key] = v;
  }

  fs::path shard_path(std::uint64_t key) const { return dir_ / (hex64(key).substr(0, 2) + ".bin"); }

 private:
  std::size_t record_size() const { return 16 + 4 * desc_.dim; }

  void load() {
    std::vector<fs::path> shards;
    for (const auto& entry : fs::directory_iterator(dir_))
      if (entry.is_regular_file() && entry.path().extension() == ".bin") shards.push_back(entry.path());
    std::sort(shards.begin(), shards.end());
    for (const auto& shard : shards) {
      std::string data = read_file(shard);
      const std::size_t rs = record_size();
      std::size_t off = 0;
      for (; off + rs <= data.size(); off += rs) {
        std::string_view rec(data.data() + off, rs);
        auto key = read_le<std::uint64_t>(rec, 0);
        auto checksum = read_le<std::uint32_t>(rec, 8);
        auto dim = read_le<std::uint32_t>(rec, 12);
        std::string payload(rec.substr(0, 8));
        payload.append(rec.substr(12));
        if (dim != desc_.dim || fnv1a32(payload) != checksum) {
          ++corrupt_;
          log_warning("embedding cache: bad record at " + shard.string() + "+" + std::to_string(off) + "; treated as miss");
          continue;
        }
        Vector v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = read_le<float>(rec, 16 + 4 * i);
        entries_[key] = std::move(v);
      }
      if (off != data.size()) {
        ++corrupt_;
        log_warning("embedding cache: truncated tail in " + shard.string());
      }
    }
  }

  BackendDescriptor desc_;
  fs::path dir_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::uint64_t, Vector> entries_;
  std::size_t corrupt_ = 0;
};

/// Serves hits from the cache, embeds all misses in one backend batch
/// (identical inputs embedded once), persists them, and returns vectors in
/// input order.
inline std::vector<Vector> cache_get_or_embed(EmbeddingCache& cache, const EmbeddingBackend& backend,
                                              std::span<const EncoderInput> inputs) {
  if (inputs.empty()) throw Error("embed_batch: empty input list");
  if (backend.descriptor() != cache.descriptor()) throw Error("cache was opened for a different backend descriptor");
  std::vector<Vector> out(inputs.size());
  std::vector<std::uint64_t> keys(inputs.size());
  std::vector<EncoderInput> misses;
  std::map<std::uint64_t, std::size_t> miss_slot;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    validate_input(inputs[i]);
    keys[i] = cache_key(cache.descriptor(), inputs[i]);
    if (auto hit = cache.get(keys[i])) {
      out[i] = std::move(*hit);
      continue;
    }
    if (!miss_slot.contains(keys[i])) {
      miss_slot[keys[i]] = misses.size();
      misses.push_back(inputs[i]);
    }
    pending.push_back(i);
  }
  if (!misses.empty()) {
    std::vector<Vector> fresh = embed_batch(backend, misses);
    for (const auto& [key, slot] : miss_slot) cache.put(key, fresh[slot]);
    for (std::size_t i : pending) out[i] = fresh[miss_slot.at(keys[i])];
  }
  return out;
}

/// Backend decorator that routes every call through a cache.
class CachedBackend final : public EmbeddingBackend {
 public:
  CachedBackend(const EmbeddingBackend& inner, EmbeddingCache& cache) : inner_(inner), cache_(cache) {}

  BackendDescriptor descriptor() const override { return inner_.descriptor(); }
  std::vector<Vector> embed(std::span<const EncoderInput> inputs) const override {
    return cache_get_or_embed(cache_, inner_, inputs);
  }

 private:
  const EmbeddingBackend& inner_;
  EmbeddingCache& cache_;
};

}  // namespace promptcase
