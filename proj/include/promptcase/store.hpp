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

// Representation store.
//
//   header:  "PCRS" | u32 version | u32 dim | u64 count
//   records: u64 fnv1a64(case id) | f32[dim]
//
// All integers and floats little-endian. The sidecar <store>.ids.json holds
// the id list in record order plus the variant, template and backend that
// produced the vectors.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcase/backend.hpp"
#include "promptcase/encoding.hpp"
#include "promptcase/hash.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

inline constexpr std::string_view kStoreMagic = "PCRS";
inline constexpr std::uint32_t kStoreVersion = 1;

struct RepresentationStore {
  ReformulationVariant variant;
  std::string template_name;
  BackendDescriptor backend;
  std::vector<CaseRepresentation> reps;

  std::size_t dim() const { return reps.empty() ? 0 : reps.front().concat.size(); }
  const CaseRepresentation* find(const std::string& id) const {
    for (const auto& r : reps)
      if (r.case_id == id) return &r;
    return nullptr;
  }
};

inline fs::path store_sidecar_path(const fs::path& store) { return fs::path(store.string() + ".ids.json"); }

inline std::string store_bytes(const RepresentationStore& s) {
  const std::size_t dim = s.dim();
  std::string out(kStoreMagic);
  append_le<std::uint32_t>(out, kStoreVersion);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  append_le<std::uint64_t>(out, s.reps.size());
  for (const auto& r : s.reps) {
    if (r.concat.size() != dim) throw Error("store: case '" + r.case_id + "' has a different dimension");
    append_le<std::uint64_t>(out, fnv1a64(r.case_id));
    for (float f : r.concat) append_le<float>(out, f);
  }
  return out;
}

inline json store_sidecar(const RepresentationStore& s) {
  json ids = json::array();
  for (const auto& r : s.reps) ids.push_back(r.case_id);
  return json{{"ids", ids},
              {"feature_mode", to_string(s.variant.feature_mode)},
              {"use_prompt", s.variant.use_prompt},
              {"template", s.template_name},
              {"backend", to_json(s.backend)}};
}

inline void write_store(const fs::path& path, const RepresentationStore& s) {
  write_file_atomic(path, store_bytes(s));
  write_file_atomic(store_sidecar_path(path), store_sidecar(s).dump(2) + "\n");
}

inline RepresentationStore read_store(const fs::path& path) {
  std::string data = read_file(path);
  json side;
  try {
    side = json::parse(read_file(store_sidecar_path(path)));
  } catch (const json::exception& e) {
    throw Error(store_sidecar_path(path).string() + ": " + e.what());
  }
  if (data.size() < 20 || std::string_view(data).substr(0, 4) != kStoreMagic)
    throw Error(path.string() + ": not a representation store");
  auto version = read_le<std::uint32_t>(data, 4);
  if (version != kStoreVersion) throw Error(path.string() + ": unsupported store version " + std::to_string(version));
  const std::size_t dim = read_le<std::uint32_t>(data, 8);
  const std::size_t count = read_le<std::uint64_t>(data, 12);
  if (data.size() != 20 + count * (8 + 4 * dim)) throw Error(path.string() + ": size does not match header");

  RepresentationStore s;
  s.variant.feature_mode = parse_feature_mode(side.at("feature_mode").get<std::string>());
  s.variant.use_prompt = side.at("use_prompt").get<bool>();
  s.template_name = side.at("template").get<std::string>();
  const json& b = side.at("backend");
  s.backend = {b.at("name"), b.at("version"), b.at("dim"), b.at("max_tokens")};
  auto ids = side.at("ids").get<std::vector<std::string>>();
  if (ids.size() != count) throw Error(path.string() + ": sidecar lists " + std::to_string(ids.size()) + " ids, store has " + std::to_string(count));

  if (count && (dim == 0 || (s.variant.feature_mode == FeatureMode::fact_and_issue && dim % 3)))
    throw Error(path.string() + ": dimension " + std::to_string(dim) + " does not fit the feature mode");
  const std::size_t part = s.variant.feature_mode == FeatureMode::fact_and_issue ? dim / 3 : dim;
  std::size_t off = 20;
  for (std::size_t i = 0; i < count; ++i) {
    if (read_le<std::uint64_t>(data, off) != fnv1a64(ids[i]))
      throw Error(path.string() + ": record " + std::to_string(i) + " does not belong to '" + ids[i] + "'");
    off += 8;
    std::vector<Vector> parts;
    const std::size_t nparts = dim / part;
    for (std::size_t p = 0; p < nparts; ++p) {
      Vector v(part);
      for (std::size_t k = 0; k < part; ++k, off += 4) v[k] = read_le<float>(data, off);
      parts.push_back(std::move(v));
    }
    s.reps.push_back(assemble_representation(ids[i], s.variant.feature_mode, std::move(parts)));
  }
  return s;
}

/// One {"id","vector"} object per line.
inline std::string store_to_jsonl(const RepresentationStore& s) {
  std::string out;
  for (const auto& r : s.reps) out += json{{"id", r.case_id}, {"vector", r.concat}}.dump() + "\n";
  return out;
}

}  // namespace promptcase
