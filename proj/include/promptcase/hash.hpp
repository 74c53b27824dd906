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

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace promptcase {

inline constexpr std::uint64_t kFnv64Offset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnv64Prime = 0x100000001b3ULL;
inline constexpr std::uint32_t kFnv32Offset = 0x811c9dc5U;
inline constexpr std::uint32_t kFnv32Prime = 0x01000193U;

/// FNV-1a 64-bit over raw bytes. `state` lets callers chain several buffers
/// or start from a seeded basis.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnv64Offset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnv64Prime;
  }
  return state;
}

constexpr std::uint32_t fnv1a32(std::string_view bytes, std::uint32_t state = kFnv32Offset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnv32Prime;
  }
  return state;
}

/// Seeded token hash: FNV-1a 64 whose initial state is the offset basis
/// XOR seed. Seed 0 gives plain FNV-1a.
constexpr std::uint64_t seeded_hash(std::string_view token, std::uint64_t seed) {
  return fnv1a64(token, kFnv64Offset ^ seed);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

static_assert(fnv1a64("") == kFnv64Offset);
static_assert(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

}  // namespace promptcase
