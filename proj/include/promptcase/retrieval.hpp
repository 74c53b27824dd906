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

// Lexical, dense and two-stage ranking.

#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "promptcase/bm25.hpp"
#include "promptcase/encoding.hpp"
#include "promptcase/extraction.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

enum class RankStage { bm25, dense, two_stage };

inline std::string_view to_string(RankStage s) {
  switch (s) {
    case RankStage::bm25: return "bm25";
    case RankStage::dense: return "dense";
    case RankStage::two_stage: return "two_stage";
  }
  return "?";
}

struct RankedEntry {
  std::string id;
  double score = 0.0;
  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;
  RankStage stage = RankStage::bm25;
  friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Score descending, then id ascending.
inline bool rank_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

inline void sort_and_cut(std::vector<RankedEntry>& entries, std::size_t k) {
  if (k < entries.size()) {
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), rank_before);
    entries.resize(k);
  } else {
    std::sort(entries.begin(), entries.end(), rank_before);
  }
}

// ---------------------------------------------------------------------------
// Lexical

inline RankedList bm25_retrieve(const Bm25Index& index, const std::vector<std::string>& query_terms,
                                const std::vector<std::string>& pool, std::size_t k, std::string query_id = {}) {
  if (pool.empty()) throw Error("bm25_retrieve: empty candidate pool" + (query_id.empty() ? "" : " for '" + query_id + "'"));
  std::vector<double> all = index.score_all(query_terms);
  RankedList out{std::move(query_id), {}, RankStage::bm25};
  out.entries.reserve(pool.size());
  for (const auto& id : pool) out.entries.push_back({id, all[index.slot(id)]});
  sort_and_cut(out.entries, k);
  return out;
}

inline RankedList bm25_retrieve(const Bm25Index& index, const Tokenizer& tokenizer, std::string_view query_text,
                                const std::vector<std::string>& pool, std::size_t k, std::string query_id = {}) {
  return bm25_retrieve(index, tokenizer.tokenize(query_text), pool, k, std::move(query_id));
}

// ---------------------------------------------------------------------------
// Dense

inline RankedList dense_retrieve(const CaseRepresentation& query, const std::vector<const CaseRepresentation*>& candidates,
                                 std::size_t k) {
  RankedList out{query.case_id, {}, RankStage::dense};
  out.entries.reserve(candidates.size());
  for (const CaseRepresentation* c : candidates) out.entries.push_back({c->case_id, similarity(query, *c).score});
  sort_and_cut(out.entries, k);
  return out;
}

inline RankedList dense_retrieve(const CaseRepresentation& query, const std::vector<CaseRepresentation>& candidates,
                                 std::size_t k) {
  std::vector<const CaseRepresentation*> ptrs;
  ptrs.reserve(candidates.size());
  for (const auto& c : candidates) ptrs.push_back(&c);
  return dense_retrieve(query, ptrs, k);
}

// ---------------------------------------------------------------------------
// Two-stage

/// Looks up a representation by case id; nullptr when the case has none.
using RepresentationLookup = std::function<const CaseRepresentation*(const std::string&)>;

/// BM25 picks `depth` candidates; those with a representation are reranked
/// by dot product. Candidates without one (and every candidate, if the query
/// has none) follow in BM25 order with scores strictly below the reranked
/// block.
inline RankedList two_stage_retrieve(const Bm25Index& index, const std::vector<std::string>& query_terms,
                                     const std::vector<std::string>& pool, const CaseRepresentation* query_rep,
                                     const RepresentationLookup& reps, std::size_t depth, std::size_t k_final,
                                     std::string query_id = {}) {
  if (k_final > depth)
    throw ConfigError("two-stage: final depth " + std::to_string(k_final) + " exceeds first-stage depth " +
                      std::to_string(depth));
  RankedList first = bm25_retrieve(index, query_terms, pool, depth, query_id);
  std::vector<RankedEntry> scored;
  std::vector<std::string> unscored;
  for (const auto& e : first.entries) {
    const CaseRepresentation* rep = query_rep ? reps(e.id) : nullptr;
    if (rep)
      scored.push_back({e.id, similarity(*query_rep, *rep).score});
    else
      unscored.push_back(e.id);
  }
  std::sort(scored.begin(), scored.end(), rank_before);
  double floor = scored.empty() ? 0.0 : scored.back().score;
  for (std::size_t i = 0; i < unscored.size(); ++i) scored.push_back({unscored[i], floor - static_cast<double>(i + 1)});
  if (scored.size() > k_final) scored.resize(k_final);
  return {std::move(query_id), std::move(scored), RankStage::two_stage};
}

// ---------------------------------------------------------------------------
// Lexical input with prompt reformulation

/// raw, fact prefix, fact, issue prefix, issue joined by single spaces
/// (nothing for Chinese); empty parts are skipped.
inline std::string bm25_promptcase_text(std::string_view raw_text, const LegalFeatures& f, const PromptTemplate& t) {
  const std::string_view sep = f.language == Language::en ? " " : "";
  std::string out;
  for (std::string_view part : {raw_text, std::string_view(t.fact_prefix), std::string_view(f.fact_text),
                                std::string_view(t.issue_prefix), std::string_view(f.issue_text)}) {
    if (part.empty()) continue;
    if (!out.empty()) out += sep;
    out += part;
  }
  return out;
}

/// Text handed to the lexical index, remembering whether features were
/// already appended.
struct LexicalDocument {
  std::string id;
  std::string text;
  bool reformulated = false;
};

inline LexicalDocument reformulate(const LexicalDocument& doc, const LegalFeatures& f, const PromptTemplate& t) {
  if (doc.reformulated) throw Error("document '" + doc.id + "' has already been reformulated");
  return {doc.id, bm25_promptcase_text(doc.text, f, t), true};
}

}  // namespace promptcase
