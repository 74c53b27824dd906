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

// Okapi BM25 over an in-memory inverted index.
//
//   score(q, d) = sum over query tokens t of
//                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
//   idf(t)      = ln((N - df + 0.5) / (df + 0.5) + 1)
//
// Repeated query tokens count once per occurrence.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "promptcase/tokenizer.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
  std::uint32_t doc = 0;  // index into doc_ids
  std::uint32_t tf = 0;
  friend bool operator==(const Posting&, const Posting&) = default;
};

class Bm25Index {
 public:
  Bm25Index() = default;

  /// Builds from pre-tokenized documents. Ids must be unique.
  static Bm25Index from_terms(const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
                              Bm25Params params = {}) {
    if (docs.empty()) throw Error("bm25: cannot index an empty collection");
    Bm25Index ix;
    ix.params_ = params;
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].first < docs[b].first; });
    std::uint64_t total = 0;
    for (std::size_t i : order) {
      const auto& [id, terms] = docs[i];
      if (ix.slot_.contains(id)) throw Error("bm25: duplicate document id '" + id + "'");
      auto doc = static_cast<std::uint32_t>(ix.doc_ids_.size());
      ix.slot_[id] = doc;
      ix.doc_ids_.push_back(id);
      ix.doc_len_.push_back(static_cast<std::uint32_t>(terms.size()));
      total += terms.size();
      std::map<std::string_view, std::uint32_t> counts;
      for (const auto& t : terms) ++counts[t];
      for (const auto& [t, c] : counts) ix.postings_[std::string(t)].push_back({doc, c});
    }
    ix.avgdl_ = static_cast<double>(total) / static_cast<double>(ix.doc_ids_.size());
    return ix;
  }

  static Bm25Index build(const std::vector<std::pair<std::string, std::string>>& docs, const Tokenizer& tokenizer,
                         Bm25Params params = {}, unsigned jobs = 1) {
    std::vector<std::pair<std::string, std::vector<std::string>>> tokenized(docs.size());
    parallel_for(docs.size(), jobs, [&](std::size_t i) {
      tokenized[i] = {docs[i].first, tokenizer.tokenize(docs[i].second)};
    });
    return from_terms(tokenized, params);
  }

  const Bm25Params& params() const { return params_; }
  std::size_t num_docs() const { return doc_ids_.size(); }
  double avgdl() const { return avgdl_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  bool contains(const std::string& id) const { return slot_.contains(id); }

  std::size_t doc_len(const std::string& id) const { return doc_len_[slot(id)]; }
  std::size_t df(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
  }
  std::size_t tf(const std::string& term, const std::string& id) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0;
    std::uint32_t doc = slot(id);
    auto p = std::lower_bound(it->second.begin(), it->second.end(), doc,
                              [](const Posting& x, std::uint32_t d) { return x.doc < d; });
    return p != it->second.end() && p->doc == doc ? p->tf : 0;
  }

  double idf(const std::string& term) const {
    const double n = static_cast<double>(num_docs());
    const double d = static_cast<double>(df(term));
    return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
  }

  /// Contribution of one occurrence of `term` in the query to document `doc`.
  double term_weight(double idf, std::uint32_t tf, std::uint32_t doc) const {
    if (tf == 0) return 0.0;
    const double dl = doc_len_[doc];
    const double norm = avgdl_ > 0 ? dl / avgdl_ : 0.0;
    const double t = tf;
    return idf * t * (params_.k1 + 1.0) / (t + params_.k1 * (1.0 - params_.b + params_.b * norm));
  }

  /// Per-document scores for every indexed document, in doc_ids() order.
  /// Terms are visited in sorted order, weighted by query multiplicity.
  std::vector<double> score_all(const std::vector<std::string>& query_terms) const {
    std::vector<double> acc(num_docs(), 0.0);
    for (const auto& [term, qtf] : query_counts(query_terms)) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      const double w = idf(term);
      for (const Posting& p : it->second) acc[p.doc] += qtf * term_weight(w, p.tf, p.doc);
    }
    return acc;
  }

  double score(const std::vector<std::string>& query_terms, const std::string& id) const {
    std::uint32_t doc = slot(id);
    double s = 0.0;
    for (const auto& [term, qtf] : query_counts(query_terms)) {
      auto t = static_cast<std::uint32_t>(tf(term, id));
      if (t) s += qtf * term_weight(idf(term), t, doc);
    }
    return s;
  }

  std::uint32_t slot(const std::string& id) const {
    auto it = slot_.find(id);
    if (it == slot_.end()) throw Error("bm25: unknown document '" + id + "'");
    return it->second;
  }

  // Snapshot: "PCBM" | u32 version | f64 k1 | f64 b | u64 N
  //           N x (u32 len, id bytes, u32 doc_len)
  //           u64 T | T x (u32 len, term bytes, u32 n, n x (u32 doc, u32 tf))
  std::string snapshot() const {
    std::string out("PCBM");
    append_le<std::uint32_t>(out, 1);
    append_le<double>(out, params_.k1);
    append_le<double>(out, params_.b);
    append_le<std::uint64_t>(out, doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
      append_string(out, doc_ids_[i]);
      append_le<std::uint32_t>(out, doc_len_[i]);
    }
    append_le<std::uint64_t>(out, postings_.size());
    for (const auto& [term, list] : postings_) {
      append_string(out, term);
      append_le<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
      for (const auto& p : list) {
        append_le<std::uint32_t>(out, p.doc);
        append_le<std::uint32_t>(out, p.tf);
      }
    }
    return out;
  }

  static Bm25Index from_snapshot(std::string_view data) {
    if (data.substr(0, 4) != "PCBM") throw Error("bm25 snapshot: bad magic");
    std::size_t off = 4;
    if (read_le<std::uint32_t>(data, off) != 1) throw Error("bm25 snapshot: unsupported version");
    off += 4;
    Bm25Index ix;
    ix.params_.k1 = read_le<double>(data, off);
    ix.params_.b = read_le<double>(data, off + 8);
    off += 16;
    auto n = read_le<std::uint64_t>(data, off);
    off += 8;
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string id = read_string(data, off);
      std::uint32_t len = read_le<std::uint32_t>(data, off);
      off += 4;
      ix.slot_[id] = static_cast<std::uint32_t>(i);
      ix.doc_ids_.push_back(std::move(id));
      ix.doc_len_.push_back(len);
      total += len;
    }
    if (n == 0) throw Error("bm25 snapshot: no documents");
    ix.avgdl_ = static_cast<double>(total) / static_cast<double>(n);
    auto terms = read_le<std::uint64_t>(data, off);
    off += 8;
    for (std::uint64_t t = 0; t < terms; ++t) {
      std::string term = read_string(data, off);
      auto count = read_le<std::uint32_t>(data, off);
      off += 4;
      auto& list = ix.postings_[term];
      for (std::uint32_t k = 0; k < count; ++k, off += 8) {
        Posting p{read_le<std::uint32_t>(data, off), read_le<std::uint32_t>(data, off + 4)};
        if (p.doc >= n) throw Error("bm25 snapshot: posting refers to missing document");
        list.push_back(p);
      }
    }
    if (off != data.size()) throw Error("bm25 snapshot: trailing bytes");
    return ix;
  }

  /// Human-readable dump for debugging.
  nlohmann::json debug_json() const {
    nlohmann::json j;
    j["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    j["N"] = num_docs();
    j["avgdl"] = avgdl_;
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) j["doc_len"][doc_ids_[i]] = doc_len_[i];
    for (const auto& [term, list] : postings_) {
      j["df"][term] = list.size();
      for (const auto& p : list) j["tf"][term][doc_ids_[p.doc]] = p.tf;
    }
    return j;
  }

  friend bool operator==(const Bm25Index& a, const Bm25Index& b) {
    return a.params_ == b.params_ && a.doc_ids_ == b.doc_ids_ && a.doc_len_ == b.doc_len_ && a.postings_ == b.postings_;
  }

 private:
  static std::map<std::string, std::uint32_t> query_counts(const std::vector<std::string>& terms) {
    std::map<std::string, std::uint32_t> counts;
    for (const auto& t : terms) ++counts[t];
    return counts;
  }

  static void append_string(std::string& out, std::string_view s) {
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
  }

  static std::string read_string(std::string_view data, std::size_t& off) {
    auto len = read_le<std::uint32_t>(data, off);
    off += 4;
    if (off + len > data.size()) throw Error("truncated binary record");
    std::string s(data.substr(off, len));
    off += len;
    return s;
  }

  Bm25Params params_;
  std::vector<std::string> doc_ids_;  // sorted
  std::vector<std::uint32_t> doc_len_;
  std::unordered_map<std::string, std::uint32_t> slot_;
  std::map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
};

}  // namespace promptcase
