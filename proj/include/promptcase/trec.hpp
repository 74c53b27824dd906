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

// TREC run files: "qid Q0 docid rank score tag", score with six decimals.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "promptcase/retrieval.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

struct RunFile {
  std::string tag = "promptcase";
  std::vector<RankedList> lists;  // written in query-id order
};

inline std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", score);
  return buf;
}

inline std::string write_trec(const RunFile& run) {
  std::vector<const RankedList*> ordered;
  for (const auto& l : run.lists) ordered.push_back(&l);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RankedList* a, const RankedList* b) { return a->query_id < b->query_id; });
  std::string out;
  for (const RankedList* l : ordered) {
    if (l->query_id.empty()) throw Error("run file: ranked list without a query id");
    for (std::size_t i = 0; i < l->entries.size(); ++i) {
      out += l->query_id;
      out += " Q0 ";
      out += l->entries[i].id;
      out += ' ';
      out += std::to_string(i + 1);
      out += ' ';
      out += format_score(l->entries[i].score);
      out += ' ';
      out += run.tag;
      out += '\n';
    }
  }
  return out;
}

/// Parses a run; entries are ordered by the rank column. Ranks must be
/// 1..n without gaps and docids unique per query.
inline RunFile parse_trec(std::string_view content, std::string_view source = "run") {
  RunFile run;
  std::map<std::string, std::vector<std::pair<long, RankedEntry>>> rows;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t n = 0;
  bool have_tag = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, q0, docid, rank, score, tag, extra;
    if (!(fields >> qid >> q0 >> docid >> rank >> score >> tag) || (fields >> extra))
      throw Error(std::string(source) + ":" + std::to_string(n) + ": expected 6 fields");
    RankedEntry e{docid, 0.0};
    long r = 0;
    try {
      std::size_t used = 0;
      r = std::stol(rank, &used);
      if (used != rank.size()) throw std::invalid_argument("rank");
      e.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      throw Error(std::string(source) + ":" + std::to_string(n) + ": bad rank or score");
    }
    if (!have_tag) {
      run.tag = tag;
      have_tag = true;
    }
    rows[qid].emplace_back(r, std::move(e));
  }
  for (auto& [qid, list] : rows) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    RankedList rl{qid, {}, RankStage::bm25};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].first != static_cast<long>(i + 1))
        throw Error(std::string(source) + ": query '" + qid + "' has non-contiguous ranks");
      if (!seen.insert(list[i].second.id).second)
        throw Error(std::string(source) + ": query '" + qid + "' lists '" + list[i].second.id + "' twice");
      rl.entries.push_back(std::move(list[i].second));
    }
    run.lists.push_back(std::move(rl));
  }
  return run;
}

inline RunFile read_trec(const fs::path& path) { return parse_trec(read_file(path), path.string()); }

}  // namespace promptcase
