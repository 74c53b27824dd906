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

// Binary-relevance ranking metrics.
//
// P@k uses k as the denominator even when fewer than k were retrieved.
// F1 counts per query: TP = |top-k & rel|, FP = k - TP, FN = |rel| - TP.
// Micro-F1 pools the counts over queries; Macro-F1 averages per-query F1.
// AP is taken over the full ranking; everything else is cut at k.
// DCG discounts rank i by log2(i + 1).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcase/corpus.hpp"
#include "promptcase/text.hpp"
#include "promptcase/trec.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

using Ranking = std::vector<std::string>;
using RelevantSet = std::set<std::string>;

namespace detail {
inline void require_metric_args(const RelevantSet& relevant, std::size_t k) {
  if (k == 0) throw Error("metric cutoff k must be >= 1");
  if (relevant.empty()) throw Error("metric needs a non-empty relevant set");
}
}  // namespace detail

inline std::size_t hits_at_k(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) hits += relevant.contains(ranked[i]);
  return hits;
}

inline double precision_at_k(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  detail::require_metric_args(relevant, k);
  return static_cast<double>(hits_at_k(ranked, relevant, k)) / static_cast<double>(k);
}

inline double recall_at_k(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  detail::require_metric_args(relevant, k);
  return static_cast<double>(hits_at_k(ranked, relevant, k)) / static_cast<double>(relevant.size());
}

inline double mrr_at_k(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  detail::require_metric_args(relevant, k);
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (relevant.contains(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

inline double average_precision(const Ranking& ranked, const RelevantSet& relevant) {
  detail::require_metric_args(relevant, 1);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (!relevant.contains(ranked[i])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(relevant.size());
}

inline double ndcg_at_k(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  detail::require_metric_args(relevant, k);
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (relevant.contains(ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i) idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  return dcg / idcg;
}

struct F1Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

inline F1Counts f1_counts(const Ranking& ranked, const RelevantSet& relevant, std::size_t k) {
  detail::require_metric_args(relevant, k);
  std::size_t tp = hits_at_k(ranked, relevant, k);
  return {tp, k - tp, relevant.size() - tp};
}

inline double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / denom;
}

struct MicroMacroF1 {
  double micro = 0.0;
  double macro = 0.0;
};

inline MicroMacroF1 micro_macro_f1(const std::vector<F1Counts>& per_query) {
  if (per_query.empty()) throw Error("micro_macro_f1: no queries");
  std::size_t tp = 0, fp = 0, fn = 0;
  double macro = 0.0;
  for (const auto& c : per_query) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    macro += f1_from_counts(c.tp, c.fp, c.fn);
  }
  return {f1_from_counts(tp, fp, fn), macro / static_cast<double>(per_query.size())};
}

// ---------------------------------------------------------------------------
// Reports

struct QueryMetrics {
  std::string query_id;
  double p_at_k = 0, r_at_k = 0, f1 = 0, rr = 0, ap = 0, ndcg = 0;
  F1Counts counts;
  std::size_t num_relevant = 0;
};

struct AggregateMetrics {
  double P = 0, R = 0, MiF1 = 0, MaF1 = 0, MRR = 0, MAP = 0, NDCG = 0;
};

struct MetricsReport {
  std::size_t k = 5;
  std::vector<QueryMetrics> per_query;  // query-id order
  AggregateMetrics aggregate;
  double mean_relevant = 0;  // over evaluated queries
  std::vector<std::string> judged_but_not_run;
};

inline QueryMetrics query_metrics(const std::string& qid, const Ranking& ranked, const RelevantSet& relevant,
                                  std::size_t k) {
  QueryMetrics m;
  m.query_id = qid;
  m.p_at_k = precision_at_k(ranked, relevant, k);
  m.r_at_k = recall_at_k(ranked, relevant, k);
  m.counts = f1_counts(ranked, relevant, k);
  m.f1 = f1_from_counts(m.counts.tp, m.counts.fp, m.counts.fn);
  m.rr = mrr_at_k(ranked, relevant, k);
  m.ap = average_precision(ranked, relevant);
  m.ndcg = ndcg_at_k(ranked, relevant, k);
  m.num_relevant = relevant.size();
  return m;
}

inline MetricsReport evaluate_run(const RunFile& run, const RelevanceJudgments& judgments, std::size_t k = 5) {
  if (run.lists.empty()) throw Error("evaluate: run has no queries");
  std::map<std::string, const RankedList*> by_query;
  for (const auto& l : run.lists)
    if (!by_query.emplace(l.query_id, &l).second) throw Error("evaluate: query '" + l.query_id + "' appears twice in the run");
  MetricsReport report;
  report.k = k;
  std::vector<F1Counts> counts;
  double relevant_total = 0;
  for (const auto& [qid, list] : by_query) {
    auto it = judgments.judgments.find(qid);
    if (it == judgments.judgments.end()) throw Error("evaluate: run query '" + qid + "' has no judgments");
    Ranking ranked;
    for (const auto& e : list->entries) ranked.push_back(e.id);
    report.per_query.push_back(query_metrics(qid, ranked, it->second, k));
    counts.push_back(report.per_query.back().counts);
    relevant_total += static_cast<double>(it->second.size());
  }
  for (const auto& [qid, _] : judgments.judgments)
    if (!by_query.contains(qid)) report.judged_but_not_run.push_back(qid);

  AggregateMetrics& a = report.aggregate;
  for (const auto& m : report.per_query) {
    a.P += m.p_at_k;
    a.R += m.r_at_k;
    a.MRR += m.rr;
    a.MAP += m.ap;
    a.NDCG += m.ndcg;
  }
  const double n = static_cast<double>(report.per_query.size());
  a.P /= n;
  a.R /= n;
  a.MRR /= n;
  a.MAP /= n;
  a.NDCG /= n;
  MicroMacroF1 f = micro_macro_f1(counts);
  a.MiF1 = f.micro;
  a.MaF1 = f.macro;
  report.mean_relevant = relevant_total / n;
  return report;
}

/// k / (mean relevant per query), the recall ceiling the report checks.
inline double recall_bound(const MetricsReport& r) { return static_cast<double>(r.k) / r.mean_relevant; }
inline bool recall_bound_holds(const MetricsReport& r) { return r.aggregate.R <= recall_bound(r) + 1e-9; }

// ---------------------------------------------------------------------------
// Table output

inline std::vector<std::string> metric_columns(std::size_t k) {
  const std::string K = std::to_string(k);
  return {"P@" + K, "R@" + K, "Mi-F1", "Ma-F1", "MRR@" + K, "MAP", "NDCG@" + K};
}

inline std::vector<double> metric_values(const AggregateMetrics& a) {
  return {a.P, a.R, a.MiF1, a.MaF1, a.MRR, a.MAP, a.NDCG};
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

/// A labelled row; a missing aggregate is a failed cell.
struct TableRow {
  std::vector<std::string> labels;
  std::optional<AggregateMetrics> metrics;
  std::string error;
};

inline std::string format_csv(const std::vector<std::string>& label_columns, const std::vector<TableRow>& rows,
                              std::size_t k) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  std::vector<std::string> header = label_columns;
  for (auto& c : metric_columns(k)) header.push_back(c);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + quote(header[i]);
  out += "\n";
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& l : row.labels) cells.push_back(quote(l));
    if (row.metrics) {
      for (double v : metric_values(*row.metrics)) cells.push_back(percent(v));
    } else {
      for (std::size_t i = 0; i < 7; ++i) cells.emplace_back("FAILED");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  }
  return out;
}

inline std::string format_text_table(const std::vector<std::string>& label_columns, const std::vector<TableRow>& rows,
                                     std::size_t k) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = label_columns;
  for (auto& c : metric_columns(k)) header.push_back(c);
  grid.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> cells = row.labels;
    if (row.metrics) {
      for (double v : metric_values(*row.metrics)) cells.push_back(percent(v));
    } else {
      for (std::size_t i = 0; i < 7; ++i) cells.emplace_back("FAILED");
    }
    grid.push_back(cells);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : grid)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], text::count_code_points(r[i]));
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t pad = width[i] - text::count_code_points(r[i]);
      if (i < label_columns.size()) {
        out += r[i] + std::string(pad, ' ');
      } else {
        out += std::string(pad, ' ') + r[i];
      }
      if (i + 1 < r.size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  emit(grid[0]);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < grid.size(); ++i) emit(grid[i]);
  return out;
}

inline nlohmann::json to_json(const AggregateMetrics& a) {
  return {{"P", a.P}, {"R", a.R}, {"MiF1", a.MiF1}, {"MaF1", a.MaF1}, {"MRR", a.MRR}, {"MAP", a.MAP}, {"NDCG", a.NDCG}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : r.per_query)
    per.push_back({{"query_id", m.query_id},
                   {"p_at_k", m.p_at_k},
                   {"r_at_k", m.r_at_k},
                   {"f1", m.f1},
                   {"rr", m.rr},
                   {"ap", m.ap},
                   {"ndcg", m.ndcg},
                   {"tp", m.counts.tp},
                   {"fp", m.counts.fp},
                   {"fn", m.counts.fn},
                   {"num_relevant", m.num_relevant}});
  return {{"k", r.k},
          {"num_queries", r.per_query.size()},
          {"aggregate", to_json(r.aggregate)},
          {"per_query", per},
          {"mean_relevant", r.mean_relevant},
          {"recall_bound", recall_bound(r)},
          {"recall_bound_holds", recall_bound_holds(r)},
          {"judged_but_not_run", r.judged_but_not_run}};
}

}  // namespace promptcase
