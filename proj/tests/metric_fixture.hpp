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

// Ten-query ranking fixture with aggregates computed independently in
// tests/oracles/metrics_fixture.py (k = 5).

#pragma once

#include "promptcase/eval.hpp"
#include "promptcase/trec.hpp"

namespace promptcase::testing {

struct MetricCase {
  const char* qid;
  Ranking ranking;
  RelevantSet relevant;
};

inline const std::vector<MetricCase>& metric_fixture() {
  static const std::vector<MetricCase> cases = {
      {"q01", {"a", "b", "c", "d", "e", "f"}, {"a", "c"}},
      {"q02", {"x", "y", "z"}, {"y", "w"}},
      {"q03", {"m1", "m2", "m3", "m4", "m5", "m6", "m7"}, {"m7"}},
      {"q04", {"r1", "r2", "r3", "r4", "r5"}, {"r1", "r2", "r3", "r4", "r5", "r6", "r7"}},
      {"q05", {"n1", "n2", "n3", "n4", "n5"}, {"zz"}},
      {"q06", {"s2", "s1", "s3", "s4", "s5", "s6", "s7", "s8"}, {"s1", "s8"}},
      {"q07", {"t1"}, {"t1"}},
      {"q08", {"u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8", "u9", "u10"}, {"u3", "u5", "u9", "u10"}},
      {"q09", {"v1", "v2", "v3", "v4", "v5", "v6"}, {"v5", "v6", "v7"}},
      {"q10", {"w1", "w2", "w3", "w4", "w5"}, {"w2", "w4"}},
  };
  return cases;
}

inline constexpr std::size_t kMetricFixtureK = 5;

inline AggregateMetrics metric_fixture_expected() {
  AggregateMetrics a;
  a.P = 0.29999999999999999;
  a.R = 0.55476190476190479;
  a.MiF1 = 0.40000000000000002;
  a.MaF1 = 0.35753968253968249;
  a.MRR = 0.5033333333333333;
  a.MAP = 0.43599206349206343;
  a.NDCG = 0.48720987691856121;
  return a;
}

/// The fixture as a run (descending synthetic scores) plus judgments.
inline std::pair<RunFile, RelevanceJudgments> metric_fixture_run() {
  RunFile run;
  RelevanceJudgments judgments;
  for (const auto& c : metric_fixture()) {
    RankedList list{c.qid, {}, RankStage::dense};
    for (std::size_t i = 0; i < c.ranking.size(); ++i)
      list.entries.push_back({c.ranking[i], 100.0 - static_cast<double>(i)});
    run.lists.push_back(std::move(list));
    judgments.judgments[c.qid] = c.relevant;
  }
  return {run, judgments};
}

}  // namespace promptcase::testing
