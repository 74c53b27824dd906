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

// Acceptance suite. Each criterion prints one line:
//   PASS <name>: <detail>     or     FAIL <name>: <detail>
// Usage: acceptance [--criterion NAME]...   (no arguments runs every criterion)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metric_fixture.hpp"
#include "promptcase/pipeline.hpp"
#include "test_support.hpp"

namespace pc = promptcase;
using pc::fs::path;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Metric values on the ten-query fixture match an independent oracle to 1e-9.
Verdict metric_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  auto [run, judgments] = pc::testing::metric_fixture_run();
  pc::MetricsReport r = pc::evaluate_run(run, judgments, pc::testing::kMetricFixtureK);
  auto got = pc::metric_values(r.aggregate);
  auto want = pc::metric_values(pc::testing::metric_fixture_expected());
  auto names = pc::metric_columns(pc::testing::kMetricFixtureK);
  double worst = 0.0;
  std::string bad;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double err = std::abs(got[i] - want[i]);
    worst = std::max(worst, err);
    if (err > 1e-9) bad += " " + names[i];
  }
  double secs = seconds_since(t0);
  if (!bad.empty()) return {false, "mismatch in" + bad};
  if (secs >= 1.0) return {false, "took " + fmt("%.3f", secs) + " s"};
  return {true, "10 queries, max error " + fmt("%.2e", worst) + ", " + fmt("%.3f", secs) + " s"};
}

// BM25 scores on random small corpora agree with a direct formula, and
// ranking agrees with a brute-force sort.
Verdict bm25_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  const int corpora = 250;
  double worst = 0.0;
  for (int c = 0; c < corpora; ++c) {
    const std::size_t ndocs = 1 + rng() % 10;
    const std::size_t vocab = 2 + rng() % 6;
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    for (std::size_t d = 0; d < ndocs; ++d) {
      std::vector<std::string> terms;
      for (std::size_t n = rng() % 9; n > 0; --n) terms.push_back("w" + std::to_string(rng() % vocab));
      docs.push_back({"doc" + std::to_string(rng() % 1000) + "_" + std::to_string(d), terms});
    }
    std::vector<std::string> query;
    for (std::size_t n = 1 + rng() % 5; n > 0; --n) query.push_back("w" + std::to_string(rng() % (vocab + 1)));
    pc::Bm25Params params{0.5 + static_cast<double>(rng() % 150) / 100.0, static_cast<double>(rng() % 101) / 100.0};
    pc::Bm25Index ix = pc::Bm25Index::from_terms(docs, params);

    // Direct formula.
    const double N = static_cast<double>(ndocs);
    double total = 0;
    for (const auto& [id, t] : docs) total += static_cast<double>(t.size());
    const double avgdl = total / N;
    std::vector<pc::RankedEntry> brute;
    std::vector<std::string> pool;
    for (const auto& [id, terms] : docs) {
      double s = 0.0;
      for (const auto& q : query) {
        double tf = static_cast<double>(std::count(terms.begin(), terms.end(), q));
        if (tf == 0) continue;
        double df = 0;
        for (const auto& [_, other] : docs) df += std::find(other.begin(), other.end(), q) != other.end();
        double idf = std::log((N - df + 0.5) / (df + 0.5) + 1.0);
        double norm = avgdl > 0 ? static_cast<double>(terms.size()) / avgdl : 0.0;
        s += idf * tf * (params.k1 + 1) / (tf + params.k1 * (1 - params.b + params.b * norm));
      }
      double got = ix.score(query, id);
      double err = std::abs(got - s);
      worst = std::max(worst, err);
      if (err > 1e-9) return {false, "corpus " + std::to_string(c) + " doc " + id + ": got " + fmt("%.17g", got) +
                                         ", expected " + fmt("%.17g", s)};
      brute.push_back({id, got});
      pool.push_back(id);
    }
    std::sort(brute.begin(), brute.end(), [](const pc::RankedEntry& a, const pc::RankedEntry& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    pc::RankedList ranked = pc::bm25_retrieve(ix, query, pool, pool.size());
    if (ranked.entries != brute) return {false, "corpus " + std::to_string(c) + ": ranking differs from brute force"};
  }
  double secs = seconds_since(t0);
  if (secs >= 10.0) return {false, "took " + fmt("%.2f", secs) + " s"};
  return {true, std::to_string(corpora) + " corpora, max error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// Extraction goldens

class StubSummarizer final : public pc::Summarizer {
 public:
  explicit StubSummarizer(std::optional<std::string> reply) : reply_(std::move(reply)) {}
  std::optional<std::string> summarize(std::string_view, std::string_view) const override { return reply_; }

 private:
  std::optional<std::string> reply_;
};

struct Golden {
  std::string name;
  pc::CaseDocument doc;
  const pc::Summarizer* summarizer;
  std::string fact;
  pc::FactProvenance fact_provenance;
  std::string issue;
  pc::IssueProvenance issue_provenance;
};

pc::CaseDocument en_doc(std::string_view raw) {
  return pc::make_document("en", pc::Jurisdiction::common_law, pc::Language::en, raw, true);
}
pc::CaseDocument zh_doc(std::string_view raw) {
  return pc::make_document("zh", pc::Jurisdiction::civil_law, pc::Language::zh, raw, false);
}

Verdict extraction_golden() {
  using FP = pc::FactProvenance;
  using IP = pc::IssueProvenance;
  static const StubSummarizer summary_ok(std::string("The tenant owed six months of rent."));
  static const StubSummarizer summary_down(std::nullopt);
  const pc::ChargeLexicon lexicon = pc::ChargeLexicon::load(path(PROMPTCASE_ASSET_DIR) / "charges_zh.txt");
  const path data = pc::testing::data_dir();

  std::string long_body;
  std::string long_fact;
  for (int i = 1; i <= 60; ++i) {
    long_body += (i > 1 ? " w" : "w") + std::to_string(i);
    if (i <= 50) long_fact += (i > 1 ? " w" : "w") + std::to_string(i);
  }
  const std::string lecard_q1 = pc::json::parse(pc::read_lines(data / "lecard/queries.jsonl").at(0))["text"];

  std::vector<Golden> cases = {
      {"common law: background and one placeholder sentence",
       en_doc("Background\n\nThe tenant failed to pay rent for six months.\n\nAnalysis\n\n"
              "The landlord relied on FRAGMENT_SUPPRESSED. Rent was owed."),
       nullptr, "The tenant failed to pay rent for six months.", FP::lead_fallback,
       "The landlord relied on FRAGMENT_SUPPRESSED.", IP::placeholder_sentences},
      {"common law: four placeholders in three sentences",
       en_doc("Facts\n\nThe claimant was injured at work.\n\nDiscussion\n\nSee FRAGMENT_SUPPRESSED. The duty of care "
              "follows FRAGMENT_SUPPRESSED and FRAGMENT_SUPPRESSED. Costs are awarded. Compare FRAGMENT_SUPPRESSED at "
              "para. 4."),
       nullptr, "The claimant was injured at work.", FP::lead_fallback,
       "See FRAGMENT_SUPPRESSED. The duty of care follows FRAGMENT_SUPPRESSED and FRAGMENT_SUPPRESSED. Compare "
       "FRAGMENT_SUPPRESSED at para. 4.",
       IP::placeholder_sentences},
      {"common law: four placeholder sentences in order",
       en_doc("Background\n\nThe applicant sought refugee status.\n\nAnalysis\n\nThe test is in FRAGMENT_SUPPRESSED. "
              "The officer erred. Deference follows FRAGMENT_SUPPRESSED. Reasons must be adequate per "
              "FRAGMENT_SUPPRESSED. No costs. The remedy is set out in FRAGMENT_SUPPRESSED."),
       nullptr, "The applicant sought refugee status.", FP::lead_fallback,
       "The test is in FRAGMENT_SUPPRESSED. Deference follows FRAGMENT_SUPPRESSED. Reasons must be adequate per "
       "FRAGMENT_SUPPRESSED. The remedy is set out in FRAGMENT_SUPPRESSED.",
       IP::placeholder_sentences},
      {"common law: no headings, no placeholder",
       en_doc("The appellant was convicted of fraud. He appealed."), nullptr,
       "The appellant was convicted of fraud. He appealed.", FP::lead_fallback, "", IP::empty},
      {"common law: lead capped at fifty tokens", en_doc("Background\n\n" + long_body), nullptr, long_fact,
       FP::lead_fallback, "", IP::empty},
      {"common law: French paragraph removed",
       en_doc("Background\n\nThe parties settled the dispute.\n\nLes parties ont réglé le différend dans cette "
              "affaire et la Cour a rendu une décision.\n\nAnalysis\n\nThe settlement binds under FRAGMENT_SUPPRESSED."),
       nullptr, "The parties settled the dispute.", FP::lead_fallback, "The settlement binds under FRAGMENT_SUPPRESSED.",
       IP::placeholder_sentences},
      {"common law: repeated placeholder sentence kept once",
       en_doc("Background\n\nA lease was signed.\n\nAnalysis\n\nSee FRAGMENT_SUPPRESSED. Then more. See "
              "FRAGMENT_SUPPRESSED."),
       nullptr, "A lease was signed.", FP::lead_fallback, "See FRAGMENT_SUPPRESSED.", IP::placeholder_sentences},
      {"common law: numbered heading",
       en_doc("Case 7\n\nII. The Facts\n\nA contract was signed in 2010.\n\nIII. Analysis\n\nIt is governed by "
              "FRAGMENT_SUPPRESSED."),
       nullptr, "A contract was signed in 2010.", FP::lead_fallback, "It is governed by FRAGMENT_SUPPRESSED.",
       IP::placeholder_sentences},
      {"common law: abbreviation inside issue sentence",
       en_doc("Background\n\nThe insurer refused to pay.\n\nAnalysis\n\nIn Smith v. Jones the court applied "
              "FRAGMENT_SUPPRESSED. Nothing else."),
       nullptr, "The insurer refused to pay.", FP::lead_fallback,
       "In Smith v. Jones the court applied FRAGMENT_SUPPRESSED.", IP::placeholder_sentences},
      {"common law: summarizer output",
       en_doc("Background\n\nThe tenant failed to pay rent for six months.\n\nAnalysis\n\nSee FRAGMENT_SUPPRESSED."),
       &summary_ok, "The tenant owed six months of rent.", FP::summarizer, "See FRAGMENT_SUPPRESSED.",
       IP::placeholder_sentences},
      {"common law: summarizer unavailable",
       en_doc("Background\n\nThe tenant failed to pay rent.\n\nAnalysis\n\nSee FRAGMENT_SUPPRESSED."), &summary_down,
       "The tenant failed to pay rent.", FP::lead_fallback, "See FRAGMENT_SUPPRESSED.", IP::placeholder_sentences},
      {"common law: fixture case 001",
       pc::make_document("001", pc::Jurisdiction::common_law, pc::Language::en,
                         pc::read_file(data / "coliee/cases/001.txt"), true),
       nullptr,
       "The applicant took a car from a parking lot without consent and sold it. The hearing took place in 2000. "
       "Counsel appeared for both parties.",
       FP::lead_fallback, "Whether the taking of the vehicle amounted to theft under the statute, see FRAGMENT_SUPPRESSED.",
       IP::placeholder_sentences},
      {"civil law: fixture query q1", zh_doc(lecard_q1), nullptr,
       "被告人张某于2019年5月在某小区内秘密窃取他人电动车一辆，价值人民币三千元。案发后被告人如实供述。",
       FP::marker_section, "盗窃罪", IP::charge_match},
      {"civil law: fraud",
       zh_doc("公诉机关指控：被告人李某涉嫌诈骗罪。\n\n经审理查明：被告人李某虚构投资项目，骗取被害人人民币五万元。"
              "\n\n本院认为，被告人李某的行为已构成诈骗罪。"),
       nullptr, "被告人李某虚构投资项目，骗取被害人人民币五万元。", FP::marker_section, "诈骗罪", IP::charge_match},
      {"civil law: longest charge wins",
       zh_doc("经审理查明：被告人以非法占有为目的，骗取集资款。本院认为，被告人犯集资诈骗罪。"), nullptr,
       "被告人以非法占有为目的，骗取集资款。", FP::marker_section, "集资诈骗罪", IP::charge_match},
      {"civil law: charges in text order",
       zh_doc("经审理查明，被告人持刀抢劫并致人受伤。本院认为，被告人犯抢劫罪、故意伤害罪。"), nullptr,
       "被告人持刀抢劫并致人受伤。", FP::marker_section, "抢劫罪、故意伤害罪", IP::charge_match},
      {"civil law: evidence sentence closes facts",
       zh_doc("经审理查明：甲驾车撞伤乙。上述事实，有证据证实。本院认为，甲犯交通肇事罪。"), nullptr,
       "甲驾车撞伤乙。", FP::marker_section, "交通肇事罪", IP::charge_match},
      {"civil law: no marker", zh_doc("被告人王某犯盗窃罪，判处拘役三个月。"), nullptr,
       "被告人王某犯盗窃罪，判处拘役三个月。", FP::lead_fallback, "盗窃罪", IP::charge_match},
      {"civil law: no charge", zh_doc("经审理查明：双方因合同发生纠纷。本院认为，应予调解。"), nullptr,
       "双方因合同发生纠纷。", FP::marker_section, "", IP::empty},
      {"civil law: summary sentence closes facts",
       zh_doc("经审理查明，被告人醉酒驾驶机动车。综上，被告人犯危险驾驶罪。"), nullptr, "被告人醉酒驾驶机动车。",
       FP::marker_section, "危险驾驶罪", IP::charge_match},
      {"civil law: repeated charge emitted once", zh_doc("本院认为，被告人犯盗窃罪。判决如下：被告人犯盗窃罪。"),
       nullptr, "本院认为，被告人犯盗窃罪。判决如下：被告人犯盗窃罪。", FP::lead_fallback, "盗窃罪", IP::charge_match},
      {"civil law: facts end at the order section",
       zh_doc("公诉机关指控：甲盗窃。经审理查明：甲盗窃手机一部。判决如下：甲犯盗窃罪。"), nullptr, "甲盗窃手机一部。",
       FP::marker_section, "盗窃罪", IP::charge_match},
  };

  std::size_t passed = 0;
  std::string failures;
  for (const auto& g : cases) {
    pc::ExtractionOutcome out = pc::extract_features(g.doc, {g.summarizer, &lexicon});
    const auto& f = out.features;
    bool ok = f.fact_text == g.fact && f.fact_provenance == g.fact_provenance && f.issue_text == g.issue &&
              f.issue_provenance == g.issue_provenance;
    if (ok) {
      ++passed;
    } else {
      failures += "\n    " + g.name + ": fact='" + f.fact_text + "' [" + std::string(pc::to_string(f.fact_provenance)) +
                  "] issue='" + f.issue_text + "' [" + std::string(pc::to_string(f.issue_provenance)) + "]";
    }
  }
  std::string detail = std::to_string(passed) + "/" + std::to_string(cases.size()) + " golden cases";
  if (cases.size() < 20) return {false, detail + " (fewer than 20 fixtures)"};
  return {passed == cases.size(), detail + failures};
}

// ---------------------------------------------------------------------------

// Similarity equals the sum of part dot products; it is symmetric, and
// uniform positive scaling of the query or the candidates keeps the order.
Verdict representation_algebra() {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.0f, 1.0f);
  const std::size_t dim = 32;
  auto random_rep = [&](std::string id) {
    std::vector<pc::Vector> parts(3, pc::Vector(dim));
    for (auto& p : parts)
      for (auto& x : p) x = g(rng);
    return pc::assemble_representation(std::move(id), pc::FeatureMode::fact_and_issue, std::move(parts));
  };
  std::vector<pc::CaseRepresentation> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(random_rep("d" + std::to_string(i)));
  std::vector<pc::CaseRepresentation> scaled_docs = docs;
  for (auto& d : scaled_docs)
    for (auto* v : {&d.fact, &d.issue, &d.cross, &d.concat})
      for (auto& x : *v) x *= 3.0f;
  std::size_t pairs = 0;
  double worst = 0.0;
  for (int qi = 0; qi < 25; ++qi) {
    pc::CaseRepresentation q = random_rep("q" + std::to_string(qi));
    pc::CaseRepresentation q2 = q;
    for (auto* v : {&q2.fact, &q2.issue, &q2.cross, &q2.concat})
      for (auto& x : *v) x *= 2.0f;
    for (const auto& d : docs) {
      ++pairs;
      double s = pc::similarity(q, d).score;
      double parts = pc::dot(q.fact, d.fact) + pc::dot(q.issue, d.issue) + pc::dot(q.cross, d.cross);
      double scale = std::max(1.0, std::abs(s));
      double err = std::abs(s - parts) / scale;
      worst = std::max(worst, err);
      if (err > 1e-12) return {false, "dot decomposition off by " + fmt("%.3e", err)};
      if (s != pc::similarity(d, q).score) return {false, "similarity is not symmetric"};
      double scaled = pc::similarity(q2, d).score;
      if (std::abs(scaled - 2.0 * s) > 1e-12 * std::max(1.0, std::abs(scaled)))
        return {false, "score does not scale with the query"};
    }
    auto a = pc::dense_retrieve(q, docs, docs.size());
    auto b = pc::dense_retrieve(q2, docs, docs.size());
    auto c = pc::dense_retrieve(q, scaled_docs, scaled_docs.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      if (a.entries[i].id != b.entries[i].id) return {false, "ranking changed under query scaling"};
      if (a.entries[i].id != c.entries[i].id) return {false, "ranking changed under candidate scaling"};
    }
  }
  return {pairs >= 1000, std::to_string(pairs) + " pairs, max relative error " + fmt("%.2e", worst)};
}

// Two-stage output lies inside the lexical top-10 and is ordered exactly as a
// brute-force dense sort of that candidate set.
Verdict two_stage_containment() {
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"contract", "breach", "theft", "vehicle", "tenant", "rent", "damages",
                                          "negligence", "duty", "care", "fraud", "appeal", "sentence", "permit",
                                          "immigration", "refugee", "tax", "income", "employer", "dismissal"};
  auto words = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  pc::MockBackend backend(32, 5);
  pc::PromptTemplate t = pc::preset_template("A", pc::Language::en);
  pc::ReformulationVariant v{pc::FeatureMode::fact_and_issue, true};
  std::vector<pc::EncodeItem> items;
  std::vector<std::pair<std::string, std::string>> texts;
  for (int i = 0; i < 50; ++i) {
    std::string id = "c" + std::to_string(100 + i);
    pc::LegalFeatures f{id, pc::Language::en, words(8), words(4), pc::FactProvenance::lead_fallback,
                        pc::IssueProvenance::placeholder_sentences};
    texts.push_back({id, f.fact_text + " " + f.issue_text + " " + words(12)});
    items.push_back({f, texts.back().second, t});
  }
  auto reps = pc::encode_cases(items, v, backend, 2);
  std::map<std::string, const pc::CaseRepresentation*> by_id;
  for (const auto& r : reps) by_id[r.case_id] = &r;
  pc::RepresentationLookup lookup = [&](const std::string& id) -> const pc::CaseRepresentation* {
    auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : it->second;
  };
  pc::EnglishSimpleTokenizer tok;
  pc::Bm25Index ix = pc::Bm25Index::build(texts, tok);
  std::vector<std::string> pool = ix.doc_ids();

  std::size_t rows = 0;
  for (int qi = 0; qi < 20; ++qi) {
    std::string qtext = words(6);
    pc::LegalFeatures qf{"q", pc::Language::en, words(8), words(4), pc::FactProvenance::lead_fallback,
                         pc::IssueProvenance::placeholder_sentences};
    pc::CaseRepresentation qrep = pc::encode_case(qf, "", t, v, backend);
    auto terms = tok.tokenize(qtext);
    pc::RankedList first = pc::bm25_retrieve(ix, terms, pool, 10);
    pc::RankedList two = pc::two_stage_retrieve(ix, terms, pool, &qrep, lookup, 10, 10, "q");
    std::set<std::string> top10;
    for (const auto& e : first.entries) top10.insert(e.id);
    std::vector<pc::RankedEntry> brute;
    for (const auto& id : top10) brute.push_back({id, pc::dot(qrep.concat, by_id.at(id)->concat)});
    std::sort(brute.begin(), brute.end(), pc::rank_before);
    for (const auto& e : two.entries) {
      ++rows;
      if (!top10.contains(e.id)) return {false, "query " + std::to_string(qi) + ": '" + e.id + "' not in BM25 top-10"};
    }
    if (two.entries != brute) return {false, "query " + std::to_string(qi) + ": rerank differs from brute force"};
  }
  return {true, "50-case corpus, 20 queries, " + std::to_string(rows) + " rows inside the BM25 top-10"};
}

// ---------------------------------------------------------------------------
// Full pipeline

struct Silence {
  std::ostringstream sink;
  pc::testing::WarningCapture warnings;
  pc::PipelineContext ctx() { return pc::PipelineContext{nullptr, nullptr, &sink}; }
};

void run_all(const pc::RunConfig& c, Silence& s) {
  for (auto cmd : {pc::cmd_ingest, pc::cmd_extract, pc::cmd_encode, pc::cmd_retrieve, pc::cmd_evaluate})
    if (cmd(c, s.ctx()) != 0) throw pc::Error("pipeline step failed");
}

// Running the pipeline twice, the second time from the first run's manifest,
// gives byte-identical artifacts.
Verdict end_to_end_determinism() {
  pc::testing::TempDir dir;
  Silence s;
  std::vector<std::string> compared;
  for (const char* cfg : {"coliee.config.json", "lecard.config.json"}) {
    pc::RunConfig first = pc::load_config(pc::testing::data_dir() / cfg);
    first.out = (dir / (std::string(cfg) + ".a")).string();
    run_all(first, s);
    pc::RunConfig second = pc::load_config(first.out_dir() / "evaluate.manifest.json");
    second.out = (dir / (std::string(cfg) + ".b")).string();
    run_all(second, s);
    for (const char* f : {"corpus.jsonl", "features.jsonl", "reps.bin", "run.trec", "report.csv", "report.txt",
                          "report.json"}) {
      if (pc::read_file(first.out_dir() / f) != pc::read_file(second.out_dir() / f))
        return {false, std::string(cfg) + ": " + f + " differs between runs"};
      compared.push_back(f);
    }
  }
  return {true, std::to_string(compared.size()) + " artifacts byte-identical across two datasets"};
}

// The ablation yields four variant rows and seven template rows, all scored,
// and the empty template reproduces the prompt-off inputs.
Verdict ablation_grid_shape() {
  pc::testing::TempDir dir;
  Silence s;
  pc::RunConfig c = pc::load_config(pc::testing::data_dir() / "coliee.config.json");
  c.out = (dir / "run").string();
  for (auto cmd : {pc::cmd_ingest, pc::cmd_extract, pc::cmd_ablate})
    if (cmd(c, s.ctx()) != 0) return {false, "pipeline step failed"};
  pc::json j = pc::json::parse(pc::read_file(c.out_dir() / "ablation.json"));
  std::map<std::string, std::size_t> per_section;
  std::size_t failed = 0;
  for (const auto& cell : j["cells"]) {
    ++per_section[cell["section"].get<std::string>()];
    failed += cell.contains("error");
  }
  auto csv = pc::read_lines(c.out_dir() / "ablation.csv");
  const bool na = j["na_template_equals_prompt_off_both"].get<bool>();
  std::string detail = std::to_string(per_section["variants"]) + " variant rows, " +
                       std::to_string(per_section["templates"]) + " template rows, " + std::to_string(failed) +
                       " failed cells, NA equivalence " + (na ? "true" : "false");
  bool ok = per_section["variants"] == 4 && per_section["templates"] == 7 && failed == 0 && na && csv.size() == 12;
  return {ok, detail};
}

// R@k never exceeds k divided by the mean number of relevant cases per query.
Verdict recall_bound() {
  std::vector<std::string> violations;
  auto check = [&](const std::string& name, const pc::RunFile& run, const pc::RelevanceJudgments& j, std::size_t k) {
    pc::MetricsReport r = pc::evaluate_run(run, j, k);
    if (!pc::recall_bound_holds(r))
      violations.push_back(name + " (R@" + std::to_string(k) + "=" + fmt("%.4f", r.aggregate.R) + " > bound " +
                           fmt("%.4f", pc::recall_bound(r)) + ")");
  };

  auto [fixture_run, fixture_j] = pc::testing::metric_fixture_run();
  check("metric fixture", fixture_run, fixture_j, 5);

  std::mt19937_64 rng(5);
  std::size_t random_violations = 0;
  const int datasets = 200;
  for (int d = 0; d < datasets; ++d) {
    pc::RunFile run;
    pc::RelevanceJudgments j;
    for (int q = 0, nq = 1 + static_cast<int>(rng() % 6); q < nq; ++q) {
      std::string qid = "q" + std::to_string(q);
      pc::RankedList list{qid, {}, pc::RankStage::dense};
      for (int i = 0; i < 30; ++i) list.entries.push_back({"d" + std::to_string(100 + i), 30.0 - i});
      std::shuffle(list.entries.begin(), list.entries.end(), rng);
      for (std::size_t i = 0; i < list.entries.size(); ++i) list.entries[i].score = 30.0 - static_cast<double>(i);
      for (std::size_t i = 0, n = 1 + rng() % 20; i < n; ++i) j.judgments[qid].insert("d" + std::to_string(100 + rng() % 30));
      run.lists.push_back(std::move(list));
    }
    pc::MetricsReport r = pc::evaluate_run(run, j, 5);
    if (!pc::recall_bound_holds(r)) ++random_violations;
  }
  if (random_violations)
    violations.push_back(std::to_string(random_violations) + "/" + std::to_string(datasets) + " random datasets");

  // One query with a single relevant case, one with a hundred; a perfect
  // ranking gives R@5 = (1 + 0.05) / 2 against a bound of 5 / 50.5.
  pc::RunFile skew;
  pc::RelevanceJudgments skew_j;
  skew.lists.push_back({"q1", {{"a", 1.0}}, pc::RankStage::dense});
  skew_j.judgments["q1"] = {"a"};
  pc::RankedList big{"q2", {}, pc::RankStage::dense};
  for (int i = 0; i < 100; ++i) {
    std::string id = "b" + std::to_string(1000 + i);
    skew_j.judgments["q2"].insert(id);
    big.entries.push_back({id, 100.0 - i});
  }
  skew.lists.push_back(big);
  check("skewed relevance counterexample", skew, skew_j, 5);

  if (violations.empty()) return {true, "bound holds on fixture, random and skewed datasets"};
  std::string detail = "violated by:";
  for (const auto& v : violations) detail += " " + v + ";";
  return {false, detail};
}

const std::vector<std::pair<std::string, std::function<Verdict()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Verdict()>>> all = {
      {"metric_oracle", metric_oracle},
      {"bm25_oracle", bm25_oracle},
      {"extraction_golden", extraction_golden},
      {"representation_algebra", representation_algebra},
      {"two_stage_containment", two_stage_containment},
      {"end_to_end_determinism", end_to_end_determinism},
      {"ablation_grid_shape", ablation_grid_shape},
      {"recall_bound", recall_bound},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(argv[++i]);
    } else if (a == "--list") {
      for (const auto& [name, _] : criteria()) std::cout << name << "\n";
      return 0;
    } else {
      std::cerr << "usage: acceptance [--list] [--criterion NAME]...\n";
      return 2;
    }
  }
  for (const auto& name : selected) {
    bool known = std::any_of(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == name; });
    if (!known) {
      std::cerr << "unknown criterion '" << name << "'\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
