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

#include <gtest/gtest.h>

#include <set>

#include "promptcase/encoding.hpp"
#include "promptcase/store.hpp"
#include "test_support.hpp"

namespace promptcase {
namespace {

using testing::TempDir;

LegalFeatures en_case(std::string id, std::string fact, std::string issue) {
  return {std::move(id), Language::en, std::move(fact), std::move(issue), FactProvenance::lead_fallback,
          IssueProvenance::placeholder_sentences};
}

LegalFeatures zh_case(std::string id, std::string fact, std::string issue) {
  return {std::move(id), Language::zh, std::move(fact), std::move(issue), FactProvenance::marker_section,
          IssueProvenance::charge_match};
}

const ReformulationVariant kDual{FeatureMode::fact_and_issue, true};

TEST(Templates, PresetTexts) {
  PromptTemplate a = preset_template("A", Language::en);
  EXPECT_EQ(a.fact_prefix, "Legal facts:");
  EXPECT_EQ(a.issue_prefix, "Legal issues:");
  EXPECT_EQ(a.category, TemplateCategory::instructive);
  PromptTemplate az = preset_template("A", Language::zh);
  EXPECT_EQ(az.fact_prefix, "法律事实：");
  EXPECT_EQ(az.issue_prefix, "法律纠纷：");
  PromptTemplate na = preset_template("NA", Language::en);
  EXPECT_EQ(na.category, TemplateCategory::none);
  EXPECT_TRUE(na.fact_prefix.empty() && na.issue_prefix.empty());
  EXPECT_THROW(preset_template("H", Language::en), ConfigError);
}

TEST(Templates, CategoriesAndSlots) {
  std::map<std::string, TemplateCategory> expected = {
      {"A", TemplateCategory::instructive}, {"B", TemplateCategory::instructive}, {"C", TemplateCategory::instructive},
      {"D", TemplateCategory::misleading},  {"E", TemplateCategory::misleading},  {"F", TemplateCategory::irrelevant},
      {"G", TemplateCategory::irrelevant}};
  ASSERT_EQ(preset_names().size(), 7u);
  for (const auto& name : preset_names()) {
    for (Language lang : {Language::en, Language::zh}) {
      PromptTemplate t = preset_template(name, lang);
      EXPECT_EQ(t.category, expected.at(name)) << name;
      EXPECT_EQ(t.has_issue_slot(), t.category == TemplateCategory::misleading) << name;
      EXPECT_NO_THROW(validate_template(t));
    }
  }
}

TEST(Templates, EmptyPrefixNeedsCategoryNone) {
  PromptTemplate t{"x", "", "Issues:", Language::en, TemplateCategory::instructive};
  EXPECT_THROW(validate_template(t), ConfigError);
}

TEST(Templates, JsonRoundTrip) {
  PromptTemplate d = preset_template("D", Language::zh);
  EXPECT_EQ(template_from_json(to_json(d), "D"), d);
  EXPECT_THROW(template_from_json(json{{"category", "instructive"}}, "x"), ConfigError);
  EXPECT_THROW(template_from_json(json{{"category", "loud"}, {"language", "en"}, {"fact_prefix", "a"},
                                       {"issue_prefix", "b"}},
                                  "x"),
               ConfigError);
}

TEST(Templates, ShippedFilesMatchPresets) {
  const fs::path dir = fs::path(PROMPTCASE_ASSET_DIR) / "templates";
  for (const auto& name : preset_names()) {
    for (Language lang : {Language::en, Language::zh}) {
      fs::path file = dir / std::string(to_string(lang)) / (name + ".json");
      ASSERT_TRUE(fs::exists(file)) << file;
      EXPECT_EQ(load_template_file(file), preset_template(name, lang)) << file;
    }
  }
}

TEST(Prompts, JoinRules) {
  EXPECT_EQ(join_prompt("Legal facts:", "F", Language::en), "Legal facts: F");
  EXPECT_EQ(join_prompt("法律事实：", "甲", Language::zh), "法律事实：甲");
  EXPECT_EQ(join_prompt("", "F", Language::en), "F");
  EXPECT_EQ(join_prompt("P:", "", Language::en), "P:");
}

TEST(Misleading, IssuePoolSplitsAndSorts) {
  std::map<std::string, LegalFeatures> zh = {{"1", zh_case("1", "f", "盗窃罪、诈骗罪")}, {"2", zh_case("2", "f", "诈骗罪")},
                                             {"3", zh_case("3", "f", "")}};
  EXPECT_EQ(issue_pool(zh, Language::zh), (std::vector<std::string>{"盗窃罪", "诈骗罪"}));
  std::map<std::string, LegalFeatures> en = {{"1", en_case("1", "f", "See X. Compare Y.")}};
  EXPECT_EQ(issue_pool(en, Language::en), (std::vector<std::string>{"Compare Y.", "See X."}));
  EXPECT_TRUE(issue_pool(en, Language::zh).empty());
}

TEST(Misleading, SamplingIsDeterministicPerCase) {
  std::vector<std::string> pool = {"p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"};
  EXPECT_EQ(sample_issue(pool, "case-1", 5), sample_issue(pool, "case-1", 5));
  std::set<std::string> seen;
  for (int i = 0; i < 64; ++i) seen.insert(sample_issue(pool, "case-" + std::to_string(i), 5));
  EXPECT_GT(seen.size(), 4u);
  int differs = 0;
  for (int i = 0; i < 64; ++i)
    differs += sample_issue(pool, "case-" + std::to_string(i), 5) != sample_issue(pool, "case-" + std::to_string(i), 6);
  EXPECT_GT(differs, 0);
  EXPECT_EQ(sample_issue({}, "c", 1), "");
}

TEST(Misleading, OneDrawFillsBothPrefixes) {
  std::vector<std::string> pool = {"theft"};
  PromptTemplate e = instantiate_template(preset_template("E", Language::en), "c", pool, 1);
  EXPECT_EQ(e.fact_prefix, "Legal facts of this case is theft:");
  EXPECT_EQ(e.issue_prefix, "Legal issues of this case is theft:");
  PromptTemplate a = preset_template("A", Language::en);
  EXPECT_EQ(instantiate_template(a, "c", pool, 1), a);
  EXPECT_EQ(fill_issue_slot("{issue}/{issue}", "x"), "x/x");
}

TEST(Inputs, DualAndCross) {
  auto in = variant_inputs(en_case("c", "F", "I"), "", preset_template("A", Language::en), kDual);
  ASSERT_EQ(in.size(), 3u);
  EXPECT_EQ(in[0], EncoderInput("Legal facts: F"));
  EXPECT_EQ(in[1], EncoderInput("Legal issues: I"));
  EXPECT_EQ(in[2], EncoderInput("Legal facts: F", "Legal issues: I"));
}

TEST(Inputs, PromptOffEqualsEmptyTemplate) {
  LegalFeatures f = zh_case("c", "甲", "盗窃罪");
  ReformulationVariant off{FeatureMode::fact_and_issue, false};
  auto a = variant_inputs(f, "", preset_template("B", Language::zh), off);
  auto b = variant_inputs(f, "", preset_template("NA", Language::zh), kDual);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[2], EncoderInput("甲", "盗窃罪"));
}

TEST(Inputs, WholeTextUsesMergedPrompt) {
  LegalFeatures f = en_case("c", "F", "I");
  PromptTemplate t = preset_template("A", Language::en);
  EXPECT_EQ(variant_inputs(f, "T", t, {FeatureMode::whole_text, true}),
            std::vector<EncoderInput>{EncoderInput("Legal facts and legal issues: T")});
  EXPECT_EQ(variant_inputs(f, "T", t, {FeatureMode::whole_text, false}), std::vector<EncoderInput>{EncoderInput("T")});
  LegalFeatures z = zh_case("c", "甲", "乙");
  EXPECT_EQ(variant_inputs(z, "全文", preset_template("A", Language::zh), {FeatureMode::whole_text, true})[0],
            EncoderInput("法律事实和法律纠纷：全文"));
}

TEST(Inputs, SingleFeatureModes) {
  LegalFeatures f = en_case("c", "F", "I");
  PromptTemplate t = preset_template("A", Language::en);
  EXPECT_EQ(variant_inputs(f, "", t, {FeatureMode::fact_only, true})[0], EncoderInput("Legal facts: F"));
  EXPECT_EQ(variant_inputs(f, "", t, {FeatureMode::issue_only, false})[0], EncoderInput("I"));
}

TEST(Inputs, LanguageMismatchFails) {
  EXPECT_THROW(variant_inputs(en_case("c", "F", "I"), "", preset_template("A", Language::zh), kDual), Error);
}

TEST(Variants, LabelsAndParsing) {
  EXPECT_EQ(kDual.label(), "fact_and_issue+prompt");
  EXPECT_EQ((ReformulationVariant{FeatureMode::whole_text, false}.label()), "whole_text");
  EXPECT_EQ(parse_feature_mode("issue_only"), FeatureMode::issue_only);
  EXPECT_THROW(parse_feature_mode("both"), ConfigError);
}

TEST(Representation, ConcatenatesThreeParts) {
  CaseRepresentation r = assemble_representation("c", FeatureMode::fact_and_issue, {{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(r.concat, (Vector{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(r.cross, (Vector{5, 6}));
  EXPECT_THROW(assemble_representation("c", FeatureMode::fact_and_issue, {{1, 2}, {3}, {5, 6}}), Error);
  EXPECT_THROW(assemble_representation("c", FeatureMode::fact_only, {{1}, {2}}), Error);
}

TEST(Representation, ScoreIsSumOfPartDots) {
  MockBackend mock(16, 3);
  PromptTemplate t = preset_template("A", Language::en);
  CaseRepresentation q = encode_case(en_case("q", "car theft", "statute of theft"), "", t, kDual, mock);
  CaseRepresentation d = encode_case(en_case("d", "stolen car", "theft statute"), "", t, kDual, mock);
  double parts = dot(q.fact, d.fact) + dot(q.issue, d.issue) + dot(q.cross, d.cross);
  EXPECT_NEAR(similarity(q, d).score, parts, 1e-12);
  EXPECT_EQ(similarity(q, d).score, similarity(d, q).score);
  EXPECT_THROW(dot(q.fact, d.concat), Error);
}

TEST(Encode, FactOnlyHasBackendDimension) {
  MockBackend mock(24, 0);
  CaseRepresentation r = encode_case(en_case("c", "F", "I"), "", preset_template("A", Language::en),
                                     {FeatureMode::fact_only, true}, mock);
  EXPECT_EQ(r.concat.size(), 24u);
  EXPECT_TRUE(r.issue.empty());
  CaseRepresentation dual = encode_case(en_case("c", "F", "I"), "", preset_template("A", Language::en), kDual, mock);
  EXPECT_EQ(dual.concat.size(), 72u);
}

TEST(Encode, BatchingAndThreadsDoNotChangeResults) {
  MockBackend mock(16, 11);
  std::vector<EncodeItem> items;
  for (int i = 0; i < 37; ++i)
    items.push_back({en_case("c" + std::to_string(i), "fact " + std::to_string(i), "issue " + std::to_string(i % 5)),
                     "", preset_template("A", Language::en)});
  auto base = encode_cases(items, kDual, mock, 1, 1);
  EXPECT_EQ(encode_cases(items, kDual, mock, 4, 16), base);
  EXPECT_EQ(encode_cases(items, kDual, mock, 3, 5), base);
  EXPECT_EQ(base[7].fact, mock_embed(EncoderInput("Legal facts: fact 7"), 16, 11, 512));
}

class FailingBackend final : public EmbeddingBackend {
 public:
  BackendDescriptor descriptor() const override { return {"fail", "1", 4, 512}; }
  std::vector<Vector> embed(std::span<const EncoderInput>) const override { throw Error("service down"); }
};

TEST(Encode, ErrorsNameTheCases) {
  std::vector<EncodeItem> items{{en_case("alpha", "F", "I"), "", preset_template("A", Language::en)},
                                {en_case("beta", "F", "I"), "", preset_template("A", Language::en)}};
  try {
    encode_cases(items, kDual, FailingBackend{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("service down [cases: alpha,beta]"), std::string::npos);
  }
}

RepresentationStore sample_store(FeatureMode mode) {
  MockBackend mock(8, 2);
  RepresentationStore s;
  s.variant = {mode, true};
  s.template_name = "A";
  s.backend = mock.descriptor();
  for (const char* id : {"b", "a", "c"})
    s.reps.push_back(encode_case(en_case(id, std::string("fact ") + id, "issue"), std::string("whole ") + id,
                                 preset_template("A", Language::en), s.variant, mock));
  return s;
}

TEST(Store, RoundTrip) {
  TempDir dir;
  for (FeatureMode mode : {FeatureMode::fact_and_issue, FeatureMode::whole_text, FeatureMode::issue_only}) {
    RepresentationStore s = sample_store(mode);
    write_store(dir / "reps.bin", s);
    RepresentationStore back = read_store(dir / "reps.bin");
    EXPECT_EQ(back.reps, s.reps);
    EXPECT_EQ(back.variant, s.variant);
    EXPECT_EQ(back.backend, s.backend);
    EXPECT_EQ(back.template_name, "A");
    EXPECT_EQ(store_bytes(back), read_file(dir / "reps.bin"));
  }
}

TEST(Store, BinaryLayout) {
  RepresentationStore s = sample_store(FeatureMode::fact_and_issue);
  std::string bytes = store_bytes(s);
  EXPECT_EQ(bytes.substr(0, 4), "PCRS");
  EXPECT_EQ(read_le<std::uint32_t>(bytes, 4), 1u);
  EXPECT_EQ(read_le<std::uint32_t>(bytes, 8), 24u);
  EXPECT_EQ(read_le<std::uint64_t>(bytes, 12), 3u);
  EXPECT_EQ(read_le<std::uint64_t>(bytes, 20), fnv1a64("b"));
  EXPECT_EQ(read_le<float>(bytes, 28), s.reps[0].concat[0]);
  EXPECT_EQ(bytes.size(), 20u + 3 * (8 + 4 * 24));
}

TEST(Store, RejectsInconsistentFiles) {
  TempDir dir;
  RepresentationStore s = sample_store(FeatureMode::fact_and_issue);
  write_store(dir / "reps.bin", s);

  json side = json::parse(read_file(store_sidecar_path(dir / "reps.bin")));
  std::swap(side["ids"][0], side["ids"][1]);
  write_file_atomic(store_sidecar_path(dir / "reps.bin"), side.dump());
  EXPECT_THROW(read_store(dir / "reps.bin"), Error);

  write_store(dir / "reps.bin", s);
  std::string bytes = read_file(dir / "reps.bin");
  write_file_atomic(dir / "reps.bin", bytes.substr(0, bytes.size() - 4));
  EXPECT_THROW(read_store(dir / "reps.bin"), Error);
  write_file_atomic(dir / "reps.bin", "XXXX" + bytes.substr(4));
  EXPECT_THROW(read_store(dir / "reps.bin"), Error);
}

TEST(Store, JsonlExport) {
  RepresentationStore s = sample_store(FeatureMode::fact_only);
  std::string out = store_to_jsonl(s);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 3);
  json first = json::parse(out.substr(0, out.find('\n')));
  EXPECT_EQ(first["id"], "b");
  EXPECT_EQ(first["vector"].size(), 8u);
  EXPECT_EQ(s.find("c"), &s.reps[2]);
  EXPECT_EQ(s.find("zz"), nullptr);
}

}  // namespace
}  // namespace promptcase
