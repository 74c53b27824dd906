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

// Prompt templates, encoder-input construction and case representations.
//
// A representation in fact_and_issue mode is [fact ; issue ; cross], where
// fact and issue are single-segment embeddings of the prompted features and
// cross is the two-segment embedding of both. The other modes produce a
// single vector.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "promptcase/backend.hpp"
#include "promptcase/corpus.hpp"
#include "promptcase/extraction.hpp"
#include "promptcase/hash.hpp"
#include "promptcase/segment.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

// ---------------------------------------------------------------------------
// Templates

enum class TemplateCategory { none, instructive, misleading, irrelevant };

inline std::string_view to_string(TemplateCategory c) {
  switch (c) {
    case TemplateCategory::none: return "none";
    case TemplateCategory::instructive: return "instructive";
    case TemplateCategory::misleading: return "misleading";
    case TemplateCategory::irrelevant: return "irrelevant";
  }
  return "?";
}

inline TemplateCategory parse_template_category(std::string_view s) {
  if (s == "none") return TemplateCategory::none;
  if (s == "instructive") return TemplateCategory::instructive;
  if (s == "misleading") return TemplateCategory::misleading;
  if (s == "irrelevant") return TemplateCategory::irrelevant;
  throw ConfigError("unknown template category '" + std::string(s) + "'");
}

/// Slot replaced by a sampled issue in misleading templates.
inline constexpr std::string_view kIssueSlot = "{issue}";

struct PromptTemplate {
  std::string name;  // preset letter, "NA", or free-form for file templates
  std::string fact_prefix;
  std::string issue_prefix;
  Language language = Language::en;
  TemplateCategory category = TemplateCategory::none;

  bool has_issue_slot() const {
    return fact_prefix.find(kIssueSlot) != std::string::npos || issue_prefix.find(kIssueSlot) != std::string::npos;
  }
  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

inline void validate_template(const PromptTemplate& t) {
  if (t.category != TemplateCategory::none && (t.fact_prefix.empty() || t.issue_prefix.empty()))
    throw ConfigError("template '" + t.name + "': empty prefix is only allowed for category none");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"A", "B", "C", "D", "E", "F", "G"};
  return names;
}

/// Shipped presets A-G plus the empty NA template.
inline PromptTemplate preset_template(std::string_view name, Language lang) {
  struct Row {
    std::string_view name;
    TemplateCategory category;
    std::string_view en_fact, en_issue, zh_fact, zh_issue;
  };
  using C = TemplateCategory;
  static constexpr std::array<Row, 8> rows = {{
      {"A", C::instructive, "Legal facts:", "Legal issues:", "法律事实：", "法律纠纷："},
      {"B", C::instructive, "The following is legal facts:", "The following is legal issues:", "以下是法律事实：",
       "以下是法律纠纷："},
      {"C", C::instructive, "The judge think:", "The judge think:", "法官认为：", "法官认为："},
      {"D", C::misleading, "This case is related to {issue}:", "This case is related to {issue}:", "本案涉及{issue}：",
       "本案涉及{issue}："},
      {"E", C::misleading, "Legal facts of this case is {issue}:", "Legal issues of this case is {issue}:",
       "本案的法律事实是{issue}：", "本案的法律纠纷是{issue}："},
      {"F", C::irrelevant, "Let's look:", "Let's look:", "让我们看看：", "让我们看看："},
      {"G", C::irrelevant, "ADC is a database conference:", "ADC is a database conference:", "ADC是一个数据库会议：",
       "ADC是一个数据库会议："},
      {"NA", C::none, "", "", "", ""},
  }};
  for (const auto& r : rows) {
    if (r.name != name) continue;
    PromptTemplate t;
    t.name = std::string(name);
    t.language = lang;
    t.category = r.category;
    t.fact_prefix = std::string(lang == Language::en ? r.en_fact : r.zh_fact);
    t.issue_prefix = std::string(lang == Language::en ? r.en_issue : r.zh_issue);
    return t;
  }
  throw ConfigError("unknown template preset '" + std::string(name) + "' (expected A-G or NA)");
}

inline json to_json(const PromptTemplate& t) {
  return json{{"category", to_string(t.category)},
              {"language", to_string(t.language)},
              {"fact_prefix", t.fact_prefix},
              {"issue_prefix", t.issue_prefix}};
}

inline PromptTemplate template_from_json(const json& j, std::string name) {
  PromptTemplate t;
  try {
    t.name = std::move(name);
    t.category = parse_template_category(j.at("category").get<std::string>());
    t.language = parse_language(j.at("language").get<std::string>());
    t.fact_prefix = j.at("fact_prefix").get<std::string>();
    t.issue_prefix = j.at("issue_prefix").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("template " + t.name + ": " + e.what());
  }
  validate_template(t);
  return t;
}

inline PromptTemplate load_template_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return template_from_json(j, path.stem().string());
}

/// Prompt for whole-text input when prompting is on.
inline std::string_view merged_prompt(Language lang) {
  return lang == Language::en ? "Legal facts and legal issues:" : "法律事实和法律纠纷：";
}

/// Joins prefix and text: one space for English, nothing for Chinese. An
/// empty side contributes nothing.
inline std::string join_prompt(std::string_view prefix, std::string_view text, Language lang) {
  if (prefix.empty()) return std::string(text);
  if (text.empty()) return std::string(prefix);
  std::string out(prefix);
  if (lang == Language::en) out.push_back(' ');
  out += text;
  return out;
}

// ---------------------------------------------------------------------------
// Misleading-template instantiation

/// Issues available for sampling: individual charges for Chinese, individual
/// issue sentences for English. Sorted and unique.
inline std::vector<std::string> issue_pool(const std::map<std::string, LegalFeatures>& features, Language lang) {
  std::set<std::string> pool;
  for (const auto& [id, f] : features) {
    if (f.language != lang || f.issue_text.empty()) continue;
    if (lang == Language::zh) {
      std::string_view rest = f.issue_text;
      while (!rest.empty()) {
        auto cut = rest.find(kChargeSeparator);
        std::string_view item = trim(rest.substr(0, cut));
        if (!item.empty()) pool.emplace(item);
        if (cut == std::string_view::npos) break;
        rest.remove_prefix(cut + kChargeSeparator.size());
      }
    } else {
      for (Span s : segment::english_sentences(f.issue_text)) pool.emplace(slice(f.issue_text, s));
    }
  }
  return {pool.begin(), pool.end()};
}

/// Draws one pool entry for a case; the same (seed, case) always gets the same
/// entry. Empty pool gives "".
inline std::string sample_issue(const std::vector<std::string>& pool, std::string_view case_id, std::uint64_t seed) {
  if (pool.empty()) return {};
  std::mt19937_64 rng(seed ^ fnv1a64(case_id));
  return pool[rng() % pool.size()];
}

inline std::string fill_issue_slot(std::string s, std::string_view issue) {
  for (auto pos = s.find(kIssueSlot); pos != std::string::npos; pos = s.find(kIssueSlot, pos + issue.size()))
    s.replace(pos, kIssueSlot.size(), issue);
  return s;
}

/// Template with any issue slot filled for this case (one draw, used for
/// both prefixes).
inline PromptTemplate instantiate_template(const PromptTemplate& t, std::string_view case_id,
                                           const std::vector<std::string>& pool, std::uint64_t seed) {
  if (!t.has_issue_slot()) return t;
  std::string issue = sample_issue(pool, case_id, seed);
  PromptTemplate out = t;
  out.fact_prefix = fill_issue_slot(t.fact_prefix, issue);
  out.issue_prefix = fill_issue_slot(t.issue_prefix, issue);
  return out;
}

// ---------------------------------------------------------------------------
// Variants and inputs

enum class FeatureMode { whole_text, fact_only, issue_only, fact_and_issue };

inline std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::whole_text: return "whole_text";
    case FeatureMode::fact_only: return "fact_only";
    case FeatureMode::issue_only: return "issue_only";
    case FeatureMode::fact_and_issue: return "fact_and_issue";
  }
  return "?";
}

inline FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "whole_text") return FeatureMode::whole_text;
  if (s == "fact_only") return FeatureMode::fact_only;
  if (s == "issue_only") return FeatureMode::issue_only;
  if (s == "fact_and_issue") return FeatureMode::fact_and_issue;
  throw ConfigError("unknown feature mode '" + std::string(s) + "'");
}

struct ReformulationVariant {
  FeatureMode feature_mode = FeatureMode::fact_and_issue;
  bool use_prompt = true;

  std::string label() const { return std::string(to_string(feature_mode)) + (use_prompt ? "+prompt" : ""); }
  friend bool operator==(const ReformulationVariant&, const ReformulationVariant&) = default;
};

struct DualInputs {
  EncoderInput fact;
  EncoderInput issue;
};

inline void check_language(const LegalFeatures& f, const PromptTemplate& t) {
  if (f.language != t.language)
    throw Error("template '" + t.name + "' is " + std::string(to_string(t.language)) + " but case '" + f.case_id +
                "' is " + std::string(to_string(f.language)));
}

inline DualInputs build_dual_inputs(const LegalFeatures& f, const PromptTemplate& t) {
  check_language(f, t);
  return {EncoderInput(join_prompt(t.fact_prefix, f.fact_text, f.language)),
          EncoderInput(join_prompt(t.issue_prefix, f.issue_text, f.language))};
}

inline EncoderInput build_cross_input(const LegalFeatures& f, const PromptTemplate& t) {
  check_language(f, t);
  return EncoderInput(join_prompt(t.fact_prefix, f.fact_text, f.language),
                      join_prompt(t.issue_prefix, f.issue_text, f.language));
}

/// Encoder inputs for one case under a variant. `t` must already be
/// instantiated; with use_prompt off it is ignored. whole_text needs the raw
/// document text.
inline std::vector<EncoderInput> variant_inputs(const LegalFeatures& f, std::string_view whole_text,
                                                const PromptTemplate& t, const ReformulationVariant& v) {
  PromptTemplate active = v.use_prompt ? t : preset_template("NA", f.language);
  switch (v.feature_mode) {
    case FeatureMode::whole_text:
      return {EncoderInput(join_prompt(v.use_prompt ? merged_prompt(f.language) : "", whole_text, f.language))};
    case FeatureMode::fact_only:
      return {build_dual_inputs(f, active).fact};
    case FeatureMode::issue_only:
      return {build_dual_inputs(f, active).issue};
    case FeatureMode::fact_and_issue: {
      DualInputs d = build_dual_inputs(f, active);
      return {d.fact, d.issue, build_cross_input(f, active)};
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Representations

struct CaseRepresentation {
  std::string case_id;
  Vector fact;    // empty unless the mode embeds facts on their own
  Vector issue;   // empty unless the mode embeds issues on their own
  Vector cross;   // fact_and_issue only
  Vector concat;  // the vector used for scoring

  friend bool operator==(const CaseRepresentation&, const CaseRepresentation&) = default;
};

inline CaseRepresentation assemble_representation(std::string case_id, FeatureMode mode, std::vector<Vector> parts) {
  CaseRepresentation r;
  r.case_id = std::move(case_id);
  const std::size_t want = mode == FeatureMode::fact_and_issue ? 3 : 1;
  if (parts.size() != want) throw Error("case '" + r.case_id + "': expected " + std::to_string(want) + " embeddings");
  for (const auto& p : parts)
    if (p.size() != parts.front().size())
      throw Error("case '" + r.case_id + "': dimension mismatch across embeddings (" +
                  std::to_string(parts.front().size()) + " vs " + std::to_string(p.size()) + ")");
  switch (mode) {
    case FeatureMode::whole_text:
      r.concat = std::move(parts[0]);
      break;
    case FeatureMode::fact_only:
      r.fact = parts[0];
      r.concat = std::move(parts[0]);
      break;
    case FeatureMode::issue_only:
      r.issue = parts[0];
      r.concat = std::move(parts[0]);
      break;
    case FeatureMode::fact_and_issue:
      r.fact = std::move(parts[0]);
      r.issue = std::move(parts[1]);
      r.cross = std::move(parts[2]);
      r.concat.reserve(3 * r.fact.size());
      for (const Vector* p : {&r.fact, &r.issue, &r.cross}) r.concat.insert(r.concat.end(), p->begin(), p->end());
      break;
  }
  return r;
}

/// Everything needed to encode one case.
struct EncodeItem {
  LegalFeatures features;
  std::string whole_text;
  PromptTemplate prompt;  // instantiated
};

/// Encodes cases in batches of `batch_cases`, running batches on `jobs`
/// threads. Output order follows `items`.
inline std::vector<CaseRepresentation> encode_cases(const std::vector<EncodeItem>& items, const ReformulationVariant& v,
                                                    const EmbeddingBackend& backend, unsigned jobs = 1,
                                                    std::size_t batch_cases = 16) {
  if (batch_cases == 0) batch_cases = 1;
  std::vector<CaseRepresentation> out(items.size());
  const std::size_t batches = (items.size() + batch_cases - 1) / batch_cases;
  parallel_for(batches, jobs, [&](std::size_t b) {
    const std::size_t begin = b * batch_cases, end = std::min(items.size(), begin + batch_cases);
    std::vector<EncoderInput> inputs;
    std::vector<std::size_t> owner;
    for (std::size_t i = begin; i < end; ++i) {
      for (auto& in : variant_inputs(items[i].features, items[i].whole_text, items[i].prompt, v)) {
        inputs.push_back(std::move(in));
        owner.push_back(i);
      }
    }
    std::vector<Vector> vecs;
    try {
      vecs = embed_batch(backend, inputs);
    } catch (const Error& e) {
      std::string ids;
      for (std::size_t i = begin; i < end; ++i) ids += (ids.empty() ? "" : ",") + items[i].features.case_id;
      throw Error(std::string(e.what()) + " [cases: " + ids + "]");
    }
    std::size_t k = 0;
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<Vector> parts;
      while (k < owner.size() && owner[k] == i) parts.push_back(std::move(vecs[k++]));
      out[i] = assemble_representation(items[i].features.case_id, v.feature_mode, std::move(parts));
    }
  });
  return out;
}

inline CaseRepresentation encode_case(const LegalFeatures& f, std::string_view whole_text, const PromptTemplate& t,
                                      const ReformulationVariant& v, const EmbeddingBackend& backend) {
  return encode_cases({EncodeItem{f, std::string(whole_text), t}}, v, backend).front();
}

// ---------------------------------------------------------------------------
// Similarity

inline double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

struct SimilarityScore {
  std::string query_id;
  std::string candidate_id;
  double score = 0.0;
};

inline SimilarityScore similarity(const CaseRepresentation& q, const CaseRepresentation& d) {
  return {q.case_id, d.case_id, dot(q.concat, d.concat)};
}

}  // namespace promptcase
