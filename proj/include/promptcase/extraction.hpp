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

// Legal fact and legal issue extraction.
//
// Common law: facts are an LLM summary of the background (lead-50 fallback),
// issues are the sentences carrying the citation placeholder.
// Civil law: facts are the section opened by 经审理查明, issues are charge
// names from a lexicon found anywhere in the judgment.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "promptcase/corpus.hpp"
#include "promptcase/segment.hpp"
#include "promptcase/text.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

enum class FactProvenance { summarizer, marker_section, lead_fallback };
enum class IssueProvenance { placeholder_sentences, charge_match, empty };

inline std::string_view to_string(FactProvenance p) {
  switch (p) {
    case FactProvenance::summarizer: return "summarizer";
    case FactProvenance::marker_section: return "marker_section";
    case FactProvenance::lead_fallback: return "lead_fallback";
  }
  return "";
}

inline std::string_view to_string(IssueProvenance p) {
  switch (p) {
    case IssueProvenance::placeholder_sentences: return "placeholder_sentences";
    case IssueProvenance::charge_match: return "charge_match";
    case IssueProvenance::empty: return "empty";
  }
  return "";
}

inline FactProvenance parse_fact_provenance(std::string_view s) {
  for (auto p : {FactProvenance::summarizer, FactProvenance::marker_section, FactProvenance::lead_fallback})
    if (to_string(p) == s) return p;
  throw Error("unknown fact provenance '" + std::string(s) + "'");
}

inline IssueProvenance parse_issue_provenance(std::string_view s) {
  for (auto p : {IssueProvenance::placeholder_sentences, IssueProvenance::charge_match, IssueProvenance::empty})
    if (to_string(p) == s) return p;
  throw Error("unknown issue provenance '" + std::string(s) + "'");
}

struct LegalFeatures {
  std::string case_id;
  Language language = Language::en;
  std::string fact_text;
  std::string issue_text;
  FactProvenance fact_provenance = FactProvenance::lead_fallback;
  IssueProvenance issue_provenance = IssueProvenance::empty;

  friend bool operator==(const LegalFeatures&, const LegalFeatures&) = default;
};

struct FactResult {
  std::string text;
  FactProvenance provenance;
  std::vector<std::string> warnings;
};

struct IssueResult {
  std::string text;
  IssueProvenance provenance;
};

/// summarize(text, instruction) -> summary. Returns nullopt when the service
/// is unavailable. Implementations must tolerate concurrent calls.
class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual std::optional<std::string> summarize(std::string_view text, std::string_view instruction) const = 0;
};

/// Ordered, duplicate-free list of charge names.
class ChargeLexicon {
 public:
  ChargeLexicon() = default;
  explicit ChargeLexicon(const std::vector<std::string>& charges) {
    for (const auto& c : charges) add(c);
  }

  /// One charge per line, '#' starts a comment line, blank lines skipped.
  static ChargeLexicon load(const fs::path& path) {
    ChargeLexicon lex;
    for (const auto& line : read_lines(path)) {
      std::string_view t = trim(line);
      if (t.starts_with("\xEF\xBB\xBF")) t.remove_prefix(3);
      if (t.empty() || t.front() == '#') continue;
      lex.add(std::string(t));
    }
    return lex;
  }

  const std::vector<std::string>& charges() const { return charges_; }
  bool empty() const { return charges_.empty(); }
  std::size_t size() const { return charges_.size(); }

 private:
  void add(const std::string& charge) {
    if (charge.empty()) return;
    if (std::find(charges_.begin(), charges_.end(), charge) == charges_.end()) charges_.push_back(charge);
  }

  std::vector<std::string> charges_;
};

inline constexpr std::string_view kSummaryInstruction = "Summarise in 50 words: ";
inline constexpr std::size_t kLeadTokens = 50;
inline constexpr std::size_t kLeadChars = 100;
inline constexpr std::string_view kPlaceholder = "FRAGMENT_SUPPRESSED";
inline constexpr std::string_view kFactMarker = "经审理查明";
inline constexpr std::string_view kChargeSeparator = "、";

/// First `n` whitespace tokens joined by single spaces.
inline std::string lead_tokens(std::string_view s, std::size_t n = kLeadTokens) {
  auto tokens = text::whitespace_tokens(s);
  std::string out;
  for (std::size_t i = 0; i < tokens.size() && i < n; ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

/// Section text without its heading paragraph.
inline std::string_view section_body(std::string_view section) {
  std::size_t cut = section.find(text::kParagraphBreak);
  std::string_view first = section.substr(0, cut);
  if (!detail::common_law_heading(first)) return section;
  return cut == std::string_view::npos ? std::string_view{} : trim(section.substr(cut));
}

inline FactResult extract_facts_common_law(const CaseDocument& doc, const Summarizer* summarizer) {
  if (trim(doc.raw_text).empty()) throw Error("empty document");
  std::string_view background = section_body(doc.section(SectionKind::background));
  if (trim(background).empty()) background = doc.raw_text;
  FactResult out{{}, FactProvenance::summarizer, {}};
  if (summarizer) {
    std::optional<std::string> summary = summarizer->summarize(background, kSummaryInstruction);
    if (summary && !trim(*summary).empty()) {
      out.text = std::string(trim(*summary));
      return out;
    }
    out.warnings.push_back("summarizer unavailable for case '" + doc.id + "'; using lead fallback");
  }
  out.text = lead_tokens(background);
  out.provenance = FactProvenance::lead_fallback;
  return out;
}

inline FactResult extract_facts_civil_law(const CaseDocument& doc) {
  if (trim(doc.raw_text).empty()) throw Error("empty document");
  std::string_view s = doc.raw_text;
  std::size_t marker = s.find(kFactMarker);
  if (marker != std::string_view::npos) {
    std::size_t start = marker + kFactMarker.size();
    for (std::string_view punct : {"：", ":", "，", ","}) {
      if (s.substr(start).starts_with(punct)) {
        start += punct.size();
        break;
      }
    }
    std::size_t end = std::string_view::npos;
    for (std::string_view closer : {"本院认为", "上述事实", "综上"}) end = std::min(end, s.find(closer, start));
    if (end == std::string_view::npos) {
      auto bg = doc.sections.find(SectionKind::background);
      if (bg != doc.sections.end() && bg->second.end > start) end = bg->second.end;
    }
    if (end == std::string_view::npos) end = s.size();
    std::string_view fact = trim(s.substr(start, end - start));
    if (!fact.empty()) return {std::string(fact), FactProvenance::marker_section, {}};
  }
  return {std::string(text::take_code_points(s, kLeadChars)), FactProvenance::lead_fallback, {}};
}

inline IssueResult extract_issues_common_law(const CaseDocument& doc) {
  std::vector<std::string_view> picked;
  for (Span span : segment::english_sentences(doc.raw_text)) {
    std::string_view sentence = slice(doc.raw_text, span);
    if (sentence.find(kPlaceholder) == std::string_view::npos) continue;
    if (std::find(picked.begin(), picked.end(), sentence) == picked.end()) picked.push_back(sentence);
  }
  if (picked.empty()) return {"", IssueProvenance::empty};
  std::string out;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    if (i) out.push_back(' ');
    out += picked[i];
  }
  return {out, IssueProvenance::placeholder_sentences};
}

struct ChargeMatch {
  std::size_t position;
  std::size_t length;
  std::size_t charge;  // index into the lexicon
};

/// Non-overlapping lexicon occurrences chosen longest-first (ties: earlier
/// position, then lexicon order), returned in text order.
inline std::vector<ChargeMatch> match_charges(std::string_view s, const ChargeLexicon& lexicon) {
  std::vector<ChargeMatch> all;
  const auto& charges = lexicon.charges();
  for (std::size_t c = 0; c < charges.size(); ++c) {
    for (std::size_t pos = s.find(charges[c]); pos != std::string_view::npos; pos = s.find(charges[c], pos + 1))
      all.push_back({pos, charges[c].size(), c});
  }
  std::sort(all.begin(), all.end(), [](const ChargeMatch& a, const ChargeMatch& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.position != b.position) return a.position < b.position;
    return a.charge < b.charge;
  });
  std::vector<ChargeMatch> accepted;
  for (const auto& m : all) {
    bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const ChargeMatch& a) {
      return m.position < a.position + a.length && a.position < m.position + m.length;
    });
    if (!overlaps) accepted.push_back(m);
  }
  std::sort(accepted.begin(), accepted.end(), [](const ChargeMatch& a, const ChargeMatch& b) { return a.position < b.position; });
  return accepted;
}

inline IssueResult extract_issues_civil_law(const CaseDocument& doc, const ChargeLexicon& lexicon) {
  if (lexicon.empty()) throw Error("empty charge lexicon");
  std::vector<std::size_t> emitted;
  for (const auto& m : match_charges(doc.raw_text, lexicon))
    if (std::find(emitted.begin(), emitted.end(), m.charge) == emitted.end()) emitted.push_back(m.charge);
  if (emitted.empty()) return {"", IssueProvenance::empty};
  std::string out;
  for (std::size_t i = 0; i < emitted.size(); ++i) {
    if (i) out += kChargeSeparator;
    out += lexicon.charges()[emitted[i]];
  }
  return {out, IssueProvenance::charge_match};
}

struct ExtractionDeps {
  const Summarizer* summarizer = nullptr;  // null: lead fallback for common law
  const ChargeLexicon* lexicon = nullptr;  // required for civil law
};

struct ExtractionOutcome {
  LegalFeatures features;
  std::vector<std::string> warnings;
};

inline ExtractionOutcome extract_features(const CaseDocument& doc, const ExtractionDeps& deps) {
  ExtractionOutcome out;
  out.features.case_id = doc.id;
  out.features.language = doc.language;
  FactResult fact;
  IssueResult issue;
  if (doc.jurisdiction == Jurisdiction::common_law) {
    fact = extract_facts_common_law(doc, deps.summarizer);
    issue = extract_issues_common_law(doc);
  } else {
    if (!deps.lexicon) throw Error("civil-law extraction needs a charge lexicon");
    fact = extract_facts_civil_law(doc);
    issue = extract_issues_civil_law(doc, *deps.lexicon);
  }
  out.features.fact_text = std::move(fact.text);
  out.features.fact_provenance = fact.provenance;
  out.features.issue_text = std::move(issue.text);
  out.features.issue_provenance = issue.provenance;
  out.warnings = std::move(fact.warnings);
  return out;
}

// Feature dump: one JSON object per line.

inline json to_json(const LegalFeatures& f) {
  return json{{"case_id", f.case_id},
              {"fact_text", f.fact_text},
              {"issue_text", f.issue_text},
              {"fact_provenance", to_string(f.fact_provenance)},
              {"issue_provenance", to_string(f.issue_provenance)}};
}

inline LegalFeatures features_from_json(const json& j, Language language) {
  LegalFeatures f;
  f.case_id = j.at("case_id").get<std::string>();
  f.language = language;
  f.fact_text = j.at("fact_text").get<std::string>();
  f.issue_text = j.at("issue_text").get<std::string>();
  f.fact_provenance = parse_fact_provenance(j.at("fact_provenance").get<std::string>());
  f.issue_provenance = parse_issue_provenance(j.at("issue_provenance").get<std::string>());
  return f;
}

/// Reads a feature dump; each record takes its language from the corpus.
inline std::map<std::string, LegalFeatures> load_features_jsonl(const fs::path& path, const Corpus& corpus) {
  std::map<std::string, LegalFeatures> out;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      json j = json::parse(lines[n]);
      const auto& doc = corpus.document(j.at("case_id").get<std::string>());
      auto f = features_from_json(j, doc.language);
      out.emplace(f.case_id, std::move(f));
    } catch (const std::exception& e) {
      throw Error(path.string() + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace promptcase
