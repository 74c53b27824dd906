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

// Case corpora: loading the two on-disk layouts, normalization, French
// paragraph removal, section detection, JSONL persistence and statistics.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "promptcase/segment.hpp"
#include "promptcase/text.hpp"
#include "promptcase/tokenizer.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

using json = nlohmann::json;

enum class Jurisdiction { common_law, civil_law };
enum class Language { en, zh };
enum class SectionKind { name, background, analysis, order };

inline std::string_view to_string(Jurisdiction j) { return j == Jurisdiction::common_law ? "common_law" : "civil_law"; }
inline std::string_view to_string(Language l) { return l == Language::en ? "en" : "zh"; }

inline std::string_view to_string(SectionKind k) {
  switch (k) {
    case SectionKind::name: return "name";
    case SectionKind::background: return "background";
    case SectionKind::analysis: return "analysis";
    case SectionKind::order: return "order";
  }
  return "";
}

inline Jurisdiction parse_jurisdiction(std::string_view s) {
  if (s == "common_law") return Jurisdiction::common_law;
  if (s == "civil_law") return Jurisdiction::civil_law;
  throw Error("unknown jurisdiction '" + std::string(s) + "'");
}

inline Language parse_language(std::string_view s) {
  if (s == "en") return Language::en;
  if (s == "zh") return Language::zh;
  throw Error("unknown language '" + std::string(s) + "'");
}

inline SectionKind parse_section_kind(std::string_view s) {
  for (SectionKind k : {SectionKind::name, SectionKind::background, SectionKind::analysis, SectionKind::order})
    if (to_string(k) == s) return k;
  throw Error("unknown section kind '" + std::string(s) + "'");
}

using SectionMap = std::map<SectionKind, Span>;

struct CaseDocument {
  std::string id;
  Jurisdiction jurisdiction = Jurisdiction::common_law;
  Language language = Language::en;
  std::string raw_text;
  SectionMap sections;

  std::string_view section(SectionKind kind) const {
    auto it = sections.find(kind);
    if (it == sections.end()) return {};
    return slice(raw_text, it->second);
  }

  friend bool operator==(const CaseDocument&, const CaseDocument&) = default;
};

/// Either an explicit candidate list or every document except the query.
struct CandidatePool {
  bool entire_corpus = false;
  std::vector<std::string> ids;

  static CandidatePool everything() { return {true, {}}; }
  friend bool operator==(const CandidatePool&, const CandidatePool&) = default;
};

struct Corpus {
  std::map<std::string, CaseDocument> documents;
  std::map<std::string, CandidatePool> candidate_pools;  // keyed by query id

  const CaseDocument& document(const std::string& id) const {
    auto it = documents.find(id);
    if (it == documents.end()) throw Error("unknown case id '" + id + "'");
    return it->second;
  }

  std::vector<std::string> query_ids() const {
    std::vector<std::string> ids;
    for (const auto& [qid, _] : candidate_pools) ids.push_back(qid);
    return ids;
  }

  /// Concrete candidate ids for a query, sorted. The entire-corpus sentinel
  /// resolves to every document other than the query itself.
  std::vector<std::string> resolve_pool(const std::string& query_id) const {
    auto it = candidate_pools.find(query_id);
    if (it == candidate_pools.end()) throw Error("'" + query_id + "' is not a query");
    std::vector<std::string> ids;
    if (it->second.entire_corpus) {
      for (const auto& [id, _] : documents)
        if (id != query_id) ids.push_back(id);
    } else {
      ids = it->second.ids;
      std::sort(ids.begin(), ids.end());
    }
    return ids;
  }

  /// Union of all pools (the searchable collection), sorted.
  std::vector<std::string> candidate_ids() const {
    std::set<std::string> all;
    for (const auto& [qid, pool] : candidate_pools) {
      if (pool.entire_corpus) {
        for (const auto& [id, _] : documents) all.insert(id);
        break;
      }
      all.insert(pool.ids.begin(), pool.ids.end());
    }
    return {all.begin(), all.end()};
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct RelevanceJudgments {
  std::map<std::string, std::set<std::string>> judgments;

  const std::set<std::string>& relevant(const std::string& qid) const {
    auto it = judgments.find(qid);
    if (it == judgments.end()) throw Error("no judgments for query '" + qid + "'");
    return it->second;
  }

  friend bool operator==(const RelevanceJudgments&, const RelevanceJudgments&) = default;
};

struct CorpusStats {
  std::size_t num_docs = 0;
  double avg_length = 0.0;
  std::size_t max_length = 0;
  std::optional<double> avg_relevant_per_query;
  std::optional<std::size_t> num_queries;
};

// ---------------------------------------------------------------------------
// French paragraph removal

namespace detail {

inline constexpr std::array<std::string_view, 50> kFrenchStopwords = {
    "le",   "la",    "les",   "de",   "des",  "du",   "un",   "une",  "et",    "est",
    "dans", "pour",  "pas",   "sur",  "au",   "aux",  "par",  "avec", "ce",    "ces",
    "cette", "qui",  "que",   "qu",   "il",   "elle", "ils",  "elles", "sont", "ont",
    "été",  "être",  "à",     "ne",   "se",   "sa",   "son",  "ses",  "leur",  "lui",
    "nous", "vous",  "mais",  "où",   "plus", "même", "l",    "d",    "en",    "ou"};

inline constexpr std::array<std::string_view, 50> kEnglishStopwords = {
    "the",  "of",    "and",   "to",    "in",    "is",   "that",  "for",   "it",   "as",
    "was",  "with",  "be",    "by",    "on",    "not",  "he",    "she",   "this", "are",
    "or",   "his",   "her",   "from",  "at",    "which", "but",  "have",  "has",  "had",
    "an",   "they",  "were",  "been",  "their", "there", "would", "will", "if",   "its",
    "any",  "all",   "no",    "so",    "what",  "who",   "when",  "we",   "our",  "i"};

inline std::vector<std::string> letter_tokens(std::string_view s) {
  std::vector<std::string> out;
  detail::english_terms(s, out);
  return out;
}

}  // namespace detail

struct StopwordRatios {
  double french = 0.0;
  double english = 0.0;
};

inline StopwordRatios stopword_ratios(std::string_view paragraph) {
  auto tokens = detail::letter_tokens(paragraph);
  if (tokens.empty()) return {};
  std::size_t fr = 0, en = 0;
  for (const auto& t : tokens) {
    if (std::find(detail::kFrenchStopwords.begin(), detail::kFrenchStopwords.end(), t) != detail::kFrenchStopwords.end()) ++fr;
    if (std::find(detail::kEnglishStopwords.begin(), detail::kEnglishStopwords.end(), t) != detail::kEnglishStopwords.end()) ++en;
  }
  double n = static_cast<double>(tokens.size());
  return {static_cast<double>(fr) / n, static_cast<double>(en) / n};
}

inline constexpr double kFrenchRatioThreshold = 0.18;

inline bool is_french_paragraph(std::string_view paragraph) {
  StopwordRatios r = stopword_ratios(paragraph);
  return r.french >= kFrenchRatioThreshold && r.english < r.french;
}

/// Drops French paragraphs from normalized text (paragraphs separated by a
/// blank line).
inline std::string remove_french_paragraphs(std::string_view normalized) {
  std::vector<std::string> kept;
  for (auto& p : text::split_paragraphs(normalized))
    if (!is_french_paragraph(p)) kept.push_back(std::move(p));
  return text::join(kept, text::kParagraphBreak);
}

// ---------------------------------------------------------------------------
// Section detection

namespace detail {

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Heading paragraphs in common-law judgments, matched after stripping
// numbering, punctuation and case.
inline std::optional<SectionKind> common_law_heading(std::string_view paragraph) {
  if (paragraph.size() > 60) return std::nullopt;
  std::string p = lower_ascii(paragraph);
  std::string words;
  for (char c : p)
    if ((c >= 'a' && c <= 'z') || c == ' ') words.push_back(c);
  std::string_view w = trim(words);
  // Roman or arabic numbering such as "II." leaves a stray leading word.
  for (std::string_view prefix : {"i ", "ii ", "iii ", "iv ", "v ", "vi ", "vii ", "viii ", "ix ", "x "})
    if (w.starts_with(prefix)) w.remove_prefix(prefix.size());
  w = trim(w);
  static const std::array<std::pair<std::string_view, SectionKind>, 19> kHeadings = {{
      {"background", SectionKind::background},
      {"facts", SectionKind::background},
      {"the facts", SectionKind::background},
      {"factual background", SectionKind::background},
      {"background facts", SectionKind::background},
      {"overview", SectionKind::background},
      {"analysis", SectionKind::analysis},
      {"issues", SectionKind::analysis},
      {"issue", SectionKind::analysis},
      {"the issues", SectionKind::analysis},
      {"discussion", SectionKind::analysis},
      {"reasons", SectionKind::analysis},
      {"analysis and decision", SectionKind::analysis},
      {"order", SectionKind::order},
      {"judgment", SectionKind::order},
      {"judgement", SectionKind::order},
      {"conclusion", SectionKind::order},
      {"disposition", SectionKind::order},
      {"decision", SectionKind::order},
  }};
  for (const auto& [heading, kind] : kHeadings)
    if (w == heading) return kind;
  return std::nullopt;
}

// Spans from ordered (offset, kind) starts; each runs to the next start.
// Later repeats of a kind are ignored and kinds must appear in canonical order
// so spans never overlap.
inline SectionMap spans_from_starts(std::vector<std::pair<std::size_t, SectionKind>> starts, std::size_t text_size) {
  std::sort(starts.begin(), starts.end());
  std::vector<std::pair<std::size_t, SectionKind>> accepted;
  for (const auto& s : starts) {
    if (!accepted.empty() && static_cast<int>(s.second) <= static_cast<int>(accepted.back().second)) continue;
    accepted.push_back(s);
  }
  SectionMap map;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    std::size_t end = i + 1 < accepted.size() ? accepted[i + 1].first : text_size;
    if (end > accepted[i].first) map[accepted[i].second] = Span{accepted[i].first, end};
  }
  return map;
}

}  // namespace detail

/// Locates the name / background / analysis / order parts of a normalized
/// judgment. Only sections that can be located are returned.
inline SectionMap detect_sections(std::string_view text, Jurisdiction jurisdiction) {
  std::vector<std::pair<std::size_t, SectionKind>> starts;
  if (jurisdiction == Jurisdiction::common_law) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find(text::kParagraphBreak, pos);
      if (end == std::string_view::npos) end = text.size();
      if (auto kind = detail::common_law_heading(text.substr(pos, end - pos))) starts.emplace_back(pos, *kind);
      pos = end + text::kParagraphBreak.size();
    }
  } else {
    auto find_first = [&](std::initializer_list<std::string_view> markers) {
      std::size_t best = std::string_view::npos;
      for (auto m : markers) best = std::min(best, text.find(m));
      return best;
    };
    std::size_t bg = find_first({"公诉机关指控", "经审理查明", "检察院指控"});
    std::size_t an = find_first({"本院认为"});
    std::size_t od = find_first({"判决如下", "裁定如下"});
    if (bg != std::string_view::npos) starts.emplace_back(bg, SectionKind::background);
    if (an != std::string_view::npos) starts.emplace_back(an, SectionKind::analysis);
    if (od != std::string_view::npos) starts.emplace_back(od, SectionKind::order);
  }
  if (!starts.empty()) {
    std::size_t first = std::min_element(starts.begin(), starts.end())->first;
    if (first > 0) starts.emplace_back(0, SectionKind::name);
  }
  return detail::spans_from_starts(std::move(starts), text.size());
}

/// Checks the CaseDocument invariants; throws on violation.
inline void validate_document(const CaseDocument& doc) {
  if (doc.id.empty()) throw Error("case with empty id");
  if (doc.raw_text.empty()) throw Error("case '" + doc.id + "' is empty after normalization");
  std::size_t last_end = 0;
  for (const auto& [kind, span] : doc.sections) {
    if (span.begin > span.end || span.end > doc.raw_text.size())
      throw Error("case '" + doc.id + "': section " + std::string(to_string(kind)) + " out of bounds");
    if (span.begin < last_end) throw Error("case '" + doc.id + "': overlapping sections");
    last_end = span.end;
  }
}

inline CaseDocument make_document(std::string id, Jurisdiction j, Language l, std::string_view raw, bool drop_french) {
  CaseDocument doc;
  doc.id = std::move(id);
  doc.jurisdiction = j;
  doc.language = l;
  doc.raw_text = text::normalize_document(raw);
  if (drop_french) doc.raw_text = remove_french_paragraphs(doc.raw_text);
  doc.sections = detect_sections(doc.raw_text, j);
  return doc;
}

// ---------------------------------------------------------------------------
// Loaders

struct CorpusLoad {
  Corpus corpus;
  RelevanceJudgments judgments;
  std::vector<Diagnostic> diagnostics;
};

inline constexpr std::string_view kColieeManifest = "queries.manifest";

inline RelevanceJudgments load_judgments_json(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("malformed judgments file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error("judgments file " + path.string() + " must hold a JSON object");
  RelevanceJudgments out;
  for (auto& [qid, ids] : j.items()) {
    if (!ids.is_array()) throw Error("judgments for '" + qid + "' must be an array");
    auto& set = out.judgments[qid];
    for (const auto& id : ids) set.insert(id.is_string() ? id.get<std::string>() : id.dump());
  }
  return out;
}

/// Drops queries whose relevant set is empty or that lack a pool, and fails
/// on relevant ids outside the pool.
inline void reconcile_judgments(const Corpus& corpus, RelevanceJudgments& judgments, std::vector<Diagnostic>& diags) {
  std::vector<std::string> offenders;
  for (auto it = judgments.judgments.begin(); it != judgments.judgments.end();) {
    const auto& [qid, rel] = *it;
    if (!corpus.candidate_pools.contains(qid)) {
      diags.push_back({qid, "judged query has no candidate pool; ignored"});
      it = judgments.judgments.erase(it);
      continue;
    }
    if (rel.empty()) {
      diags.push_back({qid, "query has no relevant cases; rejected"});
      it = judgments.judgments.erase(it);
      continue;
    }
    auto pool = corpus.resolve_pool(qid);
    for (const auto& id : rel)
      if (!std::binary_search(pool.begin(), pool.end(), id)) offenders.push_back(qid + ":" + id);
    ++it;
  }
  if (!offenders.empty()) {
    std::string msg = "judgments reference cases missing from the candidate pool:";
    for (const auto& o : offenders) msg += " " + o;
    throw Error(msg);
  }
}

/// COLIEE-style layout: <root>/*.txt, one case per file, plus
/// <root>/queries.manifest listing query ids. If `labels` is given, the
/// judgments JSON is loaded and checked against the pools.
inline CorpusLoad load_coliee_corpus(const fs::path& root, const std::optional<fs::path>& labels = std::nullopt,
                                     unsigned jobs = 1) {
  if (!fs::is_directory(root)) throw ConfigError("not a directory: " + root.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  if (files.empty()) throw Error("no case files found in " + root.string());
  std::sort(files.begin(), files.end());

  fs::path manifest = root / kColieeManifest;
  if (!fs::exists(manifest)) throw ConfigError("missing " + manifest.string() + " (one query id per line)");

  CorpusLoad out;
  std::vector<std::optional<CaseDocument>> docs(files.size());
  std::vector<std::optional<Diagnostic>> errors(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      CaseDocument doc = make_document(files[i].stem().string(), Jurisdiction::common_law, Language::en,
                                       read_file(files[i]), /*drop_french=*/true);
      validate_document(doc);
      docs[i] = std::move(doc);
    } catch (const std::exception& e) {
      errors[i] = Diagnostic{files[i].string(), e.what()};
    }
  });
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (errors[i]) out.diagnostics.push_back(*errors[i]);
    if (docs[i]) {
      std::string id = docs[i]->id;
      out.corpus.documents.emplace(std::move(id), std::move(*docs[i]));
    }
  }
  if (out.corpus.documents.empty()) throw Error("no readable case files in " + root.string());

  for (const auto& line : read_lines(manifest)) {
    std::string_view qid = trim(line);
    if (qid.empty() || qid.front() == '#') continue;
    std::string id(qid);
    if (id.ends_with(".txt")) id.resize(id.size() - 4);
    if (!out.corpus.documents.contains(id)) throw Error("manifest query '" + id + "' has no case file");
    out.corpus.candidate_pools[id] = CandidatePool::everything();
  }
  if (labels) {
    out.judgments = load_judgments_json(*labels);
    reconcile_judgments(out.corpus, out.judgments, out.diagnostics);
  }
  return out;
}

inline constexpr std::size_t kLecardPoolSize = 100;

/// LeCaRD-style layout: a queries JSONL ({"id","text"} per line), candidate
/// files at <candidates_root>/<query-id>/<candidate-id>.txt, and a labels
/// JSON {query-id: [candidate-id, ...]}.
inline CorpusLoad load_lecard_corpus(const fs::path& query_file, const fs::path& candidates_root,
                                     const fs::path& labels_file, unsigned jobs = 1) {
  if (!fs::exists(query_file)) throw ConfigError("missing query file " + query_file.string());
  if (!fs::is_directory(candidates_root)) throw ConfigError("not a directory: " + candidates_root.string());
  if (!fs::exists(labels_file)) throw ConfigError("missing labels file " + labels_file.string());

  CorpusLoad out;
  auto add_document = [&](CaseDocument doc) {
    auto [it, inserted] = out.corpus.documents.emplace(doc.id, doc);
    if (!inserted && it->second.raw_text != doc.raw_text)
      throw Error("case id '" + doc.id + "' appears twice with different text");
  };

  auto lines = read_lines(query_file);
  std::vector<std::string> query_ids;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    std::string where = query_file.string() + ":" + std::to_string(n + 1);
    try {
      json rec = json::parse(lines[n]);
      if (!rec.contains("id") || !rec.contains("text")) throw Error("query record needs \"id\" and \"text\"");
      std::string id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
      CaseDocument doc = make_document(id, Jurisdiction::civil_law, Language::zh, rec["text"].get<std::string>(), false);
      validate_document(doc);
      add_document(std::move(doc));
      query_ids.push_back(id);
    } catch (const json::exception& e) {
      out.diagnostics.push_back({where, e.what()});
    } catch (const Error& e) {
      out.diagnostics.push_back({where, e.what()});
    }
  }

  for (const auto& qid : query_ids) {
    fs::path dir = candidates_root / qid;
    CandidatePool pool;
    if (!fs::is_directory(dir)) {
      out.diagnostics.push_back({dir.string(), "no candidate directory for query"});
      out.corpus.candidate_pools[qid] = pool;
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<std::optional<CaseDocument>> docs(files.size());
    std::vector<std::optional<Diagnostic>> errors(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
      try {
        CaseDocument doc = make_document(files[i].stem().string(), Jurisdiction::civil_law, Language::zh,
                                         read_file(files[i]), false);
        validate_document(doc);
        docs[i] = std::move(doc);
      } catch (const std::exception& e) {
        errors[i] = Diagnostic{files[i].string(), e.what()};
      }
    });
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (errors[i]) out.diagnostics.push_back(*errors[i]);
      if (!docs[i]) continue;
      pool.ids.push_back(docs[i]->id);
      add_document(std::move(*docs[i]));
    }
    if (pool.ids.size() != kLecardPoolSize)
      out.diagnostics.push_back({qid, "candidate pool has " + std::to_string(pool.ids.size()) + " cases, expected " +
                                          std::to_string(kLecardPoolSize)});
    out.corpus.candidate_pools[qid] = std::move(pool);
  }

  out.judgments = load_judgments_json(labels_file);
  for (const auto& qid : query_ids)
    if (!out.judgments.judgments.contains(qid)) out.diagnostics.push_back({qid, "query has no labels; rejected"});
  reconcile_judgments(out.corpus, out.judgments, out.diagnostics);
  // Queries without usable judgments cannot be evaluated; drop their pools.
  for (auto it = out.corpus.candidate_pools.begin(); it != out.corpus.candidate_pools.end();) {
    if (!out.judgments.judgments.contains(it->first))
      it = out.corpus.candidate_pools.erase(it);
    else
      ++it;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalized JSONL

inline json to_json(const CaseDocument& doc) {
  json sections = json::object();
  for (const auto& [kind, span] : doc.sections) sections[std::string(to_string(kind))] = {span.begin, span.end};
  return json{{"id", doc.id},
              {"jurisdiction", to_string(doc.jurisdiction)},
              {"language", to_string(doc.language)},
              {"text", doc.raw_text},
              {"sections", sections}};
}

inline CaseDocument document_from_json(const json& j) {
  CaseDocument doc;
  doc.id = j.at("id").get<std::string>();
  doc.jurisdiction = parse_jurisdiction(j.at("jurisdiction").get<std::string>());
  doc.language = parse_language(j.at("language").get<std::string>());
  doc.raw_text = j.at("text").get<std::string>();
  if (j.contains("sections"))
    for (auto& [k, v] : j.at("sections").items())
      doc.sections[parse_section_kind(k)] = Span{v.at(0).get<std::size_t>(), v.at(1).get<std::size_t>()};
  validate_document(doc);
  return doc;
}

/// One JSON object per line, documents in id order.
inline std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& [id, doc] : corpus.documents) {
    out += to_json(doc).dump();
    out += '\n';
  }
  return out;
}

inline json pools_to_json(const Corpus& corpus) {
  json j = json::object();
  for (const auto& [qid, pool] : corpus.candidate_pools) j[qid] = pool.entire_corpus ? json("*") : json(pool.ids);
  return j;
}

inline json judgments_to_json(const RelevanceJudgments& judgments) {
  json j = json::object();
  for (const auto& [qid, rel] : judgments.judgments) j[qid] = std::vector<std::string>(rel.begin(), rel.end());
  return j;
}

struct JsonlDocuments {
  std::vector<CaseDocument> documents;
  std::vector<Diagnostic> errors;
};

/// Lenient reader: malformed lines become diagnostics.
inline JsonlDocuments read_documents_jsonl(const fs::path& path) {
  JsonlDocuments out;
  auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      out.documents.push_back(document_from_json(json::parse(lines[n])));
    } catch (const std::exception& e) {
      out.errors.push_back({path.string() + ":" + std::to_string(n + 1), e.what()});
    }
  }
  return out;
}

/// Strict reload of a corpus written by corpus_to_jsonl + pools_to_json.
inline Corpus load_normalized_corpus(const fs::path& jsonl, const fs::path& pools_json) {
  Corpus corpus;
  auto docs = read_documents_jsonl(jsonl);
  if (!docs.errors.empty()) throw Error(docs.errors.front().where + ": " + docs.errors.front().message);
  for (auto& d : docs.documents) {
    std::string id = d.id;
    if (!corpus.documents.emplace(id, std::move(d)).second) throw Error("duplicate case id '" + id + "' in " + jsonl.string());
  }
  json pools = json::parse(read_file(pools_json));
  for (auto& [qid, v] : pools.items()) {
    if (!corpus.documents.contains(qid)) throw Error("query '" + qid + "' has no document");
    if (v.is_string() && v.get<std::string>() == "*") {
      corpus.candidate_pools[qid] = CandidatePool::everything();
      continue;
    }
    CandidatePool pool;
    for (const auto& id : v) {
      auto s = id.get<std::string>();
      if (!corpus.documents.contains(s)) throw Error("pooled candidate '" + s + "' has no document");
      pool.ids.push_back(s);
    }
    corpus.candidate_pools[qid] = std::move(pool);
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Statistics

inline CorpusStats corpus_stats(const Corpus& corpus, const RelevanceJudgments* judgments, const Tokenizer& tokenizer) {
  if (corpus.documents.empty()) throw Error("corpus_stats: empty corpus");
  CorpusStats stats;
  stats.num_docs = corpus.documents.size();
  double total = 0.0;
  for (const auto& [id, doc] : corpus.documents) {
    std::size_t n = tokenizer.tokenize(doc.raw_text).size();
    total += static_cast<double>(n);
    stats.max_length = std::max(stats.max_length, n);
  }
  stats.avg_length = total / static_cast<double>(stats.num_docs);
  if (judgments && !judgments->judgments.empty()) {
    double rel = 0.0;
    for (const auto& [qid, ids] : judgments->judgments) rel += static_cast<double>(ids.size());
    stats.num_queries = judgments->judgments.size();
    stats.avg_relevant_per_query = rel / static_cast<double>(judgments->judgments.size());
  }
  return stats;
}

inline json to_json(const CorpusStats& s) {
  json j{{"num_docs", s.num_docs}, {"avg_length", s.avg_length}, {"max_length", s.max_length}};
  j["avg_relevant_per_query"] = s.avg_relevant_per_query ? json(*s.avg_relevant_per_query) : json(nullptr);
  j["num_queries"] = s.num_queries ? json(*s.num_queries) : json(nullptr);
  return j;
}

/// Two-column text table in the shape of a dataset statistics table.
inline std::string format_stats_table(const CorpusStats& s, std::string_view dataset, Language language) {
  char buf[512];
  std::string out;
  auto row = [&](std::string_view label, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-28s %s\n", std::string(label).c_str(), value.c_str());
    out += buf;
  };
  row("Dataset", std::string(dataset));
  row("Language", language == Language::en ? "English" : "Chinese");
  row("Cases", std::to_string(s.num_docs));
  std::snprintf(buf, sizeof buf, "%.0f", s.avg_length);
  row("Avg. length/case", buf);
  row("Largest length of cases", std::to_string(s.max_length));
  if (s.avg_relevant_per_query) {
    std::snprintf(buf, sizeof buf, "%.2f", *s.avg_relevant_per_query);
    row("Avg. relevant cases/query", buf);
  }
  return out;
}

}  // namespace promptcase
