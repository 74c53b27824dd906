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

// Run configuration and the command implementations behind the CLI.
//
// Every command reads its inputs from and writes its outputs to the run
// directory (RunConfig::out), plus a <command>.manifest.json holding the
// fully resolved config. Feeding a manifest back as --config reproduces the
// command's outputs.

#pragma once

#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcase/backend.hpp"
#include "promptcase/bm25.hpp"
#include "promptcase/cache.hpp"
#include "promptcase/corpus.hpp"
#include "promptcase/encoding.hpp"
#include "promptcase/eval.hpp"
#include "promptcase/extraction.hpp"
#include "promptcase/remote.hpp"
#include "promptcase/retrieval.hpp"
#include "promptcase/store.hpp"
#include "promptcase/tokenizer.hpp"
#include "promptcase/trec.hpp"
#include "promptcase/util.hpp"

#ifndef PROMPTCASE_ASSET_DIR
#define PROMPTCASE_ASSET_DIR "assets"
#endif

namespace promptcase {

// ---------------------------------------------------------------------------
// Config

enum class DatasetKind { coliee, lecard };
enum class RetrievalMode { dense, bm25, two_stage, bm25_promptcase };

inline std::string_view to_string(DatasetKind k) { return k == DatasetKind::coliee ? "coliee" : "lecard"; }
inline DatasetKind parse_dataset_kind(std::string_view s) {
  if (s == "coliee") return DatasetKind::coliee;
  if (s == "lecard") return DatasetKind::lecard;
  throw ConfigError("dataset.kind must be coliee or lecard, got '" + std::string(s) + "'");
}

inline std::string_view to_string(RetrievalMode m) {
  switch (m) {
    case RetrievalMode::dense: return "dense";
    case RetrievalMode::bm25: return "bm25";
    case RetrievalMode::two_stage: return "two_stage";
    case RetrievalMode::bm25_promptcase: return "bm25_promptcase";
  }
  return "?";
}
inline RetrievalMode parse_retrieval_mode(std::string_view s) {
  if (s == "dense") return RetrievalMode::dense;
  if (s == "bm25") return RetrievalMode::bm25;
  if (s == "two_stage") return RetrievalMode::two_stage;
  if (s == "bm25_promptcase") return RetrievalMode::bm25_promptcase;
  throw ConfigError("retrieval.mode must be dense, bm25, two_stage or bm25_promptcase, got '" + std::string(s) + "'");
}

struct BackendConfig {
  std::string kind = "mock";  // mock | file | remote
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::size_t max_tokens = 512;
  std::string url;
  std::string model;
  long timeout_ms = 0;
  std::size_t batch_size = 32;
  std::string path;
};

struct RunConfig {
  DatasetKind dataset = DatasetKind::coliee;
  std::string root;        // coliee: case directory
  std::string queries;     // lecard: query JSONL
  std::string candidates;  // lecard: candidate root
  std::string labels;      // judgments JSON (optional for coliee)

  std::optional<TokenizerKind> tokenizer;  // default follows the dataset language
  Bm25Params bm25;
  std::string template_preset = "A";
  std::string template_file;
  ReformulationVariant variant;
  BackendConfig backend;
  std::string cache_dir;
  std::string summarizer_kind = "none";  // none | remote
  std::string summarizer_url;
  long summarizer_timeout_ms = 60000;
  std::string lexicon;
  RetrievalMode mode = RetrievalMode::dense;
  std::size_t stage1_depth = 10;
  std::size_t topk = 100;
  std::size_t eval_k = 5;
  std::string out = "run";
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  Language language() const { return dataset == DatasetKind::coliee ? Language::en : Language::zh; }
  TokenizerKind tokenizer_kind() const {
    if (tokenizer) return *tokenizer;
    return language() == Language::en ? TokenizerKind::english_simple : TokenizerKind::chinese_bigram;
  }
  fs::path out_dir() const { return fs::path(out); }
  fs::path lexicon_path() const { return lexicon.empty() ? fs::path(PROMPTCASE_ASSET_DIR) / "charges_zh.txt" : fs::path(lexicon); }
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

inline std::string resolve_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return {};
  std::string s = j[key].get<std::string>();
  if (s.empty()) return {};
  fs::path p(s);
  if (p.is_relative()) p = base / p;
  return fs::absolute(p).lexically_normal().string();
}

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j[key].is_null()) target = j[key].get<T>();
}

}  // namespace detail

/// Parses a config object. Relative paths resolve against `base`.
inline RunConfig config_from_json(const json& j, const fs::path& base) {
  using detail::read_opt;
  using detail::resolve_path;
  RunConfig c;
  try {
    detail::reject_unknown(j, {"dataset", "tokenizer", "bm25", "template", "variant", "backend", "cache_dir", "summarizer",
                               "lexicon", "retrieval", "eval", "out", "seed", "jobs"},
                           "config");
    if (!j.contains("dataset")) throw ConfigError("config needs a \"dataset\" section");
    const json& d = j["dataset"];
    detail::reject_unknown(d, {"kind", "root", "queries", "candidates", "labels"}, "dataset");
    c.dataset = parse_dataset_kind(d.at("kind").get<std::string>());
    c.root = resolve_path(d, "root", base);
    c.queries = resolve_path(d, "queries", base);
    c.candidates = resolve_path(d, "candidates", base);
    c.labels = resolve_path(d, "labels", base);

    if (j.contains("tokenizer") && !j["tokenizer"].is_null())
      c.tokenizer = parse_tokenizer_kind(j["tokenizer"].get<std::string>());
    if (j.contains("bm25")) {
      detail::reject_unknown(j["bm25"], {"k1", "b"}, "bm25");
      read_opt(j["bm25"], "k1", c.bm25.k1);
      read_opt(j["bm25"], "b", c.bm25.b);
    }
    if (j.contains("template")) {
      const json& t = j["template"];
      detail::reject_unknown(t, {"preset", "file"}, "template");
      read_opt(t, "preset", c.template_preset);
      c.template_file = resolve_path(t, "file", base);
      if (!c.template_file.empty()) c.template_preset.clear();
    }
    if (j.contains("variant")) {
      const json& v = j["variant"];
      detail::reject_unknown(v, {"feature_mode", "use_prompt"}, "variant");
      if (v.contains("feature_mode")) c.variant.feature_mode = parse_feature_mode(v["feature_mode"].get<std::string>());
      read_opt(v, "use_prompt", c.variant.use_prompt);
    }
    if (j.contains("backend")) {
      const json& b = j["backend"];
      detail::reject_unknown(b, {"kind", "dim", "seed", "max_tokens", "url", "model", "timeout_ms", "batch_size", "path"},
                             "backend");
      read_opt(b, "kind", c.backend.kind);
      read_opt(b, "dim", c.backend.dim);
      read_opt(b, "seed", c.backend.seed);
      read_opt(b, "max_tokens", c.backend.max_tokens);
      read_opt(b, "url", c.backend.url);
      read_opt(b, "model", c.backend.model);
      read_opt(b, "timeout_ms", c.backend.timeout_ms);
      read_opt(b, "batch_size", c.backend.batch_size);
      c.backend.path = resolve_path(b, "path", base);
      if (c.backend.kind != "mock" && c.backend.kind != "file" && c.backend.kind != "remote")
        throw ConfigError("backend.kind must be mock, file or remote");
    }
    c.cache_dir = resolve_path(j, "cache_dir", base);
    if (j.contains("summarizer")) {
      const json& s = j["summarizer"];
      detail::reject_unknown(s, {"kind", "url", "timeout_ms"}, "summarizer");
      read_opt(s, "kind", c.summarizer_kind);
      read_opt(s, "url", c.summarizer_url);
      read_opt(s, "timeout_ms", c.summarizer_timeout_ms);
      if (c.summarizer_kind != "none" && c.summarizer_kind != "remote")
        throw ConfigError("summarizer.kind must be none or remote");
    }
    c.lexicon = resolve_path(j, "lexicon", base);
    if (j.contains("retrieval")) {
      const json& r = j["retrieval"];
      detail::reject_unknown(r, {"mode", "stage1_depth", "topk"}, "retrieval");
      if (r.contains("mode")) c.mode = parse_retrieval_mode(r["mode"].get<std::string>());
      read_opt(r, "stage1_depth", c.stage1_depth);
      read_opt(r, "topk", c.topk);
    }
    if (j.contains("eval")) {
      detail::reject_unknown(j["eval"], {"k"}, "eval");
      read_opt(j["eval"], "k", c.eval_k);
    }
    if (j.contains("out")) c.out = resolve_path(j, "out", base);
    else c.out = fs::absolute(base / c.out).lexically_normal().string();
    read_opt(j, "seed", c.seed);
    read_opt(j, "jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.eval_k == 0) throw ConfigError("eval.k must be >= 1");
  if (c.topk == 0 || c.stage1_depth == 0) throw ConfigError("retrieval depths must be >= 1");
  if (c.jobs == 0) c.jobs = 1;
  return c;
}

/// The resolved config, with every field spelled out.
inline json to_json(const RunConfig& c) {
  json dataset{{"kind", to_string(c.dataset)}};
  if (c.dataset == DatasetKind::coliee) {
    dataset["root"] = c.root;
  } else {
    dataset["queries"] = c.queries;
    dataset["candidates"] = c.candidates;
  }
  dataset["labels"] = c.labels.empty() ? json(nullptr) : json(c.labels);
  json tmpl = c.template_file.empty() ? json{{"preset", c.template_preset}} : json{{"file", c.template_file}};
  return json{
      {"dataset", dataset},
      {"tokenizer", to_string(c.tokenizer_kind())},
      {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
      {"template", tmpl},
      {"variant", {{"feature_mode", to_string(c.variant.feature_mode)}, {"use_prompt", c.variant.use_prompt}}},
      {"backend",
       {{"kind", c.backend.kind},
        {"dim", c.backend.dim},
        {"seed", c.backend.seed},
        {"max_tokens", c.backend.max_tokens},
        {"url", c.backend.url},
        {"model", c.backend.model},
        {"timeout_ms", c.backend.timeout_ms},
        {"batch_size", c.backend.batch_size},
        {"path", c.backend.path}}},
      {"cache_dir", c.cache_dir},
      {"summarizer", {{"kind", c.summarizer_kind}, {"url", c.summarizer_url}, {"timeout_ms", c.summarizer_timeout_ms}}},
      {"lexicon", c.lexicon_path().string()},
      {"retrieval", {{"mode", to_string(c.mode)}, {"stage1_depth", c.stage1_depth}, {"topk", c.topk}}},
      {"eval", {{"k", c.eval_k}}},
      {"out", c.out},
      {"seed", c.seed},
      {"jobs", c.jobs},
  };
}

/// Loads a config file, or the "config" member of a manifest file.
inline RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("command") && j.contains("config")) j = j["config"];
  return config_from_json(j, fs::absolute(path).parent_path());
}

inline void write_manifest(const RunConfig& c, std::string_view command, const std::optional<BackendDescriptor>& backend) {
  json m{{"command", command}, {"config", to_json(c)}, {"backend", backend ? to_json(*backend) : json(nullptr)}};
  write_file_atomic(c.out_dir() / (std::string(command) + ".manifest.json"), m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared plumbing

/// Test seams and output streams.
struct PipelineContext {
  const EmbeddingBackend* backend = nullptr;  // overrides config.backend
  const Summarizer* summarizer = nullptr;     // overrides config.summarizer
  std::ostream* out = &std::cout;
};

inline std::unique_ptr<EmbeddingBackend> make_backend(const BackendConfig& b) {
  if (b.kind == "mock") return std::make_unique<MockBackend>(b.dim, b.seed, b.max_tokens);
  if (b.kind == "file") {
    if (b.path.empty()) throw ConfigError("backend.path is required for the file backend");
    return std::make_unique<FileBackend>(b.path);
  }
  RemoteBackendConfig rc;
  rc.url = b.url;
  rc.model = b.model;
  rc.timeout_ms = b.timeout_ms;
  rc.max_tokens = b.max_tokens;
  rc.batch_size = b.batch_size;
  rc.dim = b.dim;
  return std::make_unique<RemoteBackend>(rc);
}

/// Backend for a run: the context override or the configured one, behind
/// the embedding cache when cache_dir is set.
class BackendHandle {
 public:
  BackendHandle(const RunConfig& c, const PipelineContext& ctx) {
    if (ctx.backend) {
      base_ = ctx.backend;
    } else {
      owned_ = make_backend(c.backend);
      base_ = owned_.get();
    }
    if (!c.cache_dir.empty()) {
      cache_ = std::make_unique<EmbeddingCache>(c.cache_dir, base_->descriptor());
      cached_ = std::make_unique<CachedBackend>(*base_, *cache_);
    }
  }
  const EmbeddingBackend& get() const { return cached_ ? *cached_ : *base_; }
  BackendDescriptor descriptor() const { return base_->descriptor(); }

 private:
  std::unique_ptr<EmbeddingBackend> owned_;
  const EmbeddingBackend* base_ = nullptr;
  std::unique_ptr<EmbeddingCache> cache_;
  std::unique_ptr<CachedBackend> cached_;
};

namespace files {
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kPools = "pools.json";
inline constexpr const char* kJudgments = "judgments.json";
inline constexpr const char* kStatsJson = "stats.json";
inline constexpr const char* kStatsText = "stats.txt";
inline constexpr const char* kFeatures = "features.jsonl";
inline constexpr const char* kExtractErrors = "extract_errors.jsonl";
inline constexpr const char* kStore = "reps.bin";
inline constexpr const char* kRun = "run.trec";
}  // namespace files

inline fs::path require_input(const RunConfig& c, const char* name, std::string_view producer) {
  fs::path p = c.out_dir() / name;
  if (!fs::exists(p))
    throw ConfigError("missing " + p.string() + "; run '" + std::string(producer) + "' first");
  return p;
}

inline Corpus load_run_corpus(const RunConfig& c) {
  return load_normalized_corpus(require_input(c, files::kCorpus, "ingest"), require_input(c, files::kPools, "ingest"));
}

inline RelevanceJudgments load_run_judgments(const RunConfig& c) {
  return load_judgments_json(require_input(c, files::kJudgments, "ingest"));
}

inline std::map<std::string, LegalFeatures> load_run_features(const RunConfig& c, const Corpus& corpus) {
  return load_features_jsonl(require_input(c, files::kFeatures, "extract"), corpus);
}

inline PromptTemplate resolve_template(const RunConfig& c) {
  PromptTemplate t = c.template_file.empty() ? preset_template(c.template_preset, c.language())
                                             : load_template_file(c.template_file);
  if (t.language != c.language())
    throw ConfigError("template '" + t.name + "' is " + std::string(to_string(t.language)) + " but the dataset is " +
                      std::string(to_string(c.language())));
  return t;
}

/// Features for a case, or empty features when extraction produced none.
inline LegalFeatures features_or_empty(const std::map<std::string, LegalFeatures>& features, const CaseDocument& doc) {
  auto it = features.find(doc.id);
  if (it != features.end()) return it->second;
  LegalFeatures f;
  f.case_id = doc.id;
  f.language = doc.language;
  return f;
}

/// Encodes every case that can be encoded under the variant: all cases for
/// whole_text, otherwise the cases with extracted features.
inline RepresentationStore encode_corpus(const Corpus& corpus, const std::map<std::string, LegalFeatures>& features,
                                         const PromptTemplate& t, const ReformulationVariant& v,
                                         const EmbeddingBackend& backend, std::uint64_t seed, unsigned jobs,
                                         std::size_t batch_cases = 16) {
  std::vector<std::string> pool = issue_pool(features, t.language);
  std::vector<EncodeItem> items;
  std::size_t skipped = 0;
  for (const auto& [id, doc] : corpus.documents) {
    auto it = features.find(id);
    if (it == features.end() && v.feature_mode != FeatureMode::whole_text) {
      ++skipped;
      continue;
    }
    items.push_back({features_or_empty(features, doc), doc.raw_text, instantiate_template(t, id, pool, seed)});
  }
  if (skipped) log_warning(std::to_string(skipped) + " case(s) have no extracted features and were not encoded");
  if (items.empty()) throw Error("nothing to encode");
  RepresentationStore store;
  store.variant = v;
  store.template_name = t.name;
  store.backend = backend.descriptor();
  store.reps = encode_cases(items, v, backend, jobs, batch_cases);
  return store;
}

/// Dense ranking over a pool. Pool members without a representation follow
/// the scored block in id order.
inline RankedList dense_rank_pool(const CaseRepresentation& query, const std::vector<std::string>& pool,
                                  const RepresentationLookup& reps, std::size_t k) {
  std::vector<const CaseRepresentation*> scored;
  std::vector<std::string> missing;
  for (const auto& id : pool) {
    if (const CaseRepresentation* r = reps(id))
      scored.push_back(r);
    else
      missing.push_back(id);
  }
  RankedList out = dense_retrieve(query, scored, scored.size());
  double floor = out.entries.empty() ? 0.0 : out.entries.back().score;
  for (std::size_t i = 0; i < missing.size(); ++i) out.entries.push_back({missing[i], floor - static_cast<double>(i + 1)});
  if (out.entries.size() > k) out.entries.resize(k);
  return out;
}

struct RetrievalInputs {
  const Corpus* corpus = nullptr;
  const std::map<std::string, LegalFeatures>* features = nullptr;  // bm25_promptcase
  const RepresentationStore* store = nullptr;                      // dense, two_stage
  PromptTemplate prompt;                                           // bm25_promptcase
};

inline RunFile run_retrieval(const RunConfig& c, const RetrievalInputs& in) {
  const Corpus& corpus = *in.corpus;
  const RetrievalMode mode = c.mode;
  const bool needs_store = mode == RetrievalMode::dense || mode == RetrievalMode::two_stage;
  if (needs_store && !in.store) throw ConfigError("retrieval mode needs a representation store; run 'encode' first");
  if (mode == RetrievalMode::bm25_promptcase && !in.features)
    throw ConfigError("bm25_promptcase needs extracted features; run 'extract' first");

  std::map<std::string, const CaseRepresentation*> rep_index;
  if (in.store)
    for (const auto& r : in.store->reps) rep_index[r.case_id] = &r;
  RepresentationLookup lookup = [&](const std::string& id) -> const CaseRepresentation* {
    auto it = rep_index.find(id);
    return it == rep_index.end() ? nullptr : it->second;
  };

  auto tokenizer = make_tokenizer(c.tokenizer_kind());
  std::vector<std::string> pool_prompt_issues;
  if (mode == RetrievalMode::bm25_promptcase) pool_prompt_issues = issue_pool(*in.features, in.prompt.language);
  auto lexical_text = [&](const CaseDocument& doc) -> std::string {
    if (mode != RetrievalMode::bm25_promptcase) return doc.raw_text;
    auto it = in.features->find(doc.id);
    if (it == in.features->end()) return doc.raw_text;
    PromptTemplate t = c.variant.use_prompt ? instantiate_template(in.prompt, doc.id, pool_prompt_issues, c.seed)
                                            : preset_template("NA", doc.language);
    return reformulate(LexicalDocument{doc.id, doc.raw_text, false}, it->second, t).text;
  };

  std::optional<Bm25Index> index;
  if (mode != RetrievalMode::dense) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& id : corpus.candidate_ids()) docs.emplace_back(id, lexical_text(corpus.document(id)));
    index = Bm25Index::build(docs, *tokenizer, c.bm25, c.jobs);
  }

  const std::vector<std::string> queries = corpus.query_ids();
  RunFile run;
  run.tag = std::string(to_string(mode));
  run.lists.resize(queries.size());
  std::size_t missing_query_reps = 0;
  for (const auto& qid : queries)
    if (needs_store && !lookup(qid)) ++missing_query_reps;
  if (missing_query_reps)
    log_warning(std::to_string(missing_query_reps) + " query case(s) have no representation; ranked by BM25 order or id");

  parallel_for(queries.size(), c.jobs, [&](std::size_t i) {
    const std::string& qid = queries[i];
    std::vector<std::string> pool = corpus.resolve_pool(qid);
    const CaseDocument& qdoc = corpus.document(qid);
    switch (mode) {
      case RetrievalMode::bm25:
      case RetrievalMode::bm25_promptcase:
        run.lists[i] = bm25_retrieve(*index, *tokenizer, lexical_text(qdoc), pool, c.topk, qid);
        break;
      case RetrievalMode::dense: {
        const CaseRepresentation* q = lookup(qid);
        if (q) {
          run.lists[i] = dense_rank_pool(*q, pool, lookup, c.topk);
        } else {
          RankedList l{qid, {}, RankStage::dense};
          for (std::size_t r = 0; r < pool.size() && r < c.topk; ++r) l.entries.push_back({pool[r], -static_cast<double>(r + 1)});
          run.lists[i] = std::move(l);
        }
        run.lists[i].query_id = qid;
        break;
      }
      case RetrievalMode::two_stage: {
        std::size_t k_final = std::min(c.topk, c.stage1_depth);
        run.lists[i] = two_stage_retrieve(*index, tokenizer->tokenize(qdoc.raw_text), pool, lookup(qid), lookup,
                                          c.stage1_depth, k_final, qid);
        break;
      }
    }
  });
  return run;
}

// ---------------------------------------------------------------------------
// Commands. Each returns the process exit code for a completed run; failures
// are reported by exception.

inline int cmd_ingest(const RunConfig& c, const PipelineContext& ctx = {}) {
  CorpusLoad load;
  if (c.dataset == DatasetKind::coliee) {
    if (c.root.empty()) throw ConfigError("dataset.root is required for coliee");
    std::optional<fs::path> labels;
    if (!c.labels.empty()) labels = c.labels;
    load = load_coliee_corpus(c.root, labels, c.jobs);
    if (labels) {
      for (auto it = load.corpus.candidate_pools.begin(); it != load.corpus.candidate_pools.end();) {
        if (load.judgments.judgments.contains(it->first)) {
          ++it;
          continue;
        }
        load.diagnostics.push_back({it->first, "query has no judgments; dropped"});
        it = load.corpus.candidate_pools.erase(it);
      }
    }
  } else {
    if (c.queries.empty() || c.candidates.empty() || c.labels.empty())
      throw ConfigError("dataset.queries, dataset.candidates and dataset.labels are required for lecard");
    load = load_lecard_corpus(c.queries, c.candidates, c.labels, c.jobs);
  }
  for (const auto& d : load.diagnostics) log_warning(d.where + ": " + d.message);
  if (load.corpus.candidate_pools.empty()) throw Error("dataset has no usable queries");

  fs::create_directories(c.out_dir());
  auto tokenizer = make_tokenizer(c.tokenizer_kind());
  CorpusStats stats = corpus_stats(load.corpus, c.labels.empty() ? nullptr : &load.judgments, *tokenizer);
  write_file_atomic(c.out_dir() / files::kCorpus, corpus_to_jsonl(load.corpus));
  write_file_atomic(c.out_dir() / files::kPools, pools_to_json(load.corpus).dump(2) + "\n");
  write_file_atomic(c.out_dir() / files::kJudgments, judgments_to_json(load.judgments).dump(2) + "\n");
  write_file_atomic(c.out_dir() / files::kStatsJson, to_json(stats).dump(2) + "\n");
  write_file_atomic(c.out_dir() / files::kStatsText,
                    format_stats_table(stats, c.dataset == DatasetKind::coliee ? "COLIEE" : "LeCaRD", c.language()));
  write_manifest(c, "ingest", std::nullopt);
  *ctx.out << "ingested " << load.corpus.documents.size() << " cases, " << load.corpus.candidate_pools.size()
           << " queries\n";
  return 0;
}

inline constexpr double kExtractFailureLimit = 0.10;

inline int cmd_extract(const RunConfig& c, const PipelineContext& ctx = {}) {
  fs::path corpus_path = require_input(c, files::kCorpus, "ingest");
  JsonlDocuments docs = read_documents_jsonl(corpus_path);
  std::sort(docs.documents.begin(), docs.documents.end(),
            [](const CaseDocument& a, const CaseDocument& b) { return a.id < b.id; });

  std::unique_ptr<Summarizer> owned_summarizer;
  const Summarizer* summarizer = ctx.summarizer;
  if (!summarizer && c.summarizer_kind == "remote") {
    if (c.summarizer_url.empty()) throw ConfigError("summarizer.url is required for the remote summarizer");
    owned_summarizer = std::make_unique<HttpSummarizer>(c.summarizer_url, c.summarizer_timeout_ms);
    summarizer = owned_summarizer.get();
  }
  std::optional<ChargeLexicon> lexicon;
  bool any_civil = std::any_of(docs.documents.begin(), docs.documents.end(),
                               [](const CaseDocument& d) { return d.jurisdiction == Jurisdiction::civil_law; });
  if (any_civil) lexicon = ChargeLexicon::load(c.lexicon_path());
  ExtractionDeps deps{summarizer, lexicon ? &*lexicon : nullptr};

  const std::size_t n = docs.documents.size();
  std::vector<std::optional<ExtractionOutcome>> outcomes(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    try {
      validate_document(docs.documents[i]);
      outcomes[i] = extract_features(docs.documents[i], deps);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::string features_out, errors_out;
  std::map<std::string, std::size_t> fact_counts, issue_counts;
  std::size_t failures = docs.errors.size();
  for (const auto& e : docs.errors) errors_out += json{{"id", nullptr}, {"where", e.where}, {"error", e.message}}.dump() + "\n";
  std::size_t fallback_warnings = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!outcomes[i]) {
      ++failures;
      errors_out += json{{"id", docs.documents[i].id}, {"where", corpus_path.string()}, {"error", errors[i]}}.dump() + "\n";
      continue;
    }
    const LegalFeatures& f = outcomes[i]->features;
    features_out += to_json(f).dump() + "\n";
    ++fact_counts[std::string(to_string(f.fact_provenance))];
    ++issue_counts[std::string(to_string(f.issue_provenance))];
    fallback_warnings += outcomes[i]->warnings.size();
  }
  fs::create_directories(c.out_dir());
  write_file_atomic(c.out_dir() / files::kFeatures, features_out);
  write_file_atomic(c.out_dir() / files::kExtractErrors, errors_out);
  write_manifest(c, "extract", std::nullopt);

  if (fallback_warnings) log_warning(std::to_string(fallback_warnings) + " case(s) fell back to lead text for facts");
  const std::size_t total = n + docs.errors.size();
  *ctx.out << "extracted " << (total - failures) << "/" << total << " cases";
  for (const auto& [k, v] : fact_counts) *ctx.out << "; fact " << k << "=" << v;
  for (const auto& [k, v] : issue_counts) *ctx.out << "; issue " << k << "=" << v;
  *ctx.out << "\n";
  if (total == 0 || static_cast<double>(failures) > kExtractFailureLimit * static_cast<double>(total)) {
    std::cerr << "error: " << failures << " of " << total << " cases failed extraction (limit "
              << static_cast<int>(kExtractFailureLimit * 100) << "%)\n";
    return 1;
  }
  return 0;
}

inline int cmd_encode(const RunConfig& c, const PipelineContext& ctx = {}) {
  Corpus corpus = load_run_corpus(c);
  std::map<std::string, LegalFeatures> features;
  if (c.variant.feature_mode != FeatureMode::whole_text || fs::exists(c.out_dir() / files::kFeatures))
    features = load_run_features(c, corpus);
  PromptTemplate t = resolve_template(c);
  BackendHandle backend(c, ctx);
  RepresentationStore store = encode_corpus(corpus, features, t, c.variant, backend.get(), c.seed, c.jobs);
  write_store(c.out_dir() / files::kStore, store);
  write_manifest(c, "encode", backend.descriptor());
  *ctx.out << "encoded " << store.reps.size() << " cases, dim " << store.dim() << "\n";
  return 0;
}

inline int cmd_retrieve(const RunConfig& c, const PipelineContext& ctx = {}) {
  Corpus corpus = load_run_corpus(c);
  RetrievalInputs in;
  in.corpus = &corpus;
  std::optional<RepresentationStore> store;
  std::map<std::string, LegalFeatures> features;
  if (c.mode == RetrievalMode::dense || c.mode == RetrievalMode::two_stage) {
    fs::path p = c.out_dir() / files::kStore;
    if (!fs::exists(p)) throw ConfigError("no representation store at " + p.string() + "; run 'encode' first");
    store = read_store(p);
    in.store = &*store;
  }
  if (c.mode == RetrievalMode::bm25_promptcase) {
    features = load_run_features(c, corpus);
    in.features = &features;
    in.prompt = resolve_template(c);
  }
  RunFile run = run_retrieval(c, in);
  write_file_atomic(c.out_dir() / files::kRun, write_trec(run));
  write_manifest(c, "retrieve", store ? std::optional(store->backend) : std::nullopt);
  *ctx.out << "wrote " << run.lists.size() << " ranked lists (" << to_string(c.mode) << ")\n";
  return 0;
}

inline void write_report_files(const fs::path& dir, const std::string& stem, const MetricsReport& r,
                               const std::string& label) {
  std::vector<TableRow> rows{{{label}, r.aggregate, {}}};
  write_file_atomic(dir / (stem + ".csv"), format_csv({"run"}, rows, r.k));
  write_file_atomic(dir / (stem + ".txt"), format_text_table({"run"}, rows, r.k));
  write_file_atomic(dir / (stem + ".json"), to_json(r).dump(2) + "\n");
}

inline int cmd_evaluate(const RunConfig& c, const PipelineContext& ctx = {}) {
  RunFile run = read_trec(require_input(c, files::kRun, "retrieve"));
  RelevanceJudgments judgments = load_run_judgments(c);
  MetricsReport report = evaluate_run(run, judgments, c.eval_k);
  if (!recall_bound_holds(report))
    log_warning("R@" + std::to_string(report.k) + " exceeds k / mean relevant per query (" +
                std::to_string(recall_bound(report)) + ")");
  write_report_files(c.out_dir(), "report", report, run.tag);
  write_manifest(c, "evaluate", std::nullopt);
  *ctx.out << format_text_table({"run"}, {{{run.tag}, report.aggregate, {}}}, report.k);
  return 0;
}

// ---------------------------------------------------------------------------
// Ablation grid

struct AblationCell {
  std::string section;  // variants | templates | features
  std::string label;
  ReformulationVariant variant;
  std::string template_name;  // preset used when the variant prompts
};

/// The grid: prompt {off,on} x features {none,both}; presets A-G with both
/// features; and the single-feature arms.
inline std::vector<AblationCell> ablation_grid(const std::string& base_template) {
  using M = FeatureMode;
  std::vector<AblationCell> cells = {
      {"variants", "prompt=off features=none", {M::whole_text, false}, base_template},
      {"variants", "prompt=on features=none", {M::whole_text, true}, base_template},
      {"variants", "prompt=off features=both", {M::fact_and_issue, false}, base_template},
      {"variants", "prompt=on features=both", {M::fact_and_issue, true}, base_template},
  };
  for (const auto& name : preset_names()) cells.push_back({"templates", name, {M::fact_and_issue, true}, name});
  cells.push_back({"features", "prompt=on features=fact", {M::fact_only, true}, base_template});
  cells.push_back({"features", "prompt=on features=issue", {M::issue_only, true}, base_template});
  return cells;
}

/// True when the NA template with prompting on feeds the backend exactly the
/// inputs of the prompt-off, both-features cell, for every case.
inline bool na_template_matches_prompt_off(const Corpus& corpus, const std::map<std::string, LegalFeatures>& features,
                                           Language lang) {
  PromptTemplate na = preset_template("NA", lang);
  for (const auto& [id, doc] : corpus.documents) {
    LegalFeatures f = features_or_empty(features, doc);
    auto a = variant_inputs(f, doc.raw_text, na, {FeatureMode::fact_and_issue, true});
    auto b = variant_inputs(f, doc.raw_text, preset_template("A", lang), {FeatureMode::fact_and_issue, false});
    if (a != b) return false;
  }
  return true;
}

inline int cmd_ablate(const RunConfig& c, const PipelineContext& ctx = {}) {
  Corpus corpus = load_run_corpus(c);
  RelevanceJudgments judgments = load_run_judgments(c);
  std::map<std::string, LegalFeatures> features = load_run_features(c, corpus);
  BackendHandle backend(c, ctx);
  const std::string base = c.template_file.empty() ? c.template_preset : "A";
  PromptTemplate base_template = resolve_template(c);

  RunConfig rc = c;
  if (rc.mode != RetrievalMode::two_stage) rc.mode = RetrievalMode::dense;

  std::map<std::string, std::vector<TableRow>> sections;
  json cells_json = json::array();
  for (const AblationCell& cell : ablation_grid(base)) {
    TableRow row;
    row.labels = {cell.label};
    json cj{{"section", cell.section}, {"label", cell.label}, {"feature_mode", to_string(cell.variant.feature_mode)},
            {"use_prompt", cell.variant.use_prompt}};
    try {
      PromptTemplate t = cell.section == "templates" ? preset_template(cell.template_name, c.language()) : base_template;
      cj["template"] = cell.variant.use_prompt ? json(t.name) : json("NA");
      RepresentationStore store = encode_corpus(corpus, features, t, cell.variant, backend.get(), c.seed, c.jobs);
      RetrievalInputs in;
      in.corpus = &corpus;
      in.store = &store;
      RunFile run = run_retrieval(rc, in);
      MetricsReport report = evaluate_run(run, judgments, c.eval_k);
      row.metrics = report.aggregate;
      cj["metrics"] = to_json(report.aggregate);
    } catch (const std::exception& e) {
      row.error = e.what();
      cj["error"] = row.error;
      log_warning("ablation cell '" + cell.label + "' failed: " + row.error);
    }
    sections[cell.section].push_back(row);
    cells_json.push_back(cj);
  }

  const bool na_equal = na_template_matches_prompt_off(corpus, features, c.language());
  json out{{"k", c.eval_k},
           {"seed", c.seed},
           {"retrieval", to_string(rc.mode)},
           {"cells", cells_json},
           {"na_template_equals_prompt_off_both", na_equal}};

  std::string csv = "section," + format_csv({"cell"}, {}, c.eval_k);
  std::string txt;
  for (const char* name : {"variants", "templates"}) {
    txt += std::string(name) + "\n" + format_text_table({"cell"}, sections[name], c.eval_k) + "\n";
    std::string part = format_csv({"cell"}, sections[name], c.eval_k);
    for (std::size_t pos = part.find('\n') + 1; pos < part.size();) {
      std::size_t end = part.find('\n', pos);
      csv += std::string(name) + "," + part.substr(pos, end - pos + 1);
      pos = end + 1;
    }
  }
  fs::create_directories(c.out_dir());
  write_file_atomic(c.out_dir() / "ablation.csv", csv);
  write_file_atomic(c.out_dir() / "ablation.txt", txt);
  write_file_atomic(c.out_dir() / "ablation.json", out.dump(2) + "\n");
  write_file_atomic(c.out_dir() / "ablation_features.csv", format_csv({"cell"}, sections["features"], c.eval_k));
  write_file_atomic(c.out_dir() / "ablation_features.txt", format_text_table({"cell"}, sections["features"], c.eval_k));
  write_manifest(c, "ablate", backend.descriptor());
  *ctx.out << txt;
  if (!na_equal) log_warning("NA template inputs differ from the prompt-off cell");
  return 0;
}

}  // namespace promptcase
