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

// promptcase: ingest | extract | encode | retrieve | evaluate | ablate
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "promptcase/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> k1;
  std::optional<double> b;
  std::optional<std::string> tokenizer;
  std::optional<std::size_t> stage1_depth;
  std::optional<std::size_t> topk;
  std::optional<std::string> mode;
};

promptcase::RunConfig resolve(const Overrides& o) {
  using namespace promptcase;
  if (o.config.empty()) throw ConfigError("--config is required");
  RunConfig c = load_config(o.config);
  if (o.jobs) c.jobs = *o.jobs == 0 ? 1 : *o.jobs;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = fs::absolute(*o.out).lexically_normal().string();
  if (o.k1) c.bm25.k1 = *o.k1;
  if (o.b) c.bm25.b = *o.b;
  if (o.tokenizer) c.tokenizer = parse_tokenizer_kind(*o.tokenizer);
  if (o.stage1_depth) c.stage1_depth = *o.stage1_depth;
  if (o.topk) c.topk = *o.topk;
  if (o.mode) c.mode = parse_retrieval_mode(*o.mode);
  if (c.topk == 0 || c.stage1_depth == 0) throw ConfigError("retrieval depths must be >= 1");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace promptcase;
  CLI::App app{"Legal case retrieval with prompt-reformulated dual and cross encoding"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "Run config JSON, or a manifest written by an earlier command");
  app.add_option("--jobs", o.jobs, "Worker threads");
  app.add_option("--seed", o.seed, "Seed for misleading-prompt sampling");
  app.add_option("--out", o.out, "Run directory");
  app.add_option("--k1", o.k1, "BM25 k1");
  app.add_option("--b", o.b, "BM25 b");
  app.add_option("--tokenizer", o.tokenizer, "english_simple | chinese_bigram");
  app.add_option("--stage1-depth", o.stage1_depth, "BM25 depth for two-stage retrieval");
  app.add_option("--topk", o.topk, "Entries kept per query");

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, const PipelineContext&);
  };
  const Command commands[] = {
      {"ingest", "Load a dataset and write the normalized corpus and statistics", cmd_ingest},
      {"extract", "Extract legal facts and issues", cmd_extract},
      {"encode", "Embed cases into the representation store", cmd_encode},
      {"retrieve", "Rank candidates and write a TREC run", cmd_retrieve},
      {"evaluate", "Score the run against the judgments", cmd_evaluate},
      {"ablate", "Run the variant and template grid", cmd_ablate},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    if (std::string_view(cmd.name) == "retrieve")
      sub->add_option("--mode", o.mode, "dense | bm25 | two_stage | bm25_promptcase");
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig config = resolve(o);
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->run(config, PipelineContext{});
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
