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

// HTTP clients for the embedding service (POST /embed, GET /health) and the
// summarizer service (POST /summarize).

#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "promptcase/backend.hpp"
#include "promptcase/extraction.hpp"
#include "promptcase/util.hpp"

namespace promptcase {

struct Endpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string base_path;         // "" or "/prefix"
};

inline Endpoint parse_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("URL needs a scheme: '" + url + "'");
  auto path = url.find('/', scheme + 3);
  Endpoint ep;
  ep.scheme_host_port = url.substr(0, path);
  if (path != std::string::npos) {
    ep.base_path = url.substr(path);
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  return ep;
}

inline std::optional<std::string> env_string(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct RemoteBackendConfig {
  std::string url;          // falls back to PROMPTCASE_EMBED_URL
  std::string model;
  long timeout_ms = 0;      // falls back to PROMPTCASE_EMBED_TIMEOUT_MS, then 30000
  std::size_t max_tokens = 512;
  std::size_t batch_size = 32;
  std::size_t dim = 0;      // used only when /health is unreachable
  int attempts = 3;
  std::chrono::milliseconds backoff_base{200};
  int backoff_factor = 4;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

inline RemoteBackendConfig resolve_remote_config(RemoteBackendConfig cfg) {
  if (cfg.url.empty()) {
    if (auto u = env_string("PROMPTCASE_EMBED_URL")) cfg.url = *u;
  }
  if (cfg.url.empty()) throw ConfigError("remote backend: no URL (set backend.url or PROMPTCASE_EMBED_URL)");
  if (cfg.timeout_ms <= 0) {
    cfg.timeout_ms = 30000;
    if (auto t = env_string("PROMPTCASE_EMBED_TIMEOUT_MS")) {
      try {
        cfg.timeout_ms = std::stol(*t);
      } catch (const std::exception&) {
        throw ConfigError("PROMPTCASE_EMBED_TIMEOUT_MS is not a number: '" + *t + "'");
      }
    }
  }
  if (cfg.batch_size == 0) cfg.batch_size = 1;
  return cfg;
}

/// Client for the embedding wire protocol. Transport failures are retried
/// (3 attempts, 200 ms base, x4 backoff); HTTP errors and malformed payloads
/// fail immediately.
class RemoteBackend final : public EmbeddingBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig cfg) : cfg_(resolve_remote_config(std::move(cfg))), ep_(parse_endpoint(cfg_.url)) {}

  BackendDescriptor descriptor() const override {
    std::call_once(desc_once_, [this] { desc_ = fetch_descriptor(); });
    return desc_;
  }

  std::vector<Vector> embed(std::span<const EncoderInput> inputs) const override {
    const BackendDescriptor desc = descriptor();
    std::vector<Vector> out(inputs.size());
    std::vector<std::size_t> failed;
    std::string last_transport_error;
    for (std::size_t begin = 0; begin < inputs.size(); begin += cfg_.batch_size) {
      std::size_t end = std::min(inputs.size(), begin + cfg_.batch_size);
      json req{{"model", cfg_.model}, {"max_tokens", desc.max_tokens}};
      json arr = json::array();
      for (std::size_t i = begin; i < end; ++i) arr.push_back(json{{"segments", inputs[i].segments}});
      req["inputs"] = std::move(arr);
      std::string transport_error;
      auto res = post_with_retry(ep_.base_path + "/embed", req.dump(), transport_error);
      if (!res) {
        last_transport_error = transport_error;
        for (std::size_t i = begin; i < end; ++i) failed.push_back(i);
        continue;
      }
      auto vectors = parse_embed_response(*res, end - begin, desc.dim);
      for (std::size_t i = begin; i < end; ++i) out[i] = std::move(vectors[i - begin]);
    }
    if (!failed.empty()) {
      std::string msg = "embedding service unreachable after " + std::to_string(cfg_.attempts) +
                        " attempts (" + last_transport_error + "); failed input indices:";
      for (std::size_t i : failed) msg += " " + std::to_string(i);
      throw Error(msg);
    }
    return out;
  }

  const RemoteBackendConfig& config() const { return cfg_; }

 private:
  std::unique_ptr<httplib::Client> client() const {
    auto cli = std::make_unique<httplib::Client>(ep_.scheme_host_port);
    auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
    cli->set_connection_timeout(timeout);
    cli->set_read_timeout(timeout);
    cli->set_write_timeout(timeout);
    return cli;
  }

  // Returns the response, or nullopt after exhausting retries on transport errors.
  std::optional<httplib::Response> post_with_retry(const std::string& path, const std::string& body,
                                                   std::string& transport_error) const {
    auto delay = cfg_.backoff_base;
    for (int attempt = 1; attempt <= cfg_.attempts; ++attempt) {
      auto res = client()->Post(path, body, "application/json");
      if (res) return *res;
      transport_error = httplib::to_string(res.error());
      if (attempt < cfg_.attempts) {
        cfg_.sleep(delay);
        delay *= cfg_.backoff_factor;
      }
    }
    return std::nullopt;
  }

  static std::string error_message(const httplib::Response& res) {
    try {
      json j = json::parse(res.body);
      if (j.contains("error")) return j["error"].get<std::string>();
    } catch (const std::exception&) {
    }
    return res.body;
  }

  static std::vector<Vector> parse_embed_response(const httplib::Response& res, std::size_t expected, std::size_t dim) {
    if (res.status != 200)
      throw Error("embedding service returned HTTP " + std::to_string(res.status) + ": " + error_message(res));
    json j;
    try {
      j = json::parse(res.body);
    } catch (const json::exception& e) {
      throw Error(std::string("malformed response: ") + e.what());
    }
    if (!j.is_object() || !j.contains("vectors") || !j["vectors"].is_array() || !j.contains("dim"))
      throw Error("malformed response: missing \"dim\" or \"vectors\"");
    const auto& vs = j["vectors"];
    if (vs.size() != expected) throw Error("malformed response: count mismatch");
    std::size_t got_dim = j["dim"].get<std::size_t>();
    if (got_dim != dim)
      throw Error("dimension mismatch: service reports dim " + std::to_string(got_dim) + ", expected " + std::to_string(dim));
    std::vector<Vector> out;
    out.reserve(vs.size());
    for (const auto& v : vs) {
      if (!v.is_array() || v.size() != dim) throw Error("malformed response: vector of wrong length");
      Vector vec;
      vec.reserve(dim);
      for (const auto& x : v) {
        if (!x.is_number()) throw Error("malformed response: non-numeric component");
        vec.push_back(x.get<float>());
      }
      out.push_back(std::move(vec));
    }
    return out;
  }

  BackendDescriptor fetch_descriptor() const {
    auto delay = cfg_.backoff_base;
    for (int attempt = 1; attempt <= cfg_.attempts; ++attempt) {
      auto res = client()->Get(ep_.base_path + "/health");
      if (res) {
        if (res->status != 200) break;
        try {
          json j = json::parse(res->body);
          BackendDescriptor d;
          d.name = j.value("name", cfg_.model);
          d.version = j.at("model_version").get<std::string>();
          d.dim = j.at("dim").get<std::size_t>();
          d.max_tokens = j.value("max_tokens", cfg_.max_tokens);
          if (d.dim == 0) throw Error("dim 0");
          return d;
        } catch (const std::exception& e) {
          throw Error(std::string("malformed /health response: ") + e.what());
        }
      }
      if (attempt < cfg_.attempts) {
        cfg_.sleep(delay);
        delay *= cfg_.backoff_factor;
      }
    }
    if (cfg_.dim == 0) throw Error("embedding service at " + cfg_.url + " has no usable /health and no dim was configured");
    return {cfg_.model, "unknown", cfg_.dim, cfg_.max_tokens};
  }

  RemoteBackendConfig cfg_;
  Endpoint ep_;
  mutable std::once_flag desc_once_;
  mutable BackendDescriptor desc_;
};

/// Summarizer service client. Any transport failure, non-200 status or
/// malformed body reads as "unavailable".
class HttpSummarizer final : public Summarizer {
 public:
  explicit HttpSummarizer(std::string url, long timeout_ms = 60000) : ep_(parse_endpoint(url)), timeout_ms_(timeout_ms) {}

  std::optional<std::string> summarize(std::string_view text, std::string_view instruction) const override {
    httplib::Client cli(ep_.scheme_host_port);
    auto timeout = std::chrono::milliseconds(timeout_ms_);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    json req{{"instruction", std::string(instruction)}, {"text", std::string(text)}};
    auto res = cli.Post(ep_.base_path + "/summarize", req.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    try {
      json j = json::parse(res->body);
      return j.at("summary").get<std::string>();
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

 private:
  Endpoint ep_;
  long timeout_ms_;
};

}  // namespace promptcase
