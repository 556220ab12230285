// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hniah/errors.hpp"
#include "hniah/knowledge.hpp"
#include "hniah/text.hpp"

#ifndef HNIAH_DEFAULT_ASSETS_DIR
#define HNIAH_DEFAULT_ASSETS_DIR "assets"
#endif

namespace hniah {

namespace fs = std::filesystem;

namespace {

AssetPaths assets_in(const std::string& dir) {
  AssetPaths a;
  a.pairs = (fs::path(dir) / "pairs.jsonl").string();
  a.facts = (fs::path(dir) / "facts.jsonl").string();
  a.corpus_dir = (fs::path(dir) / "corpus").string();
  a.manifest = (fs::path(dir) / "MANIFEST").string();
  return a;
}

std::string default_assets_dir() {
  if (const char* env = std::getenv("HNIAH_ASSETS_DIR"); env && *env) return env;
  return HNIAH_DEFAULT_ASSETS_DIR;
}

MockParams mock_params_from(const HarnessConfig& cfg, const json& decl) {
  MockParams p;
  p.tokenizer = decl.value("tokenizer", cfg.tokenizer);
  p.max_context = decl.value("max_context", p.max_context);
  p.fallback_answer = decl.value("fallback_answer", p.fallback_answer);
  if (auto prof = decl.find("answers_from_profile"); prof != decl.end())
    p.answers = load_profile(resolve_path(cfg, prof->get<std::string>())).entries;
  if (auto a = decl.find("answers"); a != decl.end()) {
    // Explicit answers win over profile entries that differ only in case.
    for (const auto& [key, answer] : a->get<std::map<std::string, std::string>>()) {
      std::erase_if(p.answers, [&](const auto& e) { return ascii_lower(trim(e.first)) == ascii_lower(trim(key)); });
      p.answers[key] = answer;
    }
  }
  return p;
}

std::unique_ptr<Backend> open_mock(const HarnessConfig& cfg, MockKind kind, MockParams params) {
  if (kind == MockKind::HybridOracle && params.book_to_author.empty()) {
    for (const auto& pr : load_knowledge(cfg.assets.pairs, KnowledgeFormat::Pairs).pairs)
      params.book_to_author.emplace(pr.work_title, pr.author);
  }
  return mock_backend(kind, params);
}

}  // namespace

std::string resolve_path(const HarnessConfig& cfg, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || cfg.base_dir.empty()) return p;
  return (fs::path(cfg.base_dir) / p).string();
}

HarnessConfig default_config() {
  HarnessConfig c;
  c.assets = assets_in(default_assets_dir());
  return c;
}

HarnessConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
  HarnessConfig c = default_config();
  c.base_dir = base_dir;
  try {
    if (auto a = j.find("assets"); a != j.end()) {
      if (auto dir = a->find("dir"); dir != a->end()) c.assets = assets_in(resolve_path(c, dir->get<std::string>()));
      auto field = [&](const char* key, std::string& dst) {
        if (auto v = a->find(key); v != a->end()) dst = resolve_path(c, v->get<std::string>());
      };
      field("pairs", c.assets.pairs);
      field("facts", c.assets.facts);
      field("corpus_dir", c.assets.corpus_dir);
      field("manifest", c.assets.manifest);
    }
    c.tokenizer = j.value("tokenizer", c.tokenizer);
    if (auto p = j.find("prompt"); p != j.end()) {
      c.prompt.version = p->value("version", c.prompt.version);
      c.prompt.instruction = p->value("instruction", c.prompt.instruction);
    }
    if (auto g = j.find("grid"); g != j.end()) c.grid = grid_spec_from_json(*g);
    c.concurrency = j.value("concurrency", c.concurrency);
    if (auto b = j.find("backends"); b != j.end()) {
      if (!b->is_object()) throw ParseError("backends must be an object", 0);
      for (const auto& [name, decl] : b->items()) {
        if (!decl.is_object()) throw ParseError("backend '" + name + "' must be an object", 0);
        c.backends[name] = decl;
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config: ") + e.what(), 0);
  }
  if (c.concurrency < 1) throw InvalidArgument("concurrency must be >= 1");
  c.grid.validate();
  return c;
}

HarnessConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path + ": " + e.what(), 0);
  }
  return config_from_json(j, fs::absolute(path).parent_path().string());
}

std::unique_ptr<Backend> open_backend(const HarnessConfig& cfg, const std::string& name) {
  if (auto it = cfg.backends.find(name); it != cfg.backends.end()) {
    const json& d = it->second;
    const std::string type = d.value("type", "remote");
    try {
      if (type == "mock") {
        auto kind = parse_mock_kind(d.value("kind", ""));
        if (!kind) throw InvalidArgument("backend '" + name + "': unknown mock kind");
        return open_mock(cfg, *kind, mock_params_from(cfg, d));
      }
      if (type != "remote") throw InvalidArgument("backend '" + name + "': unknown type '" + type + "'");
      RemoteConfig r;
      r.endpoint = d.at("endpoint").get<std::string>();
      r.path = d.value("path", r.path);
      r.model = d.at("model").get<std::string>();
      r.max_context = d.value("max_context", r.max_context);
      r.api_key_env = d.value("api_key_env", r.api_key_env);
      r.system_message = d.value("system_message", r.system_message);
      r.tokenizer = d.value("tokenizer", cfg.tokenizer);
      r.timeout_seconds = d.value("timeout_seconds", r.timeout_seconds);
      r.max_attempts = d.value("max_attempts", r.max_attempts);
      r.backoff_initial_seconds = d.value("backoff_initial_seconds", r.backoff_initial_seconds);
      r.max_in_flight = d.value("max_in_flight", d.value("concurrency", r.max_in_flight));
      return remote_backend(r);
    } catch (const json::exception& e) {
      throw ParseError("backend '" + name + "': " + e.what(), 0);
    }
  }
  constexpr std::string_view prefix = "mock:";
  if (name.rfind(prefix, 0) == 0) {
    auto kind = parse_mock_kind(std::string_view(name).substr(prefix.size()));
    if (kind && *kind != MockKind::ParametricOnly) {
      MockParams p;
      p.tokenizer = cfg.tokenizer;
      return open_mock(cfg, *kind, p);
    }
  }
  throw InvalidArgument("unknown backend '" + name + "'");
}

std::size_t declared_max_context(const HarnessConfig& cfg, const std::string& name) {
  auto it = cfg.backends.find(name);
  if (it == cfg.backends.end()) return 0;
  auto v = it->second.find("max_context");
  return v != it->second.end() && v->is_number_unsigned() ? v->get<std::size_t>() : 0;
}

int backend_concurrency(const HarnessConfig& cfg, const std::string& name) {
  auto it = cfg.backends.find(name);
  if (it == cfg.backends.end()) return cfg.concurrency;
  int n = it->second.value("concurrency", cfg.concurrency);
  if (n < 1) throw InvalidArgument("backend '" + name + "': concurrency must be >= 1");
  return n;
}

}  // namespace hniah
