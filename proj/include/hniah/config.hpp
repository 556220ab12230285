// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative harness configuration (JSON): asset locations, tokenizer,
// prompt template, grid spec and named backends.

#pragma once

#include <map>
#include <memory>
#include <string>

#include "hniah/backend.hpp"
#include "hniah/haystack.hpp"
#include "hniah/jsonl.hpp"

namespace hniah {

struct AssetPaths {
  std::string pairs;
  std::string facts;
  std::string corpus_dir;
  std::string manifest;  // may be empty
};

struct HarnessConfig {
  std::string base_dir;  // directory relative paths resolve against
  AssetPaths assets;
  std::string tokenizer = "whitespace";
  PromptTemplate prompt;
  GridSpec grid;
  int concurrency = 4;
  std::map<std::string, json> backends;  // raw backend declarations
};

// Assets default to HNIAH_ASSETS_DIR from the environment, else the
// directory compiled into the library.
HarnessConfig default_config();
HarnessConfig load_config(const std::string& path);
HarnessConfig config_from_json(const json& j, const std::string& base_dir);

// Resolves a backend by name. Names declared in the config take
// precedence; "mock:hybrid_oracle", "mock:pattern_retriever" and
// "mock:refusal_free_echo" are always available (the oracle uses the
// configured pair table).
std::unique_ptr<Backend> open_backend(const HarnessConfig& cfg, const std::string& name);

// Declared max context for a backend without opening it (0 when unknown).
std::size_t declared_max_context(const HarnessConfig& cfg, const std::string& name);

// Backend-level "concurrency" when declared, else cfg.concurrency.
int backend_concurrency(const HarnessConfig& cfg, const std::string& name);

// Resolves `p` against cfg.base_dir unless it is absolute.
std::string resolve_path(const HarnessConfig& cfg, const std::string& p);

}  // namespace hniah
