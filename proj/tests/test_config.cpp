// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "hniah/config.hpp"
#include "hniah/errors.hpp"
#include "hniah/knowledge.hpp"
#include "support.hpp"

using namespace hniah;
namespace fs = std::filesystem;

TEST_CASE("default config points at the bundled assets") {
  HarnessConfig c = default_config();
  CHECK(fs::exists(c.assets.pairs));
  CHECK(fs::exists(c.assets.facts));
  CHECK(fs::is_directory(c.assets.corpus_dir));
  CHECK(c.tokenizer == "whitespace");
  CHECK(c.grid.n_intervals == 40);
  CHECK(c.grid.n_depths == 10);
  CHECK(c.concurrency == 4);
}

TEST_CASE("the assets environment variable overrides the default") {
  test::TempDir dir;
  ::setenv("HNIAH_ASSETS_DIR", dir.path().c_str(), 1);
  HarnessConfig c = default_config();
  ::unsetenv("HNIAH_ASSETS_DIR");
  CHECK(c.assets.pairs == (fs::path(dir.path()) / "pairs.jsonl").string());
}

TEST_CASE("config files resolve paths relative to themselves") {
  test::TempDir dir;
  fs::create_directories(fs::path(dir.path()) / "conf");
  test::write_file(dir.file("conf/hniah.json"), R"({
    "assets": {"dir": "../assets", "facts": "/abs/facts.jsonl"},
    "tokenizer": "wordpunct",
    "prompt": {"version": "p2", "instruction": "Answer briefly."},
    "grid": {"max_context_tokens": 8192, "n_intervals": 8, "n_depths": 3, "modes": ["niah", "hybrid"],
             "generation_lengths": [16], "seed": 9},
    "concurrency": 2,
    "backends": {
      "local": {"type": "remote", "endpoint": "http://127.0.0.1:1", "model": "m", "max_context": 4096,
                "concurrency": 6},
      "canned": {"type": "mock", "kind": "parametric_only", "answers": {"Alpha": "red"}, "max_context": 99}
    }
  })");
  HarnessConfig c = load_config(dir.file("conf/hniah.json"));
  CHECK(fs::path(c.assets.pairs) == fs::path(dir.path()) / "conf" / "../assets" / "pairs.jsonl");
  CHECK(c.assets.facts == "/abs/facts.jsonl");
  CHECK(c.tokenizer == "wordpunct");
  CHECK(c.prompt.version == "p2");
  CHECK(c.prompt.instruction == "Answer briefly.");
  CHECK(c.grid.max_context_tokens == 8192);
  CHECK(c.grid.n_intervals == 8);
  CHECK(c.grid.modes == std::vector<Mode>{Mode::Niah, Mode::Hybrid});
  CHECK(c.grid.generation_lengths == std::vector<int>{16});
  CHECK(c.grid.seed == 9);
  CHECK(c.concurrency == 2);
  CHECK(backend_concurrency(c, "local") == 6);
  CHECK(backend_concurrency(c, "canned") == 2);
  CHECK(backend_concurrency(c, "mock:pattern_retriever") == 2);
  CHECK(declared_max_context(c, "local") == 4096);
  CHECK(declared_max_context(c, "canned") == 99);
  CHECK(declared_max_context(c, "nowhere") == 0);
  CHECK(resolve_path(c, "x.jsonl") == (fs::path(dir.path()) / "conf" / "x.jsonl").string());
  CHECK(resolve_path(c, "/y") == "/y");

  auto canned = open_backend(c, "canned");
  CHECK(canned->id() == "mock:parametric_only");
  CHECK(canned->max_context() == 99);
  CHECK(canned->generate("ctx\n\nQuestion: Who is alpha?\nAnswer:", GenerationConfig{}).text == "red");

  auto remote = open_backend(c, "local");
  CHECK(remote->max_context() == 4096);
}

TEST_CASE("built-in mocks are always available") {
  HarnessConfig c = default_config();
  for (const char* n : {"mock:hybrid_oracle", "mock:pattern_retriever", "mock:refusal_free_echo"})
    CHECK(open_backend(c, n)->id() == n);
  CHECK_THROWS_AS(open_backend(c, "mock:parametric_only"), InvalidArgument);
  CHECK_THROWS_AS(open_backend(c, "mock:nope"), InvalidArgument);
  CHECK_THROWS_AS(open_backend(c, "gpt"), InvalidArgument);
}

TEST_CASE("mock answers can come from a saved profile") {
  test::TempDir dir;
  ParametricProfile p;
  p.model_id = "probe-model";
  p.entries = {{"Gamma Person", "blue"}, {"Delta", "green"}};
  save_profile(p, dir.file("profile.json"));
  test::write_file(dir.file("cfg.json"), R"({"backends": {"pm": {"type": "mock", "kind": "parametric_only",
    "answers_from_profile": "profile.json", "answers": {"delta": "override"}}}})");
  HarnessConfig c = load_config(dir.file("cfg.json"));
  auto b = open_backend(c, "pm");
  CHECK(b->generate("c\n\nQuestion: Tell me about Gamma Person.\nAnswer:", GenerationConfig{}).text == "blue");
  CHECK(b->generate("c\n\nQuestion: And Delta?\nAnswer:", GenerationConfig{}).text == "override");
  CHECK(b->generate("c\n\nQuestion: Epsilon?\nAnswer:", GenerationConfig{}).text == "I don't know.");
}

TEST_CASE("invalid configs are rejected") {
  test::TempDir dir;
  CHECK_THROWS_AS(load_config(dir.file("missing.json")), IoError);
  test::write_file(dir.file("bad.json"), "{not json");
  CHECK_THROWS_AS(load_config(dir.file("bad.json")), ParseError);
  CHECK_THROWS_AS(config_from_json(json::array(), ""), ParseError);
  CHECK_THROWS_AS(config_from_json(json{{"concurrency", 0}}, ""), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(json{{"concurrency", "two"}}, ""), ParseError);
  CHECK_THROWS_AS(config_from_json(json{{"backends", json::array()}}, ""), ParseError);
  CHECK_THROWS_AS(config_from_json(json{{"grid", {{"modes", {"sideways"}}}}}, ""), InvalidArgument);

  HarnessConfig c = config_from_json(json::parse(R"({"backends": {
      "weird": {"type": "carrier-pigeon"},
      "nokind": {"type": "mock", "kind": "psychic"},
      "noendpoint": {"type": "remote", "model": "m"},
      "keyless": {"type": "remote", "endpoint": "http://127.0.0.1:1", "model": "m",
                  "api_key_env": "HNIAH_TEST_SURELY_UNSET_KEY"},
      "zero": {"type": "mock", "kind": "pattern_retriever", "concurrency": 0}}})"),
                                     "");
  CHECK_THROWS_AS(open_backend(c, "weird"), InvalidArgument);
  CHECK_THROWS_AS(open_backend(c, "nokind"), InvalidArgument);
  CHECK_THROWS_AS(open_backend(c, "noendpoint"), ParseError);
  ::unsetenv("HNIAH_TEST_SURELY_UNSET_KEY");
  CHECK_THROWS_AS(open_backend(c, "keyless"), InvalidArgument);
  CHECK_THROWS_AS(backend_concurrency(c, "zero"), InvalidArgument);
}
