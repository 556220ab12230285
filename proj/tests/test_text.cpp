// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "doctest.h"
#include "hniah/digest.hpp"
#include "hniah/errors.hpp"
#include "hniah/jsonl.hpp"
#include "hniah/rng.hpp"
#include "hniah/text.hpp"
#include "hniah/tokenizer.hpp"
#include "support.hpp"

using namespace hniah;

TEST_CASE("normalize_answer lowercases and collapses punctuation and space") {
  CHECK(normalize_answer("  Bram   Stoker. ") == "bram stoker");
  CHECK(normalize_answer("\"Albert Camus!\"") == "albert camus");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("...") == "");
  CHECK(normalize_answer("Jean-Jacques") == "jean jacques");
  CHECK(normalize_answer("T.S. Eliot") == normalize_answer("t. s. eliot"));
  // Non-ASCII bytes pass through untouched.
  CHECK(normalize_answer("Caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("split_sentences terminates every sentence and round-trips under join") {
  auto s = split_sentences("One two.  Three\nfour? \"Five!\" six");
  REQUIRE(s.size() == 4);
  CHECK(s[0] == "One two.");
  CHECK(s[1] == "Three four?");
  CHECK(s[2] == "\"Five!\"");
  CHECK(s[3] == "six.");
  CHECK(split_sentences(join(s, " ")) == s);
  CHECK(split_sentences("   ").empty());
  // Decimal points do not end a sentence.
  CHECK(split_sentences("Pi is 3.14 roughly.").size() == 1);
}

TEST_CASE("whitespace tokenizer counts are additive over space-joined pieces") {
  WhitespaceTokenizer t;
  CHECK(t.count("") == 0);
  CHECK(t.count(" a  b\tc\n") == 3);
  Rng rng(7);
  const std::vector<std::string> words{"alpha", "b.", "c,d", "x"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> pieces;
    std::size_t expected = 0;
    for (std::uint64_t i = 0, n = rng.below(6) + 1; i < n; ++i) {
      std::string p;
      for (std::uint64_t w = 0, m = rng.below(4) + 1; w < m; ++w) p += (w ? " " : "") + words[rng.below(words.size())];
      expected += t.count(p);
      pieces.push_back(p);
    }
    CHECK(t.count(join(pieces, " ")) == expected);
  }
}

TEST_CASE("wordpunct tokenizer splits punctuation and is additive") {
  WordPunctTokenizer t;
  CHECK(t.count("Hello, world!") == 4);
  CHECK(t.count("Hello, world!") + t.count("Bye.") == t.count("Hello, world! Bye."));
}

TEST_CASE("truncate keeps at most n tokens") {
  WhitespaceTokenizer t;
  CHECK(t.truncate("a b c d", 2) == "a b");
  CHECK(t.truncate("a b", 5) == "a b");
  CHECK(t.truncate("a b", 0).empty());
}

TEST_CASE("make_tokenizer resolves names and rejects unknown ones") {
  CHECK(make_tokenizer("whitespace")->name() == "whitespace-v1");
  CHECK(make_tokenizer("wordpunct-v1")->name() == "wordpunct-v1");
  CHECK(make_tokenizer("whitespace")->digest() == sha256_hex("whitespace-v1").substr(0, 16));
  CHECK_THROWS_AS(make_tokenizer("bpe"), InvalidArgument);
}

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  CHECK(h.hex() == sha256_hex("abc"));
}

TEST_CASE("checksum manifest detects tampering") {
  test::TempDir dir;
  test::write_file(dir.file("a.txt"), "abc");
  test::write_file(dir.file("MANIFEST"), sha256_hex("abc") + "  a.txt\n");
  CHECK_NOTHROW(verify_checksum_manifest(dir.file("MANIFEST")));
  CHECK(read_checksum_manifest(dir.file("MANIFEST")).at("a.txt") == sha256_hex("abc"));
  test::write_file(dir.file("a.txt"), "abd");
  CHECK_THROWS_AS(verify_checksum_manifest(dir.file("MANIFEST")), ManifestError);
}

TEST_CASE("shipped asset manifest verifies") { CHECK_NOTHROW(verify_checksum_manifest(test::asset("MANIFEST"))); }

TEST_CASE("rng below is unbiased enough and in range") {
  Rng rng(123);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("mix_seed separates coordinates") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(mix_seed(42, {a, b}));
  CHECK(seen.size() == 400);
  CHECK(mix_seed(1, {2, 3}) == mix_seed(1, {2, 3}));
  CHECK(mix_seed(1, {2, 3}) != mix_seed(1, {3, 2}));
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(5);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto w = v;
  rng.shuffle(w);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("for_each_jsonl reports line numbers and skips blank lines") {
  test::TempDir dir;
  test::write_file(dir.file("x.jsonl"), "{\"a\":1}\n\n{\"a\":2}\n");
  std::vector<std::pair<int, std::size_t>> got;
  for_each_jsonl(dir.file("x.jsonl"), [&](const json& j, std::size_t line) { got.emplace_back(j["a"].get<int>(), line); });
  REQUIRE(got.size() == 2);
  CHECK(got[1].first == 2);
  CHECK(got[1].second == 3);

  test::write_file(dir.file("bad.jsonl"), "{\"a\":1}\n{oops\n");
  try {
    for_each_jsonl(dir.file("bad.jsonl"), [](const json&, std::size_t) {});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(for_each_jsonl(dir.file("missing.jsonl"), [](const json&, std::size_t) {}), IoError);
}
