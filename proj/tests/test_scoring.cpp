// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "doctest.h"
#include "hniah/errors.hpp"
#include "hniah/rng.hpp"
#include "hniah/scoring.hpp"
#include "hniah/text.hpp"

using namespace hniah;

TEST_CASE("token_list splits on non-alphanumerics and lowercases") {
  CHECK(token_list("Bram Stoker's DRACULA, 1897!") == std::vector<std::string>{"bram", "stoker", "s", "dracula", "1897"});
  CHECK(token_list("").empty());
  CHECK(token_list("Caf\xc3\xa9 ok") == std::vector<std::string>{"caf\xc3\xa9", "ok"});
}

TEST_CASE("answer normalization agrees with the scoring token list") {
  const std::string bytes = "aZ9 .-'\t\x01\xc3\xa9";
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (std::uint64_t n = rng.next() % 16; n > 0; --n) s.push_back(bytes[rng.next() % bytes.size()]);
    CHECK(normalize_answer(s) == join(token_list(s), " "));
  }
}

TEST_CASE("set score examples") {
  CHECK(score("blue origami cranes", "blue origami cranes") == 1.0);
  CHECK(score("I think it is blue cranes", "blue origami cranes") == doctest::Approx(2.0 / 3.0));
  CHECK(score("nothing here", "blue origami cranes") == 0.0);
  CHECK(score("", "blue") == 0.0);
  CHECK(score("Blue, ORIGAMI cranes.", "blue origami cranes") == 1.0);
  // Repeated reference tokens count once in set mode.
  CHECK(score("blue", "blue blue sky") == 0.5);
  CHECK_THROWS_AS(score("x", "..."), InvalidArgument);
}

TEST_CASE("multiset score respects multiplicity") {
  CHECK(score("blue", "blue blue sky", ScoreMode::Multiset) == doctest::Approx(1.0 / 3.0));
  CHECK(score("blue blue sky", "blue blue sky", ScoreMode::Multiset) == 1.0);
  CHECK(score("blue blue blue", "blue blue sky", ScoreMode::Multiset) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("score is bounded, and prediction supersets score at least as high") {
  Rng rng(99);
  const char* alphabet[] = {"a", "b", "c", "d", "e", "f"};
  auto random_text = [&](std::size_t max_len) {
    std::string s;
    for (std::uint64_t i = 0, n = rng.below(max_len) + 1; i < n; ++i) s += std::string(alphabet[rng.below(6)]) + " ";
    return s;
  };
  for (int t = 0; t < 2000; ++t) {
    std::string ref = random_text(6), pred = random_text(8), extra = random_text(4);
    double s = score(pred, ref);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(score(pred + " " + extra, ref) >= s);
    CHECK(score(ref, ref) == 1.0);
  }
}

TEST_CASE("classify_alignment uses exclusive containment") {
  CHECK(classify_alignment("It was Bram Stoker.", "Bram Stoker", "Oscar Wilde") == AlignmentLabel::AlignedInjected);
  CHECK(classify_alignment("oscar wilde", "Bram Stoker", "Oscar Wilde") == AlignmentLabel::AlignedOpposing);
  CHECK(classify_alignment("Stoker or Wilde", "Bram Stoker", "Oscar Wilde") == AlignmentLabel::Neither);
  CHECK(classify_alignment("Bram Stoker and Oscar Wilde", "Bram Stoker", "Oscar Wilde") == AlignmentLabel::Neither);
  CHECK(classify_alignment("", "Bram Stoker", "Oscar Wilde") == AlignmentLabel::Neither);
  CHECK_THROWS_AS(classify_alignment("x", "Bram Stoker", "bram, stoker"), InvalidArgument);
}

TEST_CASE("alignment labels round-trip") {
  for (auto a : {AlignmentLabel::AlignedInjected, AlignmentLabel::AlignedOpposing, AlignmentLabel::Neither})
    CHECK(parse_alignment(to_string(a)) == a);
  CHECK_FALSE(parse_alignment("both"));
}
