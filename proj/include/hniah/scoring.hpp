// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Token-overlap scoring: Score = |P ∩ A| / |A| where P and A are the
// normalized token sets of prediction and reference.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hniah {

struct TokenSet {
  std::set<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool contains(const std::string& t) const { return tokens.count(t) != 0; }
  bool includes(const TokenSet& other) const;

  friend bool operator==(const TokenSet&, const TokenSet&) = default;
};

// Lowercases ASCII, splits on runs of non-alphanumeric bytes, drops empties.
// Bytes >= 0x80 count as alphanumeric.
std::vector<std::string> token_list(std::string_view text);
TokenSet normalize_tokens(std::string_view text);

enum class ScoreMode { Set, Multiset };

// Throws InvalidArgument when the reference has no tokens.
double score(std::string_view prediction, std::string_view reference, ScoreMode mode = ScoreMode::Set);

enum class AlignmentLabel { AlignedInjected, AlignedOpposing, Neither };

std::string_view to_string(AlignmentLabel a);
std::optional<AlignmentLabel> parse_alignment(std::string_view s);

// Exclusive containment of the injected or opposing answer tokens in the
// prediction. Throws InvalidArgument when both answers normalize to the
// same token set.
AlignmentLabel classify_alignment(std::string_view prediction, std::string_view injected,
                                  std::string_view opposing);

}  // namespace hniah
