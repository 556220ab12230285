// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

#include "hniah/errors.hpp"

namespace hniah {

bool TokenSet::includes(const TokenSet& other) const {
  return std::includes(tokens.begin(), tokens.end(), other.tokens.begin(), other.tokens.end());
}

std::vector<std::string> token_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TokenSet normalize_tokens(std::string_view text) {
  TokenSet s;
  for (auto& t : token_list(text)) s.tokens.insert(std::move(t));
  return s;
}

double score(std::string_view prediction, std::string_view reference, ScoreMode mode) {
  if (mode == ScoreMode::Set) {
    const TokenSet ref = normalize_tokens(reference);
    if (ref.empty()) throw InvalidArgument("reference has no tokens");
    const TokenSet pred = normalize_tokens(prediction);
    std::size_t hit = 0;
    for (const auto& t : ref.tokens) hit += pred.contains(t);
    return static_cast<double>(hit) / static_cast<double>(ref.size());
  }
  auto ref = token_list(reference);
  if (ref.empty()) throw InvalidArgument("reference has no tokens");
  auto pred = token_list(prediction);
  std::sort(ref.begin(), ref.end());
  std::sort(pred.begin(), pred.end());
  std::vector<std::string> common;
  std::set_intersection(pred.begin(), pred.end(), ref.begin(), ref.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(ref.size());
}

std::string_view to_string(AlignmentLabel a) {
  switch (a) {
    case AlignmentLabel::AlignedInjected: return "aligned_injected";
    case AlignmentLabel::AlignedOpposing: return "aligned_opposing";
    case AlignmentLabel::Neither: return "neither";
  }
  return "neither";
}

std::optional<AlignmentLabel> parse_alignment(std::string_view s) {
  if (s == "aligned_injected") return AlignmentLabel::AlignedInjected;
  if (s == "aligned_opposing") return AlignmentLabel::AlignedOpposing;
  if (s == "neither") return AlignmentLabel::Neither;
  return std::nullopt;
}

AlignmentLabel classify_alignment(std::string_view prediction, std::string_view injected, std::string_view opposing) {
  const TokenSet inj = normalize_tokens(injected);
  const TokenSet opp = normalize_tokens(opposing);
  if (inj == opp) throw InvalidArgument("injected and opposing answers normalize to the same tokens");
  const TokenSet pred = normalize_tokens(prediction);
  const bool has_inj = !inj.empty() && pred.includes(inj);
  const bool has_opp = !opp.empty() && pred.includes(opp);
  if (has_inj && !has_opp) return AlignmentLabel::AlignedInjected;
  if (has_opp && !has_inj) return AlignmentLabel::AlignedOpposing;
  return AlignmentLabel::Neither;
}

}  // namespace hniah
