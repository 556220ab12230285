// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hniah {

enum class SubsetLabel { Parametric, Conflict, Irrelevant, HotpotContext, HotpotParametric };

std::string_view to_string(SubsetLabel l);
std::optional<SubsetLabel> parse_subset_label(std::string_view s);

struct SubsetInstance {
  std::string id;
  std::string question;
  std::string context;
  std::string reference_answer;
  std::optional<std::string> opposing_answer;
  SubsetLabel label = SubsetLabel::Parametric;

  friend bool operator==(const SubsetInstance&, const SubsetInstance&) = default;
};

struct SubsetHeader {
  std::string label;           // subset name, e.g. "iwhoqa_conflict"
  std::string profile_digest;  // ParametricProfile::digest()
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

// First line is {"header": {...}}, then one instance per line.
void write_subset_file(const std::string& path, const SubsetHeader& header,
                       const std::vector<SubsetInstance>& instances);
std::vector<SubsetInstance> read_subset_file(const std::string& path, SubsetHeader* header = nullptr);

}  // namespace hniah
