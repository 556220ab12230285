// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/subsets.hpp"

#include <fstream>
#include <optional>

#include "hniah/errors.hpp"
#include "hniah/jsonl.hpp"

namespace hniah {

std::string_view to_string(SubsetLabel l) {
  switch (l) {
    case SubsetLabel::Parametric: return "parametric";
    case SubsetLabel::Conflict: return "conflict";
    case SubsetLabel::Irrelevant: return "irrelevant";
    case SubsetLabel::HotpotContext: return "hotpot_context";
    case SubsetLabel::HotpotParametric: return "hotpot_parametric";
  }
  return "unknown";
}

std::optional<SubsetLabel> parse_subset_label(std::string_view s) {
  for (SubsetLabel l : {SubsetLabel::Parametric, SubsetLabel::Conflict, SubsetLabel::Irrelevant,
                        SubsetLabel::HotpotContext, SubsetLabel::HotpotParametric})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

void write_subset_file(const std::string& path, const SubsetHeader& header,
                       const std::vector<SubsetInstance>& instances) {
  std::string out;
  json h = {{"header",
             {{"label", header.label},
              {"profile_digest", header.profile_digest},
              {"seed", header.seed},
              {"count", instances.size()}}}};
  out += h.dump() + "\n";
  for (const auto& si : instances) {
    json j = {{"id", si.id},
              {"label", to_string(si.label)},
              {"question", si.question},
              {"context", si.context},
              {"reference_answer", si.reference_answer}};
    if (si.opposing_answer) j["opposing_answer"] = *si.opposing_answer;
    out += j.dump() + "\n";
  }
  write_text_file(path, out);
}

std::vector<SubsetInstance> read_subset_file(const std::string& path, SubsetHeader* header) {
  std::vector<SubsetInstance> out;
  std::optional<SubsetHeader> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      if (auto h = j.find("header"); h != j.end()) {
        if (seen || !out.empty()) throw ParseError("header must be the first record", line);
        seen = SubsetHeader{h->value("label", ""), h->value("profile_digest", ""), h->value("seed", std::uint64_t{0}),
                            h->value("count", std::size_t{0})};
        return;
      }
      SubsetInstance si;
      si.id = j.at("id").get<std::string>();
      auto label = parse_subset_label(j.at("label").get<std::string>());
      if (!label) throw ParseError("unknown subset label", line);
      si.label = *label;
      si.question = j.at("question").get<std::string>();
      si.context = j.at("context").get<std::string>();
      si.reference_answer = j.at("reference_answer").get<std::string>();
      if (auto o = j.find("opposing_answer"); o != j.end() && o->is_string()) si.opposing_answer = o->get<std::string>();
      out.push_back(std::move(si));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad subset record: ") + e.what(), line);
    }
  });
  if (seen) {
    if (seen->count != out.size())
      throw InvariantError(path + ": header declares " + std::to_string(seen->count) + " instances, file has " +
                           std::to_string(out.size()));
    if (header) *header = *seen;
  }
  return out;
}

}  // namespace hniah
