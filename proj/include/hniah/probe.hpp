// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-book probing of a backend's parametric knowledge, the consistency
// filter, and construction of the I-WhoQA and HotpotQA evaluation subsets.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hniah/backend.hpp"
#include "hniah/knowledge.hpp"
#include "hniah/subsets.hpp"

namespace hniah {

inline constexpr std::string_view kProbeTemplateVersion = "probe-v1";

// Closed-book prompt; no context is supplied.
std::string probe_prompt(std::string_view question);
// Context-in-prompt query used for the context-derived HotpotQA answer.
std::string context_prompt(std::string_view context, std::string_view question);

struct ProbeResult {
  std::string entity;
  std::vector<std::string> answers;
  std::vector<std::string> normalized_answers;
};

struct ProbeOptions {
  GenerationConfig generation;  // greedy, 32 tokens by default
  int concurrency = 1;
};

ProbeResult probe_entity(Backend& backend, const KnowledgeItem& item, const GenerationConfig& cfg);

// Probes every item with at most `opts.concurrency` requests in flight.
// Output order follows `items`.
std::vector<ProbeResult> probe_all(Backend& backend, const std::vector<KnowledgeItem>& items,
                                   const ProbeOptions& opts);

// Keeps entities whose normalized answers are all identical and non-empty.
ParametricProfile consistency_filter(const std::vector<ProbeResult>& results, std::string model_id = {});

// Digest of the probe configuration stored in profile provenance.
std::string probe_config_digest(const GenerationConfig& cfg);

struct IWhoQASubsets {
  std::vector<SubsetInstance> parametric;
  std::vector<SubsetInstance> conflict;
  std::vector<SubsetInstance> irrelevant;
};

// `max_examples` caps the number of profile entities considered (taken in
// sorted entity order); 0 means no cap.
IWhoQASubsets build_iwhoqa_subsets(const ParametricProfile& profile, const KnowledgeSet& knowledge,
                                   std::uint64_t seed, std::size_t max_examples = 300);

struct HotpotItem {
  std::string id;
  std::string question;
  std::string context;
  std::string reference_answer;
};

std::vector<HotpotItem> load_hotpot_items(const std::string& path);

struct HotpotSubsets {
  std::vector<SubsetInstance> context;
  std::vector<SubsetInstance> parametric;
};

// `answer_matches` decides whether a free-form answer expresses the
// reference: every reference token appears in the answer.
bool answer_matches(std::string_view answer, std::string_view reference);

// Parametric answers come from `profile.entries[item.question]` when present,
// otherwise from a closed-book probe of `backend`.
HotpotSubsets build_hotpot_subsets(const ParametricProfile& profile, const std::vector<HotpotItem>& items,
                                   Backend& backend, const GenerationConfig& cfg);

}  // namespace hniah
