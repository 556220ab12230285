// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Knowledge assets: WhoQA-style items, the book/author pair table used by
// the hybrid test, and the vocabulary of random facts used for needles.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hniah {

enum class EntityType {
  DateOfBirth,
  Author,
  Country,
  DateOfDeath,
  Father,
  Composer,
  Performer,
  Genre,
  Creator,
  Occupation,
  Spouse,
  Publisher,
  Mother,
};

// Wire names use the WhoQA spelling with underscores, e.g. "date_of_birth".
std::string_view to_string(EntityType t);
std::optional<EntityType> parse_entity_type(std::string_view s);

struct Candidate {
  std::string context;
  std::string answer;
};

struct KnowledgeItem {
  std::string id;
  std::string entity;
  EntityType entity_type = EntityType::Author;
  // Every question associated with the entity; the first is the one used
  // when building evaluation subsets.
  std::vector<std::string> questions;
  std::vector<Candidate> candidates;

  const std::string& question() const { return questions.front(); }
  bool conflict_capable() const;
};

struct KnowledgePair {
  std::string work_title;
  std::string author;
  bool is_target = false;

  friend bool operator==(const KnowledgePair&, const KnowledgePair&) = default;
};

struct NeedleFact {
  std::string author;
  std::string fact;
  std::string rendered;

  friend bool operator==(const NeedleFact&, const NeedleFact&) = default;
};

struct ProbeProvenance {
  std::string timestamp;      // ISO-8601 UTC
  std::string config_digest;  // digest of the probe configuration
};

struct ParametricProfile {
  std::string model_id;
  std::map<std::string, std::string> entries;  // entity -> invariant answer
  ProbeProvenance provenance;

  // Digest over model id and entries only, so re-probing with identical
  // results yields the same digest regardless of timestamp.
  std::string digest() const;
};

enum class KnowledgeFormat { WhoQA, Pairs, Facts };

// Result of load_knowledge. Only the member matching the loaded format is
// populated.
struct KnowledgeSet {
  std::vector<KnowledgeItem> items;
  std::vector<KnowledgePair> pairs;
  std::vector<std::string> facts;

  const KnowledgeItem* find_entity(std::string_view entity) const;
  std::size_t target_count() const;
  std::vector<KnowledgePair> targets() const;
};

// Line-delimited JSON for every format. Pairs additionally accept a CSV
// file (header `work_title,author,is_target`) when `path` ends in ".csv".
KnowledgeSet load_knowledge(const std::string& path, KnowledgeFormat format);

std::set<std::string> intersect_profiles(const std::vector<ParametricProfile>& profiles);

// Draws k distractor needles whose authors differ from each other and from
// `target_author`, with facts sampled from `facts` minus any in `exclude_facts`.
std::vector<NeedleFact> sample_distractors(const std::vector<KnowledgePair>& pairs,
                                           const std::vector<std::string>& facts,
                                           std::string_view target_author, int k, std::uint64_t seed,
                                           const std::vector<std::string>& exclude_facts = {});

inline constexpr std::string_view kNeedlePrefix = "The favorite thing of ";
inline constexpr std::string_view kNeedleInfix = " is ";

// "The favorite thing of {author} is {fact}."
std::string render_needle(std::string_view author, std::string_view fact);
NeedleFact make_needle(std::string_view author, std::string_view fact);

// Profile files are a single JSON object.
void save_profile(const ParametricProfile& profile, const std::string& path);
ParametricProfile load_profile(const std::string& path);

}  // namespace hniah
