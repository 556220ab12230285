// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/knowledge.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <utility>

#include "hniah/digest.hpp"
#include "hniah/errors.hpp"
#include "hniah/jsonl.hpp"
#include "hniah/rng.hpp"
#include "hniah/text.hpp"

namespace hniah {

namespace {

constexpr std::array<std::pair<EntityType, std::string_view>, 13> kEntityNames{{
    {EntityType::DateOfBirth, "date_of_birth"},
    {EntityType::Author, "author"},
    {EntityType::Country, "country"},
    {EntityType::DateOfDeath, "date_of_death"},
    {EntityType::Father, "father"},
    {EntityType::Composer, "composer"},
    {EntityType::Performer, "performer"},
    {EntityType::Genre, "genre"},
    {EntityType::Creator, "creator"},
    {EntityType::Occupation, "occupation"},
    {EntityType::Spouse, "spouse"},
    {EntityType::Publisher, "publisher"},
    {EntityType::Mother, "mother"},
}};

std::string require_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(std::string("missing string field '") + key + "'", line);
  std::string v = it->get<std::string>();
  if (trim(v).empty()) throw ParseError(std::string("empty field '") + key + "'", line);
  return v;
}

bool parse_flag(const json& v, std::size_t line) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<int>() != 0;
  if (v.is_string()) {
    std::string s = normalize_answer(v.get<std::string>());
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no" || s.empty()) return false;
  }
  throw ParseError("is_target must be a boolean or 0/1", line);
}

KnowledgeItem parse_item(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("record must be an object", line);
  KnowledgeItem item;
  item.id = require_string(j, "id", line);
  item.entity = require_string(j, "entity", line);
  auto type = parse_entity_type(require_string(j, "entity_type", line));
  if (!type) throw ParseError("unknown entity_type '" + j["entity_type"].get<std::string>() + "'", line);
  item.entity_type = *type;
  if (auto q = j.find("questions"); q != j.end()) {
    if (!q->is_array()) throw ParseError("'questions' must be an array", line);
    for (const auto& e : *q) {
      if (!e.is_string() || trim(e.get<std::string>()).empty()) throw ParseError("empty question", line);
      item.questions.push_back(e.get<std::string>());
    }
  } else {
    item.questions.push_back(require_string(j, "question", line));
  }
  if (item.questions.empty()) throw ParseError("item has no questions", line);
  auto c = j.find("candidates");
  if (c == j.end() || !c->is_array() || c->empty()) throw InvariantError("line " + std::to_string(line) + ": candidates must be non-empty");
  for (const auto& e : *c) {
    if (!e.is_object()) throw ParseError("candidate must be an object", line);
    item.candidates.push_back({require_string(e, "context", line), require_string(e, "answer", line)});
  }
  return item;
}

// Minimal RFC 4180 field splitter (quoted fields, doubled quotes).
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", lineno);
  out.push_back(std::move(cur));
  return out;
}

void add_pair(std::vector<KnowledgePair>& pairs, std::set<std::pair<std::string, std::string>>& seen,
              KnowledgePair p, std::size_t line) {
  if (trim(p.work_title).empty() || trim(p.author).empty()) throw ParseError("empty work_title or author", line);
  if (!seen.emplace(p.work_title, p.author).second)
    throw InvariantError("line " + std::to_string(line) + ": duplicate pair (\"" + p.work_title + "\", \"" +
                         p.author + "\")");
  pairs.push_back(std::move(p));
}

void load_pairs_csv(const std::string& path, KnowledgeSet& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line, lineno);
    if (lineno == 1 && !f.empty() && trim(f[0]) == "work_title") continue;
    if (f.size() < 2 || f.size() > 3) throw ParseError("expected work_title,author[,is_target]", lineno);
    KnowledgePair p{trim(f[0]), trim(f[1]), f.size() == 3 ? parse_flag(json(trim(f[2])), lineno) : false};
    add_pair(out.pairs, seen, std::move(p), lineno);
  }
}

void check_needle_parts(std::string_view author, std::string_view fact) {
  if (trim(author).empty() || trim(fact).empty()) throw InvalidArgument("needle author and fact must be non-empty");
  if (author.find(kNeedleInfix) != std::string_view::npos)
    throw InvalidArgument("needle author must not contain \" is \": " + std::string(author));
  if (fact.find('.') != std::string_view::npos)
    throw InvalidArgument("needle fact must not contain '.': " + std::string(fact));
}

}  // namespace

std::string_view to_string(EntityType t) {
  for (const auto& [k, v] : kEntityNames)
    if (k == t) return v;
  return "unknown";
}

std::optional<EntityType> parse_entity_type(std::string_view s) {
  std::string key = trim(s);
  for (char& c : key) c = (c == ' ' || c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& [k, v] : kEntityNames)
    if (v == key) return k;
  return std::nullopt;
}

bool KnowledgeItem::conflict_capable() const {
  std::set<std::string> answers;
  for (const auto& c : candidates) answers.insert(normalize_answer(c.answer));
  return answers.size() >= 2;
}

std::string ParametricProfile::digest() const {
  std::string buf = model_id + "\n";
  for (const auto& [e, a] : entries) buf += e + "\t" + a + "\n";
  return sha256_hex(buf).substr(0, 16);
}

const KnowledgeItem* KnowledgeSet::find_entity(std::string_view entity) const {
  for (const auto& it : items)
    if (it.entity == entity) return &it;
  return nullptr;
}

std::size_t KnowledgeSet::target_count() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.is_target; }));
}

std::vector<KnowledgePair> KnowledgeSet::targets() const {
  std::vector<KnowledgePair> out;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out), [](const auto& p) { return p.is_target; });
  return out;
}

KnowledgeSet load_knowledge(const std::string& path, KnowledgeFormat format) {
  KnowledgeSet out;
  if (format == KnowledgeFormat::Pairs && path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    load_pairs_csv(path, out);
    return out;
  }
  std::set<std::string> ids, entities, facts;
  std::set<std::pair<std::string, std::string>> pairs_seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    switch (format) {
      case KnowledgeFormat::WhoQA: {
        KnowledgeItem item = parse_item(j, line);
        if (!ids.insert(item.id).second)
          throw InvariantError("line " + std::to_string(line) + ": duplicate id '" + item.id + "'");
        if (!entities.insert(item.entity).second)
          throw InvariantError("line " + std::to_string(line) + ": duplicate entity '" + item.entity + "'");
        out.items.push_back(std::move(item));
        break;
      }
      case KnowledgeFormat::Pairs: {
        if (!j.is_object()) throw ParseError("record must be an object", line);
        KnowledgePair p{require_string(j, "work_title", line), require_string(j, "author", line), false};
        if (auto t = j.find("is_target"); t != j.end()) p.is_target = parse_flag(*t, line);
        add_pair(out.pairs, pairs_seen, std::move(p), line);
        break;
      }
      case KnowledgeFormat::Facts: {
        std::string fact = j.is_string() ? j.get<std::string>() : (j.is_object() ? require_string(j, "fact", line) : "");
        fact = trim(fact);
        if (fact.empty()) throw ParseError("fact must be a non-empty string", line);
        try {
          check_needle_parts("x", fact);
        } catch (const InvalidArgument& e) {
          throw ParseError(e.what(), line);
        }
        if (!facts.insert(fact).second)
          throw InvariantError("line " + std::to_string(line) + ": duplicate fact '" + fact + "'");
        out.facts.push_back(std::move(fact));
        break;
      }
    }
  });
  return out;
}

std::set<std::string> intersect_profiles(const std::vector<ParametricProfile>& profiles) {
  if (profiles.empty()) throw InvalidArgument("intersect_profiles needs at least one profile");
  std::set<std::string> out;
  for (const auto& [entity, answer] : profiles.front().entries) {
    const std::string norm = normalize_answer(answer);
    bool keep = true;
    for (std::size_t i = 1; i < profiles.size() && keep; ++i) {
      auto it = profiles[i].entries.find(entity);
      keep = it != profiles[i].entries.end() && normalize_answer(it->second) == norm;
    }
    if (keep) out.insert(entity);
  }
  return out;
}

std::vector<NeedleFact> sample_distractors(const std::vector<KnowledgePair>& pairs,
                                           const std::vector<std::string>& facts,
                                           std::string_view target_author, int k, std::uint64_t seed,
                                           const std::vector<std::string>& exclude_facts) {
  if (k < 0) throw InvalidArgument("distractor count must be non-negative");
  if (k == 0) return {};
  const std::string target_norm = normalize_answer(target_author);
  std::vector<std::string> authors;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    std::string norm = normalize_answer(p.author);
    if (norm == target_norm || !seen.insert(norm).second) continue;
    authors.push_back(p.author);
  }
  if (static_cast<std::size_t>(k) > authors.size())
    throw InvalidArgument("requested " + std::to_string(k) + " distractors but only " +
                          std::to_string(authors.size()) + " non-target authors exist");
  std::vector<std::string> pool;
  for (const auto& f : facts)
    if (std::find(exclude_facts.begin(), exclude_facts.end(), f) == exclude_facts.end()) pool.push_back(f);
  if (static_cast<std::size_t>(k) > pool.size())
    throw InvalidArgument("requested " + std::to_string(k) + " distractors but only " + std::to_string(pool.size()) +
                          " unused facts exist");

  Rng rng(seed);
  auto partial_shuffle = [&](std::vector<std::string>& v) {
    for (int i = 0; i < k; ++i) {
      std::size_t j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.below(v.size() - i));
      std::swap(v[i], v[j]);
    }
  };
  partial_shuffle(authors);
  partial_shuffle(pool);
  std::vector<NeedleFact> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(make_needle(authors[i], pool[i]));
  return out;
}

std::string render_needle(std::string_view author, std::string_view fact) {
  check_needle_parts(author, fact);
  std::string s(kNeedlePrefix);
  s.append(author).append(kNeedleInfix).append(fact).push_back('.');
  return s;
}

NeedleFact make_needle(std::string_view author, std::string_view fact) {
  return NeedleFact{std::string(author), std::string(fact), render_needle(author, fact)};
}

void save_profile(const ParametricProfile& profile, const std::string& path) {
  json j;
  j["model_id"] = profile.model_id;
  j["entries"] = profile.entries;
  j["digest"] = profile.digest();
  j["provenance"] = {{"timestamp", profile.provenance.timestamp}, {"config_digest", profile.provenance.config_digest}};
  write_text_file(path, j.dump(2) + "\n");
}

ParametricProfile load_profile(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  ParametricProfile p;
  try {
    p.model_id = j.value("model_id", "");
    p.entries = j.at("entries").get<std::map<std::string, std::string>>();
    if (auto pr = j.find("provenance"); pr != j.end()) {
      p.provenance.timestamp = pr->value("timestamp", "");
      p.provenance.config_digest = pr->value("config_digest", "");
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  for (const auto& [e, a] : p.entries)
    if (normalize_answer(a).empty()) throw InvariantError(path + ": empty answer for entity '" + e + "'");
  return p;
}

}  // namespace hniah
