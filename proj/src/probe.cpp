// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/probe.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hniah/digest.hpp"
#include "hniah/errors.hpp"
#include "hniah/jsonl.hpp"
#include "hniah/rng.hpp"
#include "hniah/scoring.hpp"
#include "hniah/text.hpp"

namespace hniah {

std::string probe_prompt(std::string_view question) {
  std::string p = "Answer the following question with a short answer. Do not explain.\n\nQuestion: ";
  p.append(question).append("\nAnswer:");
  return p;
}

std::string context_prompt(std::string_view context, std::string_view question) {
  std::string p = "Answer the question using only the context below with a short answer.\n\nContext: ";
  p.append(context).append("\n\nQuestion: ").append(question).append("\nAnswer:");
  return p;
}

std::string probe_config_digest(const GenerationConfig& cfg) {
  json j = {{"template", kProbeTemplateVersion},
            {"max_new_tokens", cfg.max_new_tokens},
            {"temperature", cfg.temperature},
            {"stop", cfg.stop_sequences}};
  return sha256_hex(j.dump()).substr(0, 16);
}

ProbeResult probe_entity(Backend& backend, const KnowledgeItem& item, const GenerationConfig& cfg) {
  ProbeResult r;
  r.entity = item.entity;
  for (const auto& q : item.questions) {
    Completion c = backend.generate(probe_prompt(q), cfg);
    r.normalized_answers.push_back(normalize_answer(c.text));
    r.answers.push_back(std::move(c.text));
  }
  return r;
}

std::vector<ProbeResult> probe_all(Backend& backend, const std::vector<KnowledgeItem>& items, const ProbeOptions& opts) {
  std::vector<ProbeResult> out(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        out[i] = probe_entity(backend, items[i], opts.generation);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
        next = items.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(opts.concurrency, static_cast<int>(std::max<std::size_t>(items.size(), 1))));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

ParametricProfile consistency_filter(const std::vector<ProbeResult>& results, std::string model_id) {
  ParametricProfile profile;
  profile.model_id = std::move(model_id);
  for (const auto& r : results) {
    if (r.normalized_answers.empty()) continue;
    const std::string& first = r.normalized_answers.front();
    if (first.empty()) continue;
    bool same = std::all_of(r.normalized_answers.begin(), r.normalized_answers.end(),
                            [&](const std::string& a) { return a == first; });
    if (same) profile.entries[r.entity] = first;
  }
  return profile;
}

IWhoQASubsets build_iwhoqa_subsets(const ParametricProfile& profile, const KnowledgeSet& knowledge, std::uint64_t seed,
                                   std::size_t max_examples) {
  IWhoQASubsets out;
  std::vector<const KnowledgeItem*> items;
  for (const auto& [entity, answer] : profile.entries) {
    if (max_examples && items.size() >= max_examples) break;
    const KnowledgeItem* item = knowledge.find_entity(entity);
    if (!item) throw InvalidArgument("profile entity '" + entity + "' not found in knowledge set");
    items.push_back(item);
  }

  Rng rng(seed);
  for (const KnowledgeItem* item : items) {
    const std::string& answer = profile.entries.at(item->entity);
    const Candidate* matching = nullptr;
    const Candidate* conflicting = nullptr;
    std::string conflicting_norm;
    for (const auto& c : item->candidates) {
      const std::string norm = normalize_answer(c.answer);
      if (norm == answer) {
        if (!matching) matching = &c;
      } else if (!norm.empty() && (!conflicting || norm < conflicting_norm)) {
        conflicting = &c;
        conflicting_norm = norm;
      }
    }
    std::optional<std::string> opposing;
    if (conflicting) opposing = conflicting->answer;
    if (matching)
      out.parametric.push_back(
          {item->id, item->question(), matching->context, matching->answer, opposing, SubsetLabel::Parametric});
    if (conflicting)
      out.conflict.push_back(
          {item->id, item->question(), conflicting->context, conflicting->answer, answer, SubsetLabel::Conflict});

    // Irrelevant context: another entity's context, preferring a different
    // entity type and never mentioning this entity or its answer.
    std::vector<const Candidate*> preferred, fallback;
    for (const auto& other : knowledge.items) {
      if (&other == item) continue;
      for (const auto& c : other.candidates) {
        if (c.context.find(item->entity) != std::string::npos) continue;
        if (normalize_answer(c.context).find(answer) != std::string::npos) continue;
        (other.entity_type != item->entity_type ? preferred : fallback).push_back(&c);
      }
    }
    const auto& pool = preferred.empty() ? fallback : preferred;
    if (!pool.empty()) {
      const Candidate* pick = pool[static_cast<std::size_t>(rng.below(pool.size()))];
      out.irrelevant.push_back(
          {item->id, item->question(), pick->context, answer, std::nullopt, SubsetLabel::Irrelevant});
    }
  }
  return out;
}

std::vector<HotpotItem> load_hotpot_items(const std::string& path) {
  std::vector<HotpotItem> out;
  std::size_t auto_id = 0;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      HotpotItem h;
      ++auto_id;
      h.id = j.contains("id") ? j["id"].get<std::string>() : "hp-" + std::to_string(auto_id);
      h.question = j.at("question").get<std::string>();
      h.context = j.at("context").get<std::string>();
      h.reference_answer = j.at("reference_answer").get<std::string>();
      if (trim(h.question).empty() || trim(h.reference_answer).empty())
        throw ParseError("empty question or reference_answer", line);
      out.push_back(std::move(h));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad hotpot record: ") + e.what(), line);
    }
  });
  return out;
}

bool answer_matches(std::string_view answer, std::string_view reference) {
  const TokenSet ref = normalize_tokens(reference);
  return !ref.empty() && normalize_tokens(answer).includes(ref);
}

HotpotSubsets build_hotpot_subsets(const ParametricProfile& profile, const std::vector<HotpotItem>& items,
                                   Backend& backend, const GenerationConfig& cfg) {
  HotpotSubsets out;
  for (const auto& item : items) {
    std::string parametric;
    if (auto it = profile.entries.find(item.question); it != profile.entries.end())
      parametric = it->second;
    else
      parametric = backend.generate(probe_prompt(item.question), cfg).text;
    const std::string contextual = backend.generate(context_prompt(item.context, item.question), cfg).text;

    const bool param_ok = answer_matches(parametric, item.reference_answer);
    const bool ctx_ok = answer_matches(contextual, item.reference_answer);
    const bool sources_agree = normalize_answer(parametric) == normalize_answer(contextual) || (param_ok && ctx_ok);
    if (sources_agree) continue;
    if (param_ok) {
      std::optional<std::string> opp;
      if (!normalize_tokens(contextual).empty()) opp = trim(contextual);
      out.parametric.push_back(
          {item.id, item.question, item.context, item.reference_answer, opp, SubsetLabel::HotpotParametric});
    } else if (ctx_ok) {
      std::optional<std::string> opp;
      if (!normalize_tokens(parametric).empty()) opp = trim(parametric);
      out.context.push_back(
          {item.id, item.question, item.context, item.reference_answer, opp, SubsetLabel::HotpotContext});
    }
  }
  return out;
}

}  // namespace hniah
