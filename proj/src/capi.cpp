// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/hniah.h"

#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "hniah/config.hpp"
#include "hniah/digest.hpp"
#include "hniah/errors.hpp"
#include "hniah/probe.hpp"
#include "hniah/report.hpp"
#include "hniah/runner.hpp"
#include "hniah/scoring.hpp"
#include "hniah/tokenizer.hpp"

struct hniah_config {
  hniah::HarnessConfig cfg;
};

struct hniah_backend {
  std::unique_ptr<hniah::Backend> impl;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

hniah_status status_for(hniah::ErrorKind k) {
  switch (k) {
    case hniah::ErrorKind::InvalidArgument: return HNIAH_ERR_INVALID_ARGUMENT;
    case hniah::ErrorKind::Io: return HNIAH_ERR_IO;
    case hniah::ErrorKind::Parse: return HNIAH_ERR_PARSE;
    case hniah::ErrorKind::Invariant: return HNIAH_ERR_INVARIANT;
    case hniah::ErrorKind::Transport: return HNIAH_ERR_TRANSPORT;
    case hniah::ErrorKind::ContextOverflow: return HNIAH_ERR_CONTEXT_OVERFLOW;
    case hniah::ErrorKind::Manifest: return HNIAH_ERR_MANIFEST;
  }
  return HNIAH_ERR_INTERNAL;
}

template <typename F>
hniah_status guarded(F&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return HNIAH_OK;
  } catch (const hniah::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const hniah::json::exception& e) {
    g_last_error = e.what();
    return HNIAH_ERR_PARSE;
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return HNIAH_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HNIAH_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HNIAH_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HNIAH_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw hniah::InvalidArgument(what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_name(const std::string& p) { return fs::path(p).filename().string(); }

struct LoadedAssets {
  std::vector<hniah::KnowledgePair> pairs;
  std::vector<std::string> facts;
  std::shared_ptr<const hniah::Tokenizer> tokenizer;
  hniah::Corpus corpus;
  std::map<std::string, std::string> digests;
};

LoadedAssets load_assets(const hniah::HarnessConfig& cfg) {
  const auto& a = cfg.assets;
  if (!a.manifest.empty() && fs::exists(a.manifest)) hniah::verify_checksum_manifest(a.manifest);
  LoadedAssets out;
  out.pairs = hniah::load_knowledge(a.pairs, hniah::KnowledgeFormat::Pairs).pairs;
  out.facts = hniah::load_knowledge(a.facts, hniah::KnowledgeFormat::Facts).facts;
  out.tokenizer = hniah::make_tokenizer(cfg.tokenizer);
  out.corpus = hniah::ingest_corpus_dir(a.corpus_dir, *out.tokenizer);
  out.digests["pairs"] = hniah::sha256_file(a.pairs);
  out.digests["facts"] = hniah::sha256_file(a.facts);
  std::vector<fs::path> docs;
  for (const auto& e : fs::directory_iterator(a.corpus_dir))
    if (e.is_regular_file()) docs.push_back(e.path());
  std::sort(docs.begin(), docs.end());
  for (const auto& d : docs) out.digests["corpus/" + d.filename().string()] = hniah::sha256_file(d.string());
  return out;
}

}  // namespace

extern "C" {

const char* hniah_version(void) { return "0.1.0"; }

const char* hniah_last_error(void) { return g_last_error.c_str(); }

const char* hniah_status_name(hniah_status status) {
  switch (status) {
    case HNIAH_OK: return "ok";
    case HNIAH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HNIAH_ERR_IO: return "i/o error";
    case HNIAH_ERR_PARSE: return "parse error";
    case HNIAH_ERR_INVARIANT: return "invariant violated";
    case HNIAH_ERR_TRANSPORT: return "transport error";
    case HNIAH_ERR_CONTEXT_OVERFLOW: return "context overflow";
    case HNIAH_ERR_MANIFEST: return "manifest mismatch";
    case HNIAH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void hniah_string_free(char* s) { std::free(s); }

hniah_status hniah_config_default(hniah_config** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new hniah_config{hniah::default_config()};
  });
}

hniah_status hniah_config_load(const char* path, hniah_config** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new hniah_config{hniah::load_config(path)};
  });
}

void hniah_config_free(hniah_config* cfg) { delete cfg; }

hniah_status hniah_config_set_seed(hniah_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "cfg is null");
    cfg->cfg.grid.seed = seed;
  });
}

hniah_status hniah_config_set_grid_json(hniah_config* cfg, const char* grid_json) {
  return guarded([&] {
    require(cfg && grid_json, "cfg and grid_json are required");
    hniah::GridSpec g = hniah::grid_spec_from_json(hniah::json::parse(grid_json));
    g.validate();
    cfg->cfg.grid = std::move(g);
  });
}

hniah_status hniah_config_grid_json(const hniah_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out are required");
    *out = dup_string(hniah::grid_spec_to_json(cfg->cfg.grid).dump(2));
  });
}

hniah_status hniah_config_backend_concurrency(const hniah_config* cfg, const char* backend, int* out) {
  return guarded([&] {
    require(cfg && backend && out, "cfg, backend and out are required");
    *out = hniah::backend_concurrency(cfg->cfg, backend);
  });
}

hniah_status hniah_backend_open(const hniah_config* cfg, const char* name, hniah_backend** out) {
  return guarded([&] {
    require(cfg && name && out, "cfg, name and out are required");
    *out = new hniah_backend{hniah::open_backend(cfg->cfg, name)};
  });
}

void hniah_backend_free(hniah_backend* backend) { delete backend; }

hniah_status hniah_backend_id(const hniah_backend* backend, char** out) {
  return guarded([&] {
    require(backend && out, "backend and out are required");
    *out = dup_string(backend->impl->id());
  });
}

hniah_status hniah_backend_max_context(const hniah_backend* backend, size_t* out) {
  return guarded([&] {
    require(backend && out, "backend and out are required");
    *out = backend->impl->max_context();
  });
}

hniah_status hniah_generate(hniah_backend* backend, const char* prompt, int max_new_tokens, double temperature,
                            char** out_text) {
  return guarded([&] {
    require(backend && prompt && out_text, "backend, prompt and out_text are required");
    require(max_new_tokens > 0, "max_new_tokens must be positive");
    hniah::GenerationConfig gen;
    gen.max_new_tokens = max_new_tokens;
    gen.temperature = temperature;
    *out_text = dup_string(backend->impl->generate(prompt, gen).text);
  });
}

hniah_status hniah_score(const char* prediction, const char* reference, int multiset, double* out) {
  return guarded([&] {
    require(prediction && reference && out, "prediction, reference and out are required");
    *out = hniah::score(prediction, reference, multiset ? hniah::ScoreMode::Multiset : hniah::ScoreMode::Set);
  });
}

hniah_status hniah_classify_alignment(const char* prediction, const char* injected, const char* opposing,
                                      hniah_alignment* out) {
  return guarded([&] {
    require(prediction && injected && opposing && out, "all arguments are required");
    switch (hniah::classify_alignment(prediction, injected, opposing)) {
      case hniah::AlignmentLabel::AlignedInjected: *out = HNIAH_ALIGNED_INJECTED; break;
      case hniah::AlignmentLabel::AlignedOpposing: *out = HNIAH_ALIGNED_OPPOSING; break;
      case hniah::AlignmentLabel::Neither: *out = HNIAH_ALIGNED_NEITHER; break;
    }
  });
}

void hniah_probe_options_init(hniah_probe_options* opts) {
  if (!opts) return;
  opts->max_new_tokens = 32;
  opts->concurrency = 4;
}

hniah_status hniah_probe(hniah_backend* backend, const char* knowledge_path, const hniah_probe_options* opts,
                         const char* profile_out, size_t* kept) {
  return guarded([&] {
    require(backend && knowledge_path && profile_out, "backend, knowledge_path and profile_out are required");
    hniah_probe_options o;
    hniah_probe_options_init(&o);
    if (opts) o = *opts;
    require(o.max_new_tokens > 0 && o.concurrency > 0, "probe options must be positive");
    auto ks = hniah::load_knowledge(knowledge_path, hniah::KnowledgeFormat::WhoQA);
    hniah::ProbeOptions po;
    po.generation.max_new_tokens = o.max_new_tokens;
    po.concurrency = o.concurrency;
    auto results = hniah::probe_all(*backend->impl, ks.items, po);
    auto profile = hniah::consistency_filter(results, backend->impl->id());
    profile.provenance.timestamp = utc_timestamp();
    profile.provenance.config_digest = hniah::probe_config_digest(po.generation);
    hniah::save_profile(profile, profile_out);
    if (kept) *kept = profile.entries.size();
  });
}

hniah_status hniah_intersect(const char* const* profile_paths, size_t n_profiles, const char* out_path,
                             size_t* kept) {
  return guarded([&] {
    require(profile_paths && n_profiles > 0 && out_path, "at least one profile and out_path are required");
    std::vector<hniah::ParametricProfile> profiles;
    for (size_t i = 0; i < n_profiles; ++i) {
      require(profile_paths[i], "null profile path");
      profiles.push_back(hniah::load_profile(profile_paths[i]));
    }
    auto common = hniah::intersect_profiles(profiles);
    // Answers come from the first profile; the model id lists all members.
    hniah::ParametricProfile out;
    std::string ids, digests;
    for (const auto& p : profiles) {
      ids += (ids.empty() ? "" : "+") + p.model_id;
      digests += p.digest();
    }
    out.model_id = ids;
    for (const auto& e : common) out.entries[e] = profiles.front().entries.at(e);
    out.provenance.timestamp = utc_timestamp();
    out.provenance.config_digest = hniah::sha256_hex(digests).substr(0, 16);
    hniah::save_profile(out, out_path);
    if (kept) *kept = out.entries.size();
  });
}

void hniah_subset_options_init(hniah_subset_options* opts) {
  if (!opts) return;
  opts->seed = 0;
  opts->max_examples = 300;
  opts->max_new_tokens = 32;
}

hniah_status hniah_build_subsets(const char* profile_path, const char* whoqa_path, const char* hotpot_path,
                                 hniah_backend* backend, const hniah_subset_options* opts, const char* out_dir) {
  return guarded([&] {
    require(profile_path && whoqa_path && out_dir, "profile_path, whoqa_path and out_dir are required");
    require(!hotpot_path || backend, "a backend is required for the HotpotQA subsets");
    hniah_subset_options o;
    hniah_subset_options_init(&o);
    if (opts) o = *opts;
    auto profile = hniah::load_profile(profile_path);
    auto ks = hniah::load_knowledge(whoqa_path, hniah::KnowledgeFormat::WhoQA);
    fs::create_directories(out_dir);
    auto emit = [&](const std::string& label, const std::vector<hniah::SubsetInstance>& v) {
      hniah::SubsetHeader h{label, profile.digest(), o.seed, v.size()};
      hniah::write_subset_file((fs::path(out_dir) / (label + ".jsonl")).string(), h, v);
    };
    auto iw = hniah::build_iwhoqa_subsets(profile, ks, o.seed, o.max_examples);
    emit("iwhoqa_parametric", iw.parametric);
    emit("iwhoqa_conflict", iw.conflict);
    emit("iwhoqa_irrelevant", iw.irrelevant);
    if (hotpot_path) {
      hniah::GenerationConfig gen;
      gen.max_new_tokens = o.max_new_tokens;
      auto hp = hniah::build_hotpot_subsets(profile, hniah::load_hotpot_items(hotpot_path), *backend->impl, gen);
      emit("hotpot_context", hp.context);
      emit("hotpot_parametric", hp.parametric);
    }
  });
}

void hniah_synth_options_init(hniah_synth_options* opts) {
  if (!opts) return;
  opts->subset_path = nullptr;
  opts->threads = 1;
}

hniah_status hniah_synth(const hniah_config* cfg, const hniah_synth_options* opts, const char* out_path,
                         size_t* count) {
  return guarded([&] {
    require(cfg && out_path, "cfg and out_path are required");
    hniah_synth_options o;
    hniah_synth_options_init(&o);
    if (opts) o = *opts;
    require(o.threads > 0, "threads must be positive");
    const auto& c = cfg->cfg;
    c.grid.validate();
    LoadedAssets la = load_assets(c);
    hniah::SynthAssets sa{&la.pairs, &la.facts, &la.corpus, la.tokenizer.get(), c.prompt};
    hniah::InstanceManifest m;
    m.spec = c.grid;
    m.tokenizer = la.tokenizer->name();
    m.tokenizer_digest = la.tokenizer->digest();
    m.prompt_version = c.prompt.version;
    m.assets = la.digests;
    std::size_t n = 0;
    if (o.subset_path) {
      hniah::SubsetHeader header;
      auto subset = hniah::read_subset_file(o.subset_path, &header);
      m.source = file_name(o.subset_path);
      m.assets["subset"] = hniah::sha256_file(o.subset_path);
      auto instances = hniah::expand_subset_grid(c.grid, subset, sa, o.threads);
      n = instances.size();
      hniah::write_instances(out_path, instances, m);
    } else {
      m.source = "grid";
      n = hniah::write_grid(c.grid, sa, out_path, m, o.threads);
    }
    if (count) *count = n;
  });
}

void hniah_run_options_init(hniah_run_options* opts) {
  if (!opts) return;
  opts->results_path = nullptr;
  opts->model_id = nullptr;
  opts->generation_lengths = nullptr;
  opts->n_generation_lengths = 0;
  opts->concurrency = 4;
  opts->resume = 0;
  opts->multiset = 0;
  opts->temperature = 0.0;
  opts->stop_after = 0;
}

hniah_status hniah_run(const hniah_config* cfg, hniah_backend* backend, const char* instances_path,
                       const hniah_run_options* opts, hniah_run_summary* summary) {
  return guarded([&] {
    require(cfg && backend && instances_path && opts && opts->results_path,
            "cfg, backend, instances_path and opts->results_path are required");
    hniah::RunConfig rc;
    rc.results_path = opts->results_path;
    if (opts->model_id) rc.model_id = opts->model_id;
    if (opts->generation_lengths && opts->n_generation_lengths)
      rc.generation_lengths.assign(opts->generation_lengths, opts->generation_lengths + opts->n_generation_lengths);
    else
      rc.generation_lengths = cfg->cfg.grid.generation_lengths;
    rc.concurrency = opts->concurrency;
    rc.resume = opts->resume != 0;
    rc.score_mode = opts->multiset ? hniah::ScoreMode::Multiset : hniah::ScoreMode::Set;
    rc.temperature = opts->temperature;
    if (opts->stop_after) rc.stop_after = opts->stop_after;
    require(rc.concurrency > 0, "concurrency must be positive");
    auto s = hniah::run_grid(*backend->impl, instances_path, rc);
    if (summary) *summary = {s.written, s.failed, s.skipped};
  });
}

hniah_status hniah_rescore(const char* results_path, const char* out_path, int multiset, size_t* count) {
  return guarded([&] {
    require(results_path && out_path, "results_path and out_path are required");
    auto records = hniah::rescore(hniah::read_results(results_path),
                                  multiset ? hniah::ScoreMode::Multiset : hniah::ScoreMode::Set);
    hniah::write_results(out_path, records);
    if (count) *count = records.size();
  });
}

hniah_status hniah_report(const char* const* results_paths, size_t n_paths, const char* out_dir, char** table_text) {
  return guarded([&] {
    require(results_paths && n_paths > 0 && out_dir, "results paths and out_dir are required");
    std::vector<hniah::RunRecord> records;
    for (size_t i = 0; i < n_paths; ++i) {
      require(results_paths[i], "null results path");
      auto r = hniah::read_results(results_paths[i]);
      records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    hniah::write_report(records, out_dir);
    if (table_text) *table_text = dup_string(hniah::table_text(hniah::emit_table(records)));
  });
}

}  // extern "C"
