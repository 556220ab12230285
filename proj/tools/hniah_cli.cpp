// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the C API.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "hniah/hniah.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  hniah_status status;
};

void check(hniah_status s) {
  if (s != HNIAH_OK) {
    std::fprintf(stderr, "hniah: %s: %s\n", hniah_status_name(s), hniah_last_error());
    throw Failure{s};
  }
}

struct ConfigDeleter {
  void operator()(hniah_config* c) const { hniah_config_free(c); }
};
struct BackendDeleter {
  void operator()(hniah_backend* b) const { hniah_backend_free(b); }
};
using ConfigPtr = std::unique_ptr<hniah_config, ConfigDeleter>;
using BackendPtr = std::unique_ptr<hniah_backend, BackendDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  hniah_string_free(s);
  return out;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

ConfigPtr open_config(const Globals& g) {
  hniah_config* c = nullptr;
  check(g.config.empty() ? hniah_config_default(&c) : hniah_config_load(g.config.c_str(), &c));
  ConfigPtr cfg(c);
  if (g.seed) check(hniah_config_set_seed(cfg.get(), *g.seed));
  return cfg;
}

BackendPtr open_backend(const hniah_config* cfg, const std::string& name) {
  hniah_backend* b = nullptr;
  check(hniah_backend_open(cfg, name.c_str(), &b));
  return BackendPtr(b);
}

std::string out_file(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid needle-in-a-haystack evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hniah_version()));

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Harness config JSON")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for sampling and synthesis");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // probe
  auto* probe = app.add_subcommand("probe", "Closed-book probe of a backend's parametric knowledge");
  std::string probe_backend, knowledge, profile_name = "profile.json";
  hniah_probe_options probe_opts;
  hniah_probe_options_init(&probe_opts);
  probe->add_option("--backend", probe_backend, "Backend name")->required();
  probe->add_option("--knowledge", knowledge, "WhoQA-style knowledge file")->required()->check(CLI::ExistingFile);
  probe->add_option("--profile", profile_name, "Profile file name under --out")->capture_default_str();
  probe->add_option("--max-new-tokens", probe_opts.max_new_tokens)->capture_default_str();
  probe->add_option("--concurrency", probe_opts.concurrency)->capture_default_str();

  // intersect
  auto* intersect = app.add_subcommand("intersect", "Intersect parametric profiles across models");
  std::vector<std::string> profiles;
  std::string intersect_name = "intersection.json";
  intersect->add_option("profiles", profiles, "Profile files")->required()->check(CLI::ExistingFile);
  intersect->add_option("--name", intersect_name, "Output file name under --out")->capture_default_str();

  // build-subsets
  auto* subsets = app.add_subcommand("build-subsets", "Build I-WhoQA and HotpotQA evaluation subsets");
  std::string subset_profile, whoqa, hotpot, subset_backend;
  hniah_subset_options subset_opts;
  hniah_subset_options_init(&subset_opts);
  subsets->add_option("--profile", subset_profile)->required()->check(CLI::ExistingFile);
  subsets->add_option("--knowledge", whoqa, "WhoQA-style knowledge file")->required()->check(CLI::ExistingFile);
  subsets->add_option("--hotpot", hotpot, "HotpotQA-style items")->check(CLI::ExistingFile);
  subsets->add_option("--backend", subset_backend, "Backend for context-derived HotpotQA answers");
  subsets->add_option("--max-examples", subset_opts.max_examples)->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize the evaluation grid");
  std::string subset_file, instances_name = "instances.jsonl";
  hniah_synth_options synth_opts;
  hniah_synth_options_init(&synth_opts);
  std::optional<std::size_t> max_context;
  std::optional<int> n_intervals, n_depths, n_examples;
  std::vector<std::string> modes;
  synth->add_option("--subset", subset_file, "Pad a subset file instead of the needle grid")
      ->check(CLI::ExistingFile);
  synth->add_option("--name", instances_name, "Instance file name under --out")->capture_default_str();
  synth->add_option("--threads", synth_opts.threads)->capture_default_str();
  synth->add_option("--max-context", max_context);
  synth->add_option("--intervals", n_intervals);
  synth->add_option("--depths", n_depths);
  synth->add_option("--examples", n_examples);
  synth->add_option("--mode", modes, "niah and/or hybrid");

  // run
  auto* run = app.add_subcommand("run", "Run a backend over an instance file");
  std::string run_backend, instances, results_name = "results.jsonl", model_id;
  std::optional<int> concurrency;
  bool resume = false, run_multiset = false;
  std::vector<int> gen_lengths;
  std::size_t stop_after = 0;
  run->add_option("--backend", run_backend, "Backend name")->required();
  run->add_option("--instances", instances, "Instance file")->required()->check(CLI::ExistingFile);
  run->add_option("--concurrency", concurrency, "Worker count (default: config)");
  run->add_flag("--resume", resume, "Skip units already present in the results file");
  run->add_option("--name", results_name, "Results file name under --out")->capture_default_str();
  run->add_option("--model-id", model_id, "Model id recorded in results (default: backend id)");
  run->add_option("--gen-lengths", gen_lengths, "Generation lengths (default: grid)");
  run->add_flag("--multiset", run_multiset, "Multiset token scoring");
  run->add_option("--stop-after", stop_after, "Stop after this many new records")->group("");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score a prediction or rescore a results file");
  std::string results_in, prediction, reference, rescored_name = "results.rescored.jsonl";
  bool score_multiset = false;
  score_cmd->add_option("--results", results_in)->check(CLI::ExistingFile);
  score_cmd->add_option("--prediction", prediction);
  score_cmd->add_option("--reference", reference);
  score_cmd->add_option("--name", rescored_name, "Rescored file name under --out")->capture_default_str();
  score_cmd->add_flag("--multiset", score_multiset);

  // report
  auto* report = app.add_subcommand("report", "Aggregate results into tables and heatmaps");
  std::vector<std::string> results_files;
  report->add_option("results", results_files, "Results files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*probe) {
      auto cfg = open_config(g);
      auto backend = open_backend(cfg.get(), probe_backend);
      std::size_t kept = 0;
      const std::string path = out_file(g, profile_name);
      check(hniah_probe(backend.get(), knowledge.c_str(), &probe_opts, path.c_str(), &kept));
      std::printf("%s: %zu invariant entities\n", path.c_str(), kept);
    } else if (*intersect) {
      auto paths = c_strings(profiles);
      std::size_t kept = 0;
      const std::string path = out_file(g, intersect_name);
      check(hniah_intersect(paths.data(), paths.size(), path.c_str(), &kept));
      std::printf("%s: %zu shared entities\n", path.c_str(), kept);
    } else if (*subsets) {
      subset_opts.seed = g.seed.value_or(0);
      BackendPtr backend;
      ConfigPtr cfg;
      if (!subset_backend.empty()) {
        cfg = open_config(g);
        backend = open_backend(cfg.get(), subset_backend);
      }
      fs::create_directories(g.out);
      check(hniah_build_subsets(subset_profile.c_str(), whoqa.c_str(), hotpot.empty() ? nullptr : hotpot.c_str(),
                                backend.get(), &subset_opts, g.out.c_str()));
      std::printf("subsets written to %s\n", g.out.c_str());
    } else if (*synth) {
      auto cfg = open_config(g);
      if (max_context || n_intervals || n_depths || n_examples || !modes.empty()) {
        char* grid = nullptr;
        check(hniah_config_grid_json(cfg.get(), &grid));
        auto j = nlohmann::json::parse(take_string(grid));
        if (max_context) j["max_context_tokens"] = *max_context;
        if (n_intervals) j["n_intervals"] = *n_intervals;
        if (n_depths) j["n_depths"] = *n_depths;
        if (n_examples) j["n_examples"] = *n_examples;
        if (!modes.empty()) j["modes"] = modes;
        check(hniah_config_set_grid_json(cfg.get(), j.dump().c_str()));
      }
      if (!subset_file.empty()) synth_opts.subset_path = subset_file.c_str();
      std::size_t count = 0;
      const std::string path = out_file(g, instances_name);
      check(hniah_synth(cfg.get(), &synth_opts, path.c_str(), &count));
      std::printf("%s: %zu instances\n", path.c_str(), count);
    } else if (*run) {
      auto cfg = open_config(g);
      auto backend = open_backend(cfg.get(), run_backend);
      hniah_run_options ro;
      hniah_run_options_init(&ro);
      const std::string path = out_file(g, results_name);
      ro.results_path = path.c_str();
      if (!model_id.empty()) ro.model_id = model_id.c_str();
      if (!gen_lengths.empty()) {
        ro.generation_lengths = gen_lengths.data();
        ro.n_generation_lengths = gen_lengths.size();
      }
      if (concurrency)
        ro.concurrency = *concurrency;
      else
        check(hniah_config_backend_concurrency(cfg.get(), run_backend.c_str(), &ro.concurrency));
      ro.resume = resume;
      ro.multiset = run_multiset;
      ro.stop_after = stop_after;
      hniah_run_summary s{};
      check(hniah_run(cfg.get(), backend.get(), instances.c_str(), &ro, &s));
      std::printf("%s: %zu written (%zu failed), %zu already present\n", path.c_str(), s.written, s.failed,
                  s.skipped);
    } else if (*score_cmd) {
      if (!results_in.empty()) {
        std::size_t n = 0;
        const std::string path = out_file(g, rescored_name);
        check(hniah_rescore(results_in.c_str(), path.c_str(), score_multiset, &n));
        std::printf("%s: %zu records rescored\n", path.c_str(), n);
      } else {
        if (reference.empty()) {
          std::fprintf(stderr, "hniah score: --results or --prediction/--reference required\n");
          return 2;
        }
        double v = 0.0;
        check(hniah_score(prediction.c_str(), reference.c_str(), score_multiset, &v));
        std::printf("%.6f\n", v);
      }
    } else if (*report) {
      auto paths = c_strings(results_files);
      char* table = nullptr;
      check(hniah_report(paths.data(), paths.size(), g.out.c_str(), &table));
      std::fputs(take_string(table).c_str(), stdout);
    }
  } catch (const Failure& f) {
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hniah: %s\n", e.what());
    return 1;
  }
  return 0;
}
