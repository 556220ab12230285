/* Copyright (c) 2026, hniah contributors */
/* SPDX-License-Identifier: Apache-2.0 */

/*
 * C interface to the hniah evaluation harness.
 *
 * Every fallible call returns an hniah_status; on failure a message is
 * available from hniah_last_error() on the calling thread until the next
 * call on that thread. Strings returned through char** out-parameters are
 * owned by the caller and released with hniah_string_free().
 */

#ifndef HNIAH_HNIAH_H
#define HNIAH_HNIAH_H

#include <stddef.h>
#include <stdint.h>

#if defined(HNIAH_BUILDING_LIBRARY)
#define HNIAH_API __attribute__((visibility("default")))
#else
#define HNIAH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hniah_status {
  HNIAH_OK = 0,
  HNIAH_ERR_INVALID_ARGUMENT = 1,
  HNIAH_ERR_IO = 2,
  HNIAH_ERR_PARSE = 3,
  HNIAH_ERR_INVARIANT = 4,
  HNIAH_ERR_TRANSPORT = 5,
  HNIAH_ERR_CONTEXT_OVERFLOW = 6,
  HNIAH_ERR_MANIFEST = 7,
  HNIAH_ERR_INTERNAL = 8
} hniah_status;

typedef enum hniah_alignment {
  HNIAH_ALIGNED_INJECTED = 0,
  HNIAH_ALIGNED_OPPOSING = 1,
  HNIAH_ALIGNED_NEITHER = 2
} hniah_alignment;

typedef struct hniah_config hniah_config;
typedef struct hniah_backend hniah_backend;

HNIAH_API const char* hniah_version(void);
HNIAH_API const char* hniah_last_error(void);
HNIAH_API const char* hniah_status_name(hniah_status status);
HNIAH_API void hniah_string_free(char* s);

/* Configuration */
HNIAH_API hniah_status hniah_config_default(hniah_config** out);
HNIAH_API hniah_status hniah_config_load(const char* path, hniah_config** out);
HNIAH_API void hniah_config_free(hniah_config* cfg);
HNIAH_API hniah_status hniah_config_set_seed(hniah_config* cfg, uint64_t seed);
/* Replaces the grid spec with the given JSON object (unset fields default). */
HNIAH_API hniah_status hniah_config_set_grid_json(hniah_config* cfg, const char* grid_json);
/* Effective grid spec as JSON. */
HNIAH_API hniah_status hniah_config_grid_json(const hniah_config* cfg, char** out);
HNIAH_API hniah_status hniah_config_backend_concurrency(const hniah_config* cfg, const char* backend, int* out);

/* Backends. A handle may be shared across threads. */
HNIAH_API hniah_status hniah_backend_open(const hniah_config* cfg, const char* name, hniah_backend** out);
HNIAH_API void hniah_backend_free(hniah_backend* backend);
HNIAH_API hniah_status hniah_backend_id(const hniah_backend* backend, char** out);
HNIAH_API hniah_status hniah_backend_max_context(const hniah_backend* backend, size_t* out);
HNIAH_API hniah_status hniah_generate(hniah_backend* backend, const char* prompt, int max_new_tokens,
                                      double temperature, char** out_text);

/* Scoring */
HNIAH_API hniah_status hniah_score(const char* prediction, const char* reference, int multiset, double* out);
HNIAH_API hniah_status hniah_classify_alignment(const char* prediction, const char* injected, const char* opposing,
                                                hniah_alignment* out);

/* Parametric probing. Writes a profile JSON; reports the number of kept entities. */
typedef struct hniah_probe_options {
  int max_new_tokens;
  int concurrency;
} hniah_probe_options;

HNIAH_API void hniah_probe_options_init(hniah_probe_options* opts);
HNIAH_API hniah_status hniah_probe(hniah_backend* backend, const char* knowledge_path,
                                   const hniah_probe_options* opts, const char* profile_out, size_t* kept);
HNIAH_API hniah_status hniah_intersect(const char* const* profile_paths, size_t n_profiles, const char* out_path,
                                       size_t* kept);

/*
 * Writes iwhoqa_parametric.jsonl, iwhoqa_conflict.jsonl and
 * iwhoqa_irrelevant.jsonl into out_dir, plus hotpot_context.jsonl and
 * hotpot_parametric.jsonl when hotpot_path and backend are given.
 */
typedef struct hniah_subset_options {
  uint64_t seed;
  size_t max_examples;
  int max_new_tokens;
} hniah_subset_options;

HNIAH_API void hniah_subset_options_init(hniah_subset_options* opts);
HNIAH_API hniah_status hniah_build_subsets(const char* profile_path, const char* whoqa_path, const char* hotpot_path,
                                           hniah_backend* backend, const hniah_subset_options* opts,
                                           const char* out_dir);

/*
 * Synthesizes the configured grid into out_path (plus its manifest). With a
 * subset_path, each subset instance is instead padded to every cell.
 */
typedef struct hniah_synth_options {
  const char* subset_path;
  int threads;
} hniah_synth_options;

HNIAH_API void hniah_synth_options_init(hniah_synth_options* opts);
HNIAH_API hniah_status hniah_synth(const hniah_config* cfg, const hniah_synth_options* opts, const char* out_path,
                                   size_t* count);

typedef struct hniah_run_options {
  const char* results_path;
  const char* model_id;            /* NULL: backend id */
  const int* generation_lengths;   /* NULL: the grid's lengths */
  size_t n_generation_lengths;
  int concurrency;
  int resume;
  int multiset;
  double temperature;
  size_t stop_after;               /* 0: no limit */
} hniah_run_options;

typedef struct hniah_run_summary {
  size_t written;
  size_t failed;
  size_t skipped;
} hniah_run_summary;

HNIAH_API void hniah_run_options_init(hniah_run_options* opts);
HNIAH_API hniah_status hniah_run(const hniah_config* cfg, hniah_backend* backend, const char* instances_path,
                                 const hniah_run_options* opts, hniah_run_summary* summary);

/* Recomputes scores from stored predictions into out_path. */
HNIAH_API hniah_status hniah_rescore(const char* results_path, const char* out_path, int multiset, size_t* count);

/* Reads one or more results files and writes tables, heatmaps and trends. */
HNIAH_API hniah_status hniah_report(const char* const* results_paths, size_t n_paths, const char* out_dir,
                                    char** table_text);

#ifdef __cplusplus
}
#endif

#endif /* HNIAH_HNIAH_H */
