// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Grid execution with append-only JSONL persistence and resume.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hniah/backend.hpp"
#include "hniah/haystack.hpp"
#include "hniah/scoring.hpp"

namespace hniah {

enum class RecordStatus { Ok, Failed };

struct RunRecord {
  std::string instance_id;
  std::string model_id;
  Mode mode = Mode::Hybrid;
  std::string prediction;
  std::string reference;
  std::optional<std::string> opposing;
  double score = 0.0;
  std::optional<AlignmentLabel> alignment;
  int interval = 0;
  int depth_index = 0;
  int distractor_count = 0;
  int generation_length = 0;
  std::size_t context_length = 0;
  double depth_fraction = 0.0;
  double wall_time_seconds = 0.0;
  RecordStatus status = RecordStatus::Ok;
  std::string error;

  bool ok() const { return status == RecordStatus::Ok; }
  // Alignment was computed but the answer matched both or neither source.
  bool discarded() const { return alignment && *alignment == AlignmentLabel::Neither; }
};

json record_to_json(const RunRecord& r);
RunRecord record_from_json(const json& j);

// Reads every complete record. A trailing line without a newline that does
// not parse is ignored (an interrupted append); any other malformed line is
// a ParseError.
std::vector<RunRecord> read_results(const std::string& path);

// Truncates a trailing partial line, if any. Returns the bytes removed.
std::size_t repair_results_file(const std::string& path);

struct WorkUnit {
  std::string instance_id;
  int generation_length = 0;

  friend auto operator<=>(const WorkUnit&, const WorkUnit&) = default;
};

// Units of (instance, generation length) that have no record for `model_id`
// in the results file. Failed records count as done.
std::vector<WorkUnit> resume(const std::string& results_path, const std::vector<Instance>& instances,
                             const std::string& model_id, const std::vector<int>& generation_lengths);

struct RunConfig {
  std::string results_path;
  std::string model_id;  // defaults to the backend id
  std::vector<int> generation_lengths{32, 64};
  int concurrency = 4;
  bool resume = false;
  ScoreMode score_mode = ScoreMode::Set;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
  // fdatasync after every record.
  bool sync_each_record = false;
  // Stop dispatching after this many new records (testing interruption).
  std::optional<std::size_t> stop_after;
};

struct RunSummary {
  std::size_t written = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;  // already present when resuming
};

// Scores one completion against an instance.
RunRecord make_record(const Instance& inst, const std::string& model_id, int generation_length,
                      const std::string& prediction, ScoreMode mode);

RunSummary run_instances(Backend& backend, const std::vector<Instance>& instances, const RunConfig& cfg);

// Validates the instance file against its manifest (ManifestError on
// mismatch), then streams instances to `cfg.concurrency` workers.
RunSummary run_grid(Backend& backend, const std::string& instances_path, const RunConfig& cfg);

// Recomputes score and alignment from the stored prediction/reference.
std::vector<RunRecord> rescore(const std::vector<RunRecord>& records, ScoreMode mode);
void write_results(const std::string& path, const std::vector<RunRecord>& records);

}  // namespace hniah
