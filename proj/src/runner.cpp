// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/runner.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "hniah/errors.hpp"
#include "hniah/text.hpp"

namespace hniah {

namespace {

std::string status_name(RecordStatus s) { return s == RecordStatus::Ok ? "ok" : "failed"; }

using DoneSet = std::set<std::pair<std::string, int>>;

DoneSet completed_units(const std::string& path, const std::string& model_id) {
  DoneSet done;
  for (const auto& r : read_results(path))
    if (r.model_id == model_id) done.emplace(r.instance_id, r.generation_length);
  return done;
}

// Serialized, append-only sink. Each record is one write(2) on an O_APPEND
// descriptor, so a crash can leave at most one partial trailing line.
class ResultSink {
 public:
  ResultSink(const std::string& path, bool truncate, bool sync) : sync_(sync) {
    int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC;
    if (truncate) flags |= O_TRUNC;
    fd_ = ::open(path.c_str(), flags, 0644);
    if (fd_ < 0) throw IoError("cannot open results file " + path + ": " + std::strerror(errno));
  }
  ~ResultSink() {
    if (fd_ >= 0) ::close(fd_);
  }
  ResultSink(const ResultSink&) = delete;
  ResultSink& operator=(const ResultSink&) = delete;

  void write(const RunRecord& r) {
    std::string line = record_to_json(r).dump();
    line.push_back('\n');
    std::lock_guard lk(mu_);
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError(std::string("results write failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (sync_) ::fdatasync(fd_);
  }

 private:
  int fd_ = -1;
  bool sync_;
  std::mutex mu_;
};

struct Unit {
  std::shared_ptr<const Instance> instance;
  int generation_length = 0;
};

// Thread-safe producer of pending work units.
class UnitSource {
 public:
  virtual ~UnitSource() = default;
  virtual std::optional<Unit> next() = 0;
};

class PendingFilter {
 public:
  PendingFilter(DoneSet done, std::vector<int> gens) : done_(std::move(done)), gens_(std::move(gens)) {}

  // Appends the pending units of `inst` to `out`; returns the number skipped.
  std::size_t expand(std::shared_ptr<const Instance> inst, std::vector<Unit>& out) const {
    std::size_t skipped = 0;
    for (int g : gens_) {
      if (done_.count({inst->id, g}))
        ++skipped;
      else
        out.push_back({inst, g});
    }
    return skipped;
  }

 private:
  DoneSet done_;
  std::vector<int> gens_;
};

class VectorSource final : public UnitSource {
 public:
  VectorSource(const std::vector<Instance>& instances, const PendingFilter& filter, std::size_t& skipped) {
    for (const auto& inst : instances) skipped += filter.expand(std::make_shared<const Instance>(inst), units_);
  }
  std::optional<Unit> next() override {
    std::size_t i = next_.fetch_add(1);
    if (i >= units_.size()) return std::nullopt;
    return units_[i];
  }

 private:
  std::vector<Unit> units_;
  std::atomic<std::size_t> next_{0};
};

class FileSource final : public UnitSource {
 public:
  FileSource(const std::string& path, const PendingFilter& filter, std::size_t& skipped)
      : in_(path, std::ios::binary), filter_(filter), skipped_(skipped) {
    if (!in_) throw IoError("cannot open " + path);
  }
  std::optional<Unit> next() override {
    std::lock_guard lk(mu_);
    while (queue_pos_ >= queue_.size()) {
      queue_.clear();
      queue_pos_ = 0;
      std::string line;
      if (!std::getline(in_, line)) return std::nullopt;
      ++lineno_;
      if (trim(line).empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed instance: ") + e.what(), lineno_);
      }
      skipped_ += filter_.expand(std::make_shared<const Instance>(instance_from_json(j)), queue_);
    }
    return queue_[queue_pos_++];
  }

 private:
  std::mutex mu_;
  std::ifstream in_;
  const PendingFilter& filter_;
  std::size_t& skipped_;
  std::vector<Unit> queue_;
  std::size_t queue_pos_ = 0;
  std::size_t lineno_ = 0;
};

RunSummary run_units(Backend& backend, UnitSource& source, const RunConfig& cfg, const std::string& model_id,
                     ResultSink& sink) {
  RunSummary summary;
  std::mutex mu;
  std::atomic<std::size_t> dispatched{0};
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      if (cfg.stop_after && dispatched.load() >= *cfg.stop_after) return;
      std::optional<Unit> unit;
      try {
        unit = source.next();
      } catch (...) {
        std::lock_guard lk(mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
      if (!unit) return;
      if (cfg.stop_after && dispatched.fetch_add(1) >= *cfg.stop_after) return;
      if (!cfg.stop_after) dispatched.fetch_add(1);
      {
        std::lock_guard lk(mu);
        if (fatal) return;
      }

      const Instance& inst = *unit->instance;
      GenerationConfig gen{unit->generation_length, cfg.temperature, cfg.stop_sequences};
      RunRecord rec;
      try {
        Completion c = backend.generate(inst.prompt, gen);
        rec = make_record(inst, model_id, unit->generation_length, c.text, cfg.score_mode);
        rec.wall_time_seconds = c.latency.count();
      } catch (const Error& e) {
        rec = make_record(inst, model_id, unit->generation_length, "", cfg.score_mode);
        rec.score = 0.0;
        rec.alignment.reset();
        rec.status = RecordStatus::Failed;
        rec.error = e.what();
      }
      try {
        sink.write(rec);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
      std::lock_guard lk(mu);
      ++summary.written;
      if (!rec.ok()) ++summary.failed;
    }
  };

  const int n = std::max(1, cfg.concurrency);
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (fatal) std::rethrow_exception(fatal);
  return summary;
}

void check_run_config(const RunConfig& cfg) {
  if (cfg.results_path.empty()) throw InvalidArgument("results_path is required");
  if (cfg.generation_lengths.empty()) throw InvalidArgument("at least one generation length is required");
  for (int g : cfg.generation_lengths)
    if (g <= 0) throw InvalidArgument("generation lengths must be positive");
}

}  // namespace

json record_to_json(const RunRecord& r) {
  json j = {{"instance_id", r.instance_id},
            {"model_id", r.model_id},
            {"mode", to_string(r.mode)},
            {"prediction", r.prediction},
            {"reference", r.reference},
            {"score", r.score},
            {"interval", r.interval},
            {"depth_index", r.depth_index},
            {"distractor_count", r.distractor_count},
            {"generation_length", r.generation_length},
            {"context_length", r.context_length},
            {"depth_fraction", r.depth_fraction},
            {"wall_time_s", r.wall_time_seconds},
            {"status", status_name(r.status)}};
  if (r.opposing) j["opposing"] = *r.opposing;
  if (r.alignment) j["alignment"] = to_string(*r.alignment);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.instance_id = j.at("instance_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw ParseError("unknown mode in record", 0);
  r.mode = *mode;
  r.prediction = j.value("prediction", "");
  r.reference = j.value("reference", "");
  if (auto o = j.find("opposing"); o != j.end() && o->is_string()) r.opposing = o->get<std::string>();
  r.score = j.at("score").get<double>();
  if (r.score < 0.0 || r.score > 1.0) throw ParseError("score outside [0, 1]", 0);
  if (auto a = j.find("alignment"); a != j.end() && a->is_string()) {
    r.alignment = parse_alignment(a->get<std::string>());
    if (!r.alignment) throw ParseError("unknown alignment label", 0);
  }
  r.interval = j.at("interval").get<int>();
  r.depth_index = j.at("depth_index").get<int>();
  r.distractor_count = j.value("distractor_count", 0);
  r.generation_length = j.at("generation_length").get<int>();
  r.context_length = j.value("context_length", std::size_t{0});
  r.depth_fraction = j.value("depth_fraction", 0.0);
  r.wall_time_seconds = j.value("wall_time_s", 0.0);
  r.status = j.value("status", "ok") == "ok" ? RecordStatus::Ok : RecordStatus::Failed;
  r.error = j.value("error", "");
  return r;
}

std::vector<RunRecord> read_results(const std::string& path) {
  std::vector<RunRecord> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string data = read_file(path);
  std::size_t pos = 0, lineno = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    const bool complete = nl != std::string::npos;
    std::string_view line(data.data() + pos, (complete ? nl : data.size()) - pos);
    pos = complete ? nl + 1 : data.size();
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (!complete) break;  // interrupted append
      throw ParseError(std::string("bad results record: ") + e.what(), lineno);
    }
  }
  return out;
}

std::size_t repair_results_file(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) return 0;
  const std::string data = read_file(path);
  if (data.empty() || data.back() == '\n') return 0;
  const std::size_t nl = data.rfind('\n');
  const std::size_t keep = nl == std::string::npos ? 0 : nl + 1;
  std::string_view tail(data.data() + keep, data.size() - keep);
  try {
    record_from_json(json::parse(tail));
    std::ofstream(path, std::ios::binary | std::ios::app) << '\n';
    return 0;
  } catch (const std::exception&) {
  }
  fs::resize_file(path, keep);
  return data.size() - keep;
}

std::vector<WorkUnit> resume(const std::string& results_path, const std::vector<Instance>& instances,
                             const std::string& model_id, const std::vector<int>& generation_lengths) {
  const DoneSet done = completed_units(results_path, model_id);
  std::vector<WorkUnit> pending;
  for (const auto& inst : instances)
    for (int g : generation_lengths)
      if (!done.count({inst.id, g})) pending.push_back({inst.id, g});
  return pending;
}

RunRecord make_record(const Instance& inst, const std::string& model_id, int generation_length,
                      const std::string& prediction, ScoreMode mode) {
  RunRecord r;
  r.instance_id = inst.id;
  r.model_id = model_id;
  r.mode = inst.mode;
  r.prediction = prediction;
  r.reference = inst.gold_answer;
  r.opposing = inst.opposing_answer;
  r.score = score(prediction, inst.gold_answer, mode);
  if (inst.opposing_answer) {
    try {
      r.alignment = classify_alignment(prediction, inst.gold_answer, *inst.opposing_answer);
    } catch (const InvalidArgument&) {
    }
  }
  r.interval = inst.interval;
  r.depth_index = inst.depth_index;
  r.distractor_count = inst.distractor_count;
  r.generation_length = generation_length;
  r.context_length = inst.context_length;
  r.depth_fraction = inst.depth_fraction;
  return r;
}

RunSummary run_instances(Backend& backend, const std::vector<Instance>& instances, const RunConfig& cfg) {
  check_run_config(cfg);
  const std::string model_id = cfg.model_id.empty() ? backend.id() : cfg.model_id;
  if (cfg.resume) repair_results_file(cfg.results_path);
  PendingFilter filter(cfg.resume ? completed_units(cfg.results_path, model_id) : DoneSet{}, cfg.generation_lengths);
  std::size_t skipped = 0;
  VectorSource source(instances, filter, skipped);
  ResultSink sink(cfg.results_path, !cfg.resume, cfg.sync_each_record);
  RunSummary s = run_units(backend, source, cfg, model_id, sink);
  s.skipped = skipped;
  return s;
}

RunSummary run_grid(Backend& backend, const std::string& instances_path, const RunConfig& cfg) {
  check_run_config(cfg);
  verify_instances(instances_path);
  const std::string model_id = cfg.model_id.empty() ? backend.id() : cfg.model_id;
  if (cfg.resume) repair_results_file(cfg.results_path);
  PendingFilter filter(cfg.resume ? completed_units(cfg.results_path, model_id) : DoneSet{}, cfg.generation_lengths);
  std::size_t skipped = 0;
  FileSource source(instances_path, filter, skipped);
  ResultSink sink(cfg.results_path, !cfg.resume, cfg.sync_each_record);
  RunSummary s = run_units(backend, source, cfg, model_id, sink);
  s.skipped = skipped;
  return s;
}

std::vector<RunRecord> rescore(const std::vector<RunRecord>& records, ScoreMode mode) {
  std::vector<RunRecord> out = records;
  for (auto& r : out) {
    if (!r.ok()) continue;
    r.score = score(r.prediction, r.reference, mode);
    r.alignment.reset();
    if (r.opposing) {
      try {
        r.alignment = classify_alignment(r.prediction, r.reference, *r.opposing);
      } catch (const InvalidArgument&) {
      }
    }
  }
  return out;
}

void write_results(const std::string& path, const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  write_text_file(path, out);
}

}  // namespace hniah
