// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Aggregation and reporting over run records: grouped means, depth x length
// heatmaps, the model x (generation length, random facts) table and
// alignment-vs-length curves.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hniah/runner.hpp"

namespace hniah {

enum class GroupKey { Model, Mode, DistractorCount, GenerationLength, Interval, Depth };

// Throws InvalidArgument for names other than model, mode,
// distractor_count, generation_length, interval, depth.
GroupKey parse_group_key(std::string_view name);
std::string_view to_string(GroupKey k);

struct AggregateRow {
  std::vector<std::string> group;
  double mean = 0.0;
  std::size_t count = 0;   // successful records
  std::size_t failed = 0;  // failed records, excluded from the mean
};

// Rows sorted by group values. Throws InvalidArgument on empty input.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, const std::vector<GroupKey>& keys);
std::string aggregate_csv(const std::vector<AggregateRow>& rows, const std::vector<GroupKey>& keys);

struct HeatmapGroup {
  std::string model;
  Mode mode = Mode::Hybrid;
  int distractor_count = 0;
  int generation_length = 32;

  std::string slug() const;
};

struct Heatmap {
  HeatmapGroup group;
  std::vector<double> depth_fractions;        // rows
  std::vector<std::size_t> context_lengths;   // columns
  std::vector<std::vector<double>> sums;      // [row][col]
  std::vector<std::vector<std::size_t>> counts;
  double scale_min = 0.0;
  double scale_max = 1.0;

  std::size_t rows() const { return depth_fractions.size(); }
  std::size_t cols() const { return context_lengths.size(); }
  std::optional<double> cell(std::size_t row, std::size_t col) const;
  // Mean over all records in the group (not a mean of cell means).
  double grand_mean() const;
};

// Rows span depth indices 0..max and columns interval indices 0..max seen
// in the group. Throws InvalidArgument when the group has no records.
Heatmap render_heatmap(const std::vector<RunRecord>& records, const HeatmapGroup& group);
std::string heatmap_csv(const Heatmap& h);
std::string heatmap_svg(const Heatmap& h);

struct ResultTable {
  std::vector<int> generation_lengths;
  std::vector<int> distractor_counts{0, 1, 2, 3};
  // Row label is "<mode>/<model>", ordered by mode then model.
  std::vector<std::string> rows;
  // (row, generation_length, distractor_count) -> mean score in [0,1]
  std::map<std::tuple<std::string, int, int>, double> cells;

  std::optional<double> cell(const std::string& row, int gen, int k) const;
};

ResultTable emit_table(const std::vector<RunRecord>& records);
// Cells are mean x 100 with two decimals; "-" where no records exist.
std::string table_text(const ResultTable& t);
std::string table_csv(const ResultTable& t);

struct TrendPoint {
  std::size_t context_length = 0;
  std::size_t total = 0;
  std::size_t discarded = 0;
  std::size_t considered = 0;
  double injected_fraction = 0.0;
  double opposing_fraction = 0.0;
};

// Only successful records that carry an alignment label participate.
std::vector<TrendPoint> alignment_trend(const std::vector<RunRecord>& records);
std::string trend_csv(const std::vector<TrendPoint>& points);

struct ReportFiles {
  std::vector<std::string> written;
};

// Writes aggregate.csv, table.csv, table.txt, one heatmap CSV + SVG per
// group, and alignment_trend.csv when records carry alignment labels.
ReportFiles write_report(const std::vector<RunRecord>& records, const std::string& out_dir);

}  // namespace hniah
