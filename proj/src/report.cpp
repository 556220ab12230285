// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "hniah/errors.hpp"

namespace hniah {

namespace {

struct GroupValue {
  bool numeric = false;
  long long number = 0;
  std::string text;

  friend bool operator<(const GroupValue& a, const GroupValue& b) {
    if (a.numeric != b.numeric) return a.numeric < b.numeric;
    if (a.numeric) return a.number < b.number;
    return a.text < b.text;
  }
};

GroupValue group_value(const RunRecord& r, GroupKey k) {
  auto num = [](long long v) { return GroupValue{true, v, std::to_string(v)}; };
  switch (k) {
    case GroupKey::Model: return {false, 0, r.model_id};
    case GroupKey::Mode: return {true, static_cast<long long>(r.mode), std::string(to_string(r.mode))};
    case GroupKey::DistractorCount: return num(r.distractor_count);
    case GroupKey::GenerationLength: return num(r.generation_length);
    case GroupKey::Interval: return num(r.interval);
    case GroupKey::Depth: return num(r.depth_index);
  }
  return {};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool in_group(const RunRecord& r, const HeatmapGroup& g) {
  return r.model_id == g.model && r.mode == g.mode && r.distractor_count == g.distractor_count &&
         r.generation_length == g.generation_length;
}

std::string row_label(const RunRecord& r) { return std::string(to_string(r.mode)) + "/" + r.model_id; }

}  // namespace

GroupKey parse_group_key(std::string_view name) {
  if (name == "model") return GroupKey::Model;
  if (name == "mode") return GroupKey::Mode;
  if (name == "distractor_count") return GroupKey::DistractorCount;
  if (name == "generation_length") return GroupKey::GenerationLength;
  if (name == "interval") return GroupKey::Interval;
  if (name == "depth") return GroupKey::Depth;
  throw InvalidArgument("unknown group key: " + std::string(name));
}

std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::Model: return "model";
    case GroupKey::Mode: return "mode";
    case GroupKey::DistractorCount: return "distractor_count";
    case GroupKey::GenerationLength: return "generation_length";
    case GroupKey::Interval: return "interval";
    case GroupKey::Depth: return "depth";
  }
  return "?";
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, const std::vector<GroupKey>& keys) {
  if (records.empty()) throw InvalidArgument("no records to aggregate");
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0, failed = 0;
  };
  std::map<std::vector<GroupValue>, Acc> groups;
  for (const auto& r : records) {
    std::vector<GroupValue> key;
    key.reserve(keys.size());
    for (GroupKey k : keys) key.push_back(group_value(r, k));
    Acc& a = groups[key];
    if (r.ok()) {
      a.sum += r.score;
      ++a.count;
    } else {
      ++a.failed;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, a] : groups) {
    AggregateRow row;
    for (const auto& v : key) row.group.push_back(v.text);
    row.count = a.count;
    row.failed = a.failed;
    row.mean = a.count ? a.sum / static_cast<double>(a.count) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows, const std::vector<GroupKey>& keys) {
  std::ostringstream os;
  for (GroupKey k : keys) os << to_string(k) << ',';
  os << "mean,count,failed\n";
  for (const auto& row : rows) {
    for (const auto& g : row.group) os << csv_field(g) << ',';
    os << fmt("%.4f", row.mean) << ',' << row.count << ',' << row.failed << '\n';
  }
  return os.str();
}

std::string HeatmapGroup::slug() const {
  std::string m;
  for (char c : model) m += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return "heatmap_" + std::string(to_string(mode)) + "_" + m + "_k" + std::to_string(distractor_count) + "_g" +
         std::to_string(generation_length);
}

std::optional<double> Heatmap::cell(std::size_t row, std::size_t col) const {
  if (row >= rows() || col >= cols() || counts[row][col] == 0) return std::nullopt;
  return sums[row][col] / static_cast<double>(counts[row][col]);
}

double Heatmap::grand_mean() const {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) {
      s += sums[i][j];
      n += counts[i][j];
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

Heatmap render_heatmap(const std::vector<RunRecord>& records, const HeatmapGroup& group) {
  int max_depth = -1, max_interval = -1;
  for (const auto& r : records) {
    if (!in_group(r, group) || !r.ok()) continue;
    if (r.depth_index < 0 || r.interval < 0) throw InvalidArgument("negative depth or interval index");
    max_depth = std::max(max_depth, r.depth_index);
    max_interval = std::max(max_interval, r.interval);
  }
  if (max_depth < 0) throw InvalidArgument("no records for heatmap group " + group.slug());
  Heatmap h;
  h.group = group;
  h.depth_fractions.assign(static_cast<std::size_t>(max_depth) + 1, 0.0);
  h.context_lengths.assign(static_cast<std::size_t>(max_interval) + 1, 0);
  h.sums.assign(h.rows(), std::vector<double>(h.cols(), 0.0));
  h.counts.assign(h.rows(), std::vector<std::size_t>(h.cols(), 0));
  for (const auto& r : records) {
    if (!in_group(r, group) || !r.ok()) continue;
    auto i = static_cast<std::size_t>(r.depth_index), j = static_cast<std::size_t>(r.interval);
    h.depth_fractions[i] = r.depth_fraction;
    h.context_lengths[j] = r.context_length;
    h.sums[i][j] += r.score;
    ++h.counts[i][j];
  }
  return h;
}

std::string heatmap_csv(const Heatmap& h) {
  std::ostringstream os;
  os << "depth";
  for (auto c : h.context_lengths) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < h.rows(); ++i) {
    os << fmt("%.4f", h.depth_fractions[i]);
    for (std::size_t j = 0; j < h.cols(); ++j) {
      auto v = h.cell(i, j);
      os << ',' << (v ? fmt("%.4f", *v) : std::string());
    }
    os << '\n';
  }
  return os.str();
}

std::string heatmap_svg(const Heatmap& h) {
  constexpr int cw = 28, ch = 18, left = 70, top = 40, bottom = 60;
  const int width = left + cw * static_cast<int>(h.cols()) + 20;
  const int height = top + ch * static_cast<int>(h.rows()) + bottom;
  const double span = h.scale_max > h.scale_min ? h.scale_max - h.scale_min : 1.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"9\">\n";
  os << "<text x=\"" << left << "\" y=\"16\" font-size=\"12\">" << xml_escape(h.group.slug()) << " (mean "
     << fmt("%.3f", h.grand_mean()) << ")</text>\n";
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const int y = top + ch * static_cast<int>(i);
    os << "<text x=\"" << left - 4 << "\" y=\"" << y + ch - 5 << "\" text-anchor=\"end\">"
       << fmt("%.0f%%", 100.0 * h.depth_fractions[i]) << "</text>\n";
    for (std::size_t j = 0; j < h.cols(); ++j) {
      const int x = left + cw * static_cast<int>(j);
      std::string fill = "#dddddd";
      if (auto v = h.cell(i, j)) {
        double t = std::clamp((*v - h.scale_min) / span, 0.0, 1.0);
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(215 * (1 - t) + 26 * t)),
                      static_cast<int>(std::lround(48 * (1 - t) + 152 * t)),
                      static_cast<int>(std::lround(39 * (1 - t) + 80 * t)));
        fill = buf;
      }
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
         << fill << "\"/>\n";
    }
  }
  const int yb = top + ch * static_cast<int>(h.rows());
  for (std::size_t j = 0; j < h.cols(); ++j) {
    const int x = left + cw * static_cast<int>(j) + cw / 2;
    os << "<text x=\"" << x << "\" y=\"" << yb + 12 << "\" transform=\"rotate(45 " << x << ' ' << yb + 12 << ")\">"
       << h.context_lengths[j] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::optional<double> ResultTable::cell(const std::string& row, int gen, int k) const {
  auto it = cells.find({row, gen, k});
  if (it == cells.end()) return std::nullopt;
  return it->second;
}

ResultTable emit_table(const std::vector<RunRecord>& records) {
  ResultTable t;
  std::set<int> gens;
  std::set<std::pair<Mode, std::string>> rows;
  std::map<std::tuple<std::string, int, int>, std::pair<double, std::size_t>> acc;
  std::set<int> ks(t.distractor_counts.begin(), t.distractor_counts.end());
  for (const auto& r : records) {
    if (!r.ok()) continue;
    gens.insert(r.generation_length);
    rows.emplace(r.mode, r.model_id);
    ks.insert(r.distractor_count);
    auto& a = acc[{row_label(r), r.generation_length, r.distractor_count}];
    a.first += r.score;
    ++a.second;
  }
  t.generation_lengths.assign(gens.begin(), gens.end());
  t.distractor_counts.assign(ks.begin(), ks.end());
  for (const auto& [mode, model] : rows) t.rows.push_back(std::string(to_string(mode)) + "/" + model);
  for (const auto& [key, a] : acc) t.cells[key] = a.first / static_cast<double>(a.second);
  return t;
}

std::string table_text(const ResultTable& t) {
  std::size_t w = 5;
  for (const auto& r : t.rows) w = std::max(w, r.size());
  auto pad = [](std::string s, std::size_t n) {
    if (s.size() < n) s.insert(0, n - s.size(), ' ');
    return s;
  };
  std::ostringstream os;
  os << std::string(w, ' ');
  for (int g : t.generation_lengths)
    for (int k : t.distractor_counts) os << ' ' << pad("g" + std::to_string(g) + "/k" + std::to_string(k), 8);
  os << '\n';
  for (const auto& row : t.rows) {
    os << row << std::string(w - row.size(), ' ');
    for (int g : t.generation_lengths)
      for (int k : t.distractor_counts) {
        auto v = t.cell(row, g, k);
        os << ' ' << pad(v ? fmt("%.2f", 100.0 * *v) : "-", 8);
      }
    os << '\n';
  }
  return os.str();
}

std::string table_csv(const ResultTable& t) {
  std::ostringstream os;
  os << "row,generation_length,distractor_count,mean\n";
  for (const auto& row : t.rows)
    for (int g : t.generation_lengths)
      for (int k : t.distractor_counts)
        if (auto v = t.cell(row, g, k)) os << csv_field(row) << ',' << g << ',' << k << ',' << fmt("%.4f", *v) << '\n';
  return os.str();
}

std::vector<TrendPoint> alignment_trend(const std::vector<RunRecord>& records) {
  struct Acc {
    std::size_t total = 0, discarded = 0, injected = 0, opposing = 0;
  };
  std::map<std::size_t, Acc> by_len;
  for (const auto& r : records) {
    if (!r.ok() || !r.alignment) continue;
    Acc& a = by_len[r.context_length];
    ++a.total;
    switch (*r.alignment) {
      case AlignmentLabel::AlignedInjected: ++a.injected; break;
      case AlignmentLabel::AlignedOpposing: ++a.opposing; break;
      case AlignmentLabel::Neither: ++a.discarded; break;
    }
  }
  std::vector<TrendPoint> out;
  for (const auto& [len, a] : by_len) {
    TrendPoint p;
    p.context_length = len;
    p.total = a.total;
    p.discarded = a.discarded;
    p.considered = a.total - a.discarded;
    if (p.considered) {
      p.injected_fraction = static_cast<double>(a.injected) / static_cast<double>(p.considered);
      p.opposing_fraction = static_cast<double>(a.opposing) / static_cast<double>(p.considered);
    }
    out.push_back(p);
  }
  return out;
}

std::string trend_csv(const std::vector<TrendPoint>& points) {
  std::ostringstream os;
  os << "context_length,total,discarded,considered,injected_fraction,opposing_fraction\n";
  for (const auto& p : points)
    os << p.context_length << ',' << p.total << ',' << p.discarded << ',' << p.considered << ','
       << fmt("%.4f", p.injected_fraction) << ',' << fmt("%.4f", p.opposing_fraction) << '\n';
  return os.str();
}

ReportFiles write_report(const std::vector<RunRecord>& records, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (records.empty()) throw InvalidArgument("no records to report");
  fs::create_directories(out_dir);
  ReportFiles files;
  auto emit = [&](const std::string& name, const std::string& content) {
    std::string p = (fs::path(out_dir) / name).string();
    write_text_file(p, content);
    files.written.push_back(p);
  };

  const std::vector<GroupKey> keys{GroupKey::Model, GroupKey::Mode, GroupKey::DistractorCount,
                                   GroupKey::GenerationLength};
  emit("aggregate.csv", aggregate_csv(aggregate(records, keys), keys));
  ResultTable t = emit_table(records);
  emit("table.csv", table_csv(t));
  emit("table.txt", table_text(t));

  std::set<std::tuple<std::string, Mode, int, int>> groups;
  for (const auto& r : records)
    if (r.ok()) groups.emplace(r.model_id, r.mode, r.distractor_count, r.generation_length);
  for (const auto& [model, mode, k, g] : groups) {
    Heatmap h = render_heatmap(records, HeatmapGroup{model, mode, k, g});
    emit(h.group.slug() + ".csv", heatmap_csv(h));
    emit(h.group.slug() + ".svg", heatmap_svg(h));
  }

  auto trend = alignment_trend(records);
  if (!trend.empty()) emit("alignment_trend.csv", trend_csv(trend));
  return files;
}

}  // namespace hniah
