// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hniah/backend.hpp"
#include "hniah/digest.hpp"
#include "hniah/haystack.hpp"
#include "hniah/knowledge.hpp"
#include "hniah/probe.hpp"
#include "hniah/report.hpp"
#include "hniah/runner.hpp"
#include "hniah/scoring.hpp"
#include "hniah/text.hpp"

using namespace hniah;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string asset(const std::string& rel) { return std::string(HNIAH_TEST_ASSETS_DIR) + "/" + rel; }

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  const auto start = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s (%s; %.1fs)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(),
              o.detail.c_str(), seconds_since(start));
  std::fflush(stdout);
}

void info(const std::string& s) {
  std::printf("              info: %s\n", s.c_str());
  std::fflush(stdout);
}

struct Assets {
  std::shared_ptr<const Tokenizer> tok = make_tokenizer("whitespace");
  std::vector<KnowledgePair> pairs = load_knowledge(asset("pairs.jsonl"), KnowledgeFormat::Pairs).pairs;
  std::vector<std::string> facts = load_knowledge(asset("facts.jsonl"), KnowledgeFormat::Facts).facts;
  Corpus corpus = ingest_corpus_dir(asset("corpus"), *tok);

  SynthAssets synth() const { return SynthAssets{&pairs, &facts, &corpus, tok.get(), PromptTemplate{}}; }
  std::map<std::string, std::string> books() const {
    std::map<std::string, std::string> m;
    for (const auto& p : pairs) m.emplace(p.work_title, p.author);
    return m;
  }
};

const Assets& assets() {
  static const Assets a;
  return a;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

GridSpec full_grid() {
  GridSpec g;
  g.max_context_tokens = 32768;
  g.n_intervals = 40;
  g.n_depths = 10;
  g.n_examples = 2;
  g.distractor_counts = {0, 1, 2, 3};
  g.generation_lengths = {32, 64};
  g.modes = {Mode::Hybrid};
  g.seed = 20260101;
  return g;
}

InstanceManifest manifest_for(const GridSpec& g) {
  InstanceManifest m;
  m.source = "grid";
  m.spec = g;
  m.tokenizer = assets().tok->name();
  m.tokenizer_digest = assets().tok->digest();
  m.prompt_version = PromptTemplate{}.version;
  return m;
}

std::multiset<std::string> canonical(const std::vector<RunRecord>& rs) {
  std::multiset<std::string> out;
  for (auto r : rs) {
    r.wall_time_seconds = 0;
    out.insert(record_to_json(r).dump());
  }
  return out;
}

// Brute-force token membership oracle: unique reference tokens found in the
// prediction, over unique reference tokens.
double membership_oracle(const std::vector<std::string>& pred, const std::vector<std::string>& ref) {
  std::vector<std::string> uniq;
  for (const auto& r : ref) {
    bool seen = false;
    for (const auto& u : uniq) seen = seen || u == r;
    if (!seen) uniq.push_back(r);
  }
  int hits = 0;
  for (const auto& u : uniq) {
    bool found = false;
    for (const auto& p : pred) found = found || p == u;
    hits += found;
  }
  return static_cast<double>(hits) / static_cast<double>(uniq.size());
}

Outcome scoring_oracle() {
  Outcome o;
  const std::vector<std::string> alphabet{"amber", "birch", "cedar", "delta", "ember"};
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> letter(0, 4), plen(0, 10), rlen(1, 10), style(0, 3);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::string> pred, ref;
    auto render = [&](const std::vector<std::string>& toks) {
      std::string s;
      for (const auto& t : toks) {
        std::string w = t;
        if (style(gen) == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!s.empty()) s += style(gen) == 1 ? ", " : " ";
        s += w;
      }
      if (style(gen) == 2) s += ".";
      return s;
    };
    for (int i = plen(gen); i > 0; --i) pred.push_back(alphabet[letter(gen)]);
    for (int i = rlen(gen); i > 0; --i) ref.push_back(alphabet[letter(gen)]);
    if (score(render(pred), render(ref)) != membership_oracle(pred, ref)) ++mismatches;
  }
  const double t = seconds_since(start);
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.require(t < 5.0, "took " + fmt("%.2f", t) + "s");
  if (o.pass) o.detail = "10000 cases exact, " + fmt("%.3f", t) + "s";
  return o;
}

// Context of an assembled prompt.
std::string_view context_of(std::string_view prompt) {
  const std::string head = PromptTemplate{}.instruction + "\n\n";
  const std::size_t b = prompt.rfind(head, 0) == 0 ? head.size() : 0;
  const std::size_t e = prompt.rfind("\n\nQuestion: ");
  return prompt.substr(b, e - b);
}

Outcome haystack_geometry() {
  Outcome o;
  const auto start = Clock::now();
  const Assets& a = assets();
  const std::size_t l_max = a.corpus.max_sentence_tokens;
  GridSpec g = full_grid();
  g.n_examples = 1;
  g.modes = {Mode::Niah, Mode::Hybrid};

  std::mt19937_64 gen(11);
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < g.n_intervals; ++i)
    for (int d = 0; d < g.n_depths; ++d) cells.emplace_back(i, d);
  std::shuffle(cells.begin(), cells.end(), gen);
  cells.resize(100);
  const std::set<std::pair<int, int>> sample(cells.begin(), cells.end());

  const fs::path dir = fs::temp_directory_path() / ("hniah-accept-geom-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string path = (dir / "grid.jsonl").string();
  write_grid(g, a.synth(), path, manifest_for(g), threads());

  std::size_t checked = 0, depth_checked = 0;
  double worst = 0;
  for_each_instance(path, [&](Instance&& inst) {
    if (!sample.count({inst.interval, inst.depth_index})) return;
    ++checked;
    const std::size_t n = a.tok->count(inst.prompt);
    const std::size_t target = inst.target_tokens;
    o.require(n <= target && n + l_max > target, inst.id + ": " + std::to_string(n) + " tokens for target " +
                                                      std::to_string(target));
    const std::string_view ctx = context_of(inst.prompt);
    const std::string& needle = inst.needle->rendered;
    std::size_t occurrences = 0;
    for (std::size_t p = inst.prompt.find(needle); p != std::string::npos; p = inst.prompt.find(needle, p + 1))
      ++occurrences;
    o.require(occurrences == 1, inst.id + ": needle occurs " + std::to_string(occurrences) + " times");
    std::size_t matched = 0;
    for (const auto& f : find_needles(ctx)) matched += f.author == inst.needle->author;
    o.require(matched == 1, inst.id + ": " + std::to_string(matched) + " needles for the target author");

    const std::size_t pos = ctx.find(needle);
    const std::size_t total = a.tok->count(ctx);
    if (pos == std::string::npos || total < 1000) return;
    const double start_tok = static_cast<double>(a.tok->count(ctx.substr(0, pos)));
    const double depth = start_tok / static_cast<double>(total - a.tok->count(needle));
    const double dev = std::fabs(depth - inst.depth_fraction);
    worst = std::max(worst, dev);
    ++depth_checked;
    o.require(dev <= 0.03, inst.id + ": depth " + fmt("%.4f", depth) + " vs " + fmt("%.2f", inst.depth_fraction));
  });
  fs::remove_all(dir);
  const double t = seconds_since(start);
  o.require(checked == 100 * 2 * 4, "checked " + std::to_string(checked) + " instances");
  o.require(t < 60.0, "took " + fmt("%.1f", t) + "s");
  if (o.pass)
    o.detail = std::to_string(checked) + " instances in 100 cells, L_max " + std::to_string(l_max) +
               ", worst depth error " + fmt("%.4f", worst) + " over " + std::to_string(depth_checked);
  return o;
}

// Full-grid run shared by criteria 3, 9 and 10.
struct FullRun {
  bool done = false;
  std::string error;
  double seconds = 0;
  std::size_t instances = 0;
  std::vector<RunRecord> records;
  fs::path dir;
  std::string instances_sha;
};

FullRun& full_run() {
  static FullRun r;
  return r;
}

void do_full_run() {
  FullRun& r = full_run();
  const auto start = Clock::now();
  try {
    r.dir = fs::temp_directory_path() / ("hniah-accept-full-" + std::to_string(::getpid()));
    fs::remove_all(r.dir);
    fs::create_directories(r.dir);
    const GridSpec g = full_grid();
    const std::string inst = (r.dir / "instances.jsonl").string();
    r.instances = write_grid(g, assets().synth(), inst, manifest_for(g), threads());
    r.instances_sha = sha256_file(inst);

    MockParams p;
    p.book_to_author = assets().books();
    auto oracle = mock_backend(MockKind::HybridOracle, p);
    auto pattern = mock_backend(MockKind::PatternRetriever, MockParams{});
    for (Backend* b : {oracle.get(), pattern.get()}) {
      RunConfig c;
      c.results_path = (r.dir / "results.jsonl").string();
      c.generation_lengths = g.generation_lengths;
      c.concurrency = threads();
      c.resume = true;
      run_grid(*b, inst, c);
    }
    r.records = read_results((r.dir / "results.jsonl").string());
    write_report(r.records, (r.dir / "report").string());
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(start);
  r.done = true;
}

Outcome oracle_ceiling() {
  Outcome o;
  const FullRun& r = full_run();
  o.require(r.error.empty(), r.error);
  if (!o.pass) return o;
  std::vector<RunRecord> mine;
  for (const auto& rec : r.records)
    if (rec.model_id == "mock:hybrid_oracle") mine.push_back(rec);
  o.require(mine.size() == r.instances * 2, std::to_string(mine.size()) + " oracle records");
  ResultTable t = emit_table(mine);
  std::string worst;
  double lo = 1.0;
  for (int g : {32, 64})
    for (int k = 0; k <= 3; ++k) {
      auto v = t.cell("hybrid/mock:hybrid_oracle", g, k);
      o.require(v.has_value(), "missing cell g" + std::to_string(g) + " k" + std::to_string(k));
      if (!v) continue;
      o.require(*v >= 0.99, "g" + std::to_string(g) + " k" + std::to_string(k) + " mean " + fmt("%.4f", *v));
      lo = std::min(lo, *v);
    }
  if (o.pass) o.detail = "minimum cell mean " + fmt("%.4f", lo) + " over 8 (k, g) cells";
  return o;
}

Outcome pattern_collapse() {
  Outcome o;
  GridSpec g;
  g.max_context_tokens = 4096;
  g.n_intervals = 4;
  g.n_depths = 51;
  g.n_examples = 5;
  g.distractor_counts = {0, 1, 2, 3};
  g.generation_lengths = {32};
  g.seed = 424242;
  auto instances = expand_grid(g, assets().synth(), threads());
  auto b = mock_backend(MockKind::PatternRetriever, MockParams{});
  std::map<int, std::pair<double, std::size_t>> by_k;
  for (const auto& inst : instances) {
    Completion c = b->generate(inst.prompt, GenerationConfig{});
    auto& acc = by_k[inst.distractor_count];
    acc.first += score(c.text, inst.gold_answer);
    ++acc.second;
  }
  std::ostringstream d;
  for (int k = 0; k <= 3; ++k) {
    const auto [sum, n] = by_k[k];
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    o.require(n >= 200, "only " + std::to_string(n) + " instances at k=" + std::to_string(k));
    if (k == 0)
      o.require(mean >= 0.99, "k=0 mean " + fmt("%.4f", mean));
    else
      o.require(std::fabs(mean - 1.0 / (k + 1)) <= 0.05,
                "k=" + std::to_string(k) + " mean " + fmt("%.4f", mean) + " vs " + fmt("%.4f", 1.0 / (k + 1)));
    d << (k ? ", " : "") << "k" << k << "=" << fmt("%.4f", mean);
  }
  if (o.pass) o.detail = d.str() + " over " + std::to_string(instances.size() / 4) + " instances per k";
  return o;
}

// Parametric-only backend answering from a profile keyed by entity.
std::unique_ptr<Backend> parametric_mock(const std::map<std::string, std::string>& answers) {
  MockParams p;
  p.answers = answers;
  return mock_backend(MockKind::ParametricOnly, p);
}

Outcome alignment_pipeline() {
  Outcome o;
  const KnowledgeSet whoqa = load_knowledge(asset("whoqa_sample.jsonl"), KnowledgeFormat::WhoQA);
  std::map<std::string, std::string> believed;
  for (const auto& item : whoqa.items) believed.emplace(item.entity, item.candidates.front().answer);
  auto model = parametric_mock(believed);
  ProbeOptions po;
  po.concurrency = 4;
  ParametricProfile profile = consistency_filter(probe_all(*model, whoqa.items, po), model->id());
  IWhoQASubsets subsets = build_iwhoqa_subsets(profile, whoqa, 99);
  o.require(!subsets.conflict.empty() && !subsets.parametric.empty(), "empty subsets");
  if (!o.pass) return o;

  GridSpec g;
  g.max_context_tokens = 16384;
  g.n_intervals = 4;
  g.n_depths = 3;
  g.generation_lengths = {32};
  g.seed = 5;
  auto runner = parametric_mock(profile.entries);
  std::ostringstream d;
  for (const auto& [name, subset, expect] :
       {std::tuple{"conflict", &subsets.conflict, AlignmentLabel::AlignedOpposing},
        std::tuple{"parametric", &subsets.parametric, AlignmentLabel::AlignedInjected}}) {
    auto instances = expand_subset_grid(g, *subset, assets().synth(), threads());
    std::vector<RunRecord> records;
    for (const auto& inst : instances) {
      Completion c = runner->generate(inst.prompt, GenerationConfig{});
      records.push_back(make_record(inst, runner->id(), 32, c.text, ScoreMode::Set));
    }
    auto trend = alignment_trend(records);
    o.require(trend.size() == static_cast<std::size_t>(g.n_intervals),
              std::string(name) + ": " + std::to_string(trend.size()) + " padded lengths");
    for (const auto& p : trend) {
      const double frac = expect == AlignmentLabel::AlignedOpposing ? p.opposing_fraction : p.injected_fraction;
      o.require(p.considered == p.total && p.total > 0,
                std::string(name) + " at " + std::to_string(p.context_length) + ": " +
                    std::to_string(p.discarded) + " of " + std::to_string(p.total) + " discarded");
      o.require(frac == 1.0, std::string(name) + " at " + std::to_string(p.context_length) + ": fraction " +
                                 fmt("%.4f", frac));
    }
    d << name << " " << subset->size() << " items x " << instances.size() / subset->size() << " cells; ";
  }
  if (o.pass) d << "fraction 1.0 at every length";
  o.detail = o.pass ? d.str() : o.detail;
  return o;
}

// Answers entity A the same way every time and alternates for entity B.
class ScriptedProbe final : public Backend {
 public:
  Completion generate(const std::string& prompt, const GenerationConfig&) override {
    Completion c;
    c.backend_id = id();
    if (prompt.find("Azimuth") != std::string::npos) {
      c.text = "Marble Arch";
    } else {
      c.text = (prompt.find("penned") != std::string::npos) ? "Tower Bridge" : "Hyde Park";
    }
    c.token_count = static_cast<int>(tok_->count(c.text));
    return c;
  }
  std::string id() const override { return "scripted"; }
  std::size_t max_context() const override { return 1u << 20; }
  const Tokenizer& tokenizer() const override { return *tok_; }

 private:
  std::shared_ptr<const Tokenizer> tok_ = make_tokenizer("whitespace");
};

Outcome consistency() {
  Outcome o;
  KnowledgeItem a, b;
  a.id = "a";
  a.entity = "Azimuth";
  a.questions = {"Who wrote Azimuth?", "Azimuth was penned by whom?", "Who is the author of Azimuth?"};
  b.id = "b";
  b.entity = "Bellwether";
  b.questions = {"Who wrote Bellwether?", "Bellwether was penned by whom?", "Who is the author of Bellwether?"};
  ScriptedProbe backend;
  ProbeOptions po;
  auto results = probe_all(backend, {a, b}, po);
  ParametricProfile p = consistency_filter(results, backend.id());
  std::set<std::string> keys;
  for (const auto& [k, v] : p.entries) keys.insert(k);
  o.require(keys == std::set<std::string>{"Azimuth"}, "profile has " + std::to_string(keys.size()) + " entries");
  o.require(results.size() == 2 && results[1].answers.size() == 3, "unexpected probe shape");
  if (o.pass) o.detail = "profile {Azimuth -> " + p.entries.at("Azimuth") + "}";
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("hniah-accept-det-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const GridSpec g = full_grid();
  const std::string a = (dir / "a.jsonl").string(), b = (dir / "b.jsonl").string();
  write_grid(g, assets().synth(), a, manifest_for(g), 1);
  write_grid(g, assets().synth(), b, manifest_for(g), threads());
  const std::string ha = sha256_file(a), hb = sha256_file(b);
  o.require(ha == hb, "instance files differ");
  o.require(read_file(manifest_path_for(a)) == read_file(manifest_path_for(b)), "manifests differ");
  const FullRun& full = full_run();
  if (!full.instances_sha.empty()) o.require(full.instances_sha == ha, "full-run instance file differs");
  fs::remove_all(dir);

  const auto& pairs = assets().pairs;
  const auto& facts = assets().facts;
  for (std::uint64_t seed = 0; seed < 500; ++seed)
    for (int k = 0; k <= 3; ++k) {
      const std::string& target = pairs[seed % pairs.size()].author;
      o.require(sample_distractors(pairs, facts, target, k, seed) == sample_distractors(pairs, facts, target, k, seed),
                "distractor sampling unstable at seed " + std::to_string(seed));
    }

  std::mt19937_64 gen(3);
  std::vector<ParametricProfile> profiles(3);
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    profiles[m].model_id = "m" + std::to_string(m);
    for (int e = 0; e < 40; ++e)
      if (gen() % 4) profiles[m].entries["entity" + std::to_string(e)] = (gen() % 5 ? "same" : "other") + std::to_string(e);
  }
  const auto first = intersect_profiles(profiles);
  std::vector<std::size_t> order{0, 1, 2};
  do {
    std::vector<ParametricProfile> perm;
    for (auto i : order) perm.push_back(profiles[i]);
    o.require(intersect_profiles(perm) == first, "intersection depends on profile order");
  } while (std::next_permutation(order.begin(), order.end()));
  if (o.pass)
    o.detail = "grid sha256 " + ha.substr(0, 16) + " (serial == parallel), 2000 distractor draws, " +
               std::to_string(first.size()) + "-entity intersection stable";
  return o;
}

Outcome resume_correctness() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("hniah-accept-resume-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  GridSpec g;
  g.max_context_tokens = 8192;
  g.n_intervals = 10;
  g.n_depths = 10;
  g.n_examples = 2;
  g.seed = 8;
  const std::string inst = (dir / "instances.jsonl").string();
  const std::size_t n = write_grid(g, assets().synth(), inst, manifest_for(g), threads());
  auto backend = mock_backend(MockKind::PatternRetriever, MockParams{});

  RunConfig full;
  full.results_path = (dir / "full.jsonl").string();
  full.concurrency = 4;
  run_grid(*backend, inst, full);

  RunConfig part = full;
  part.results_path = (dir / "part.jsonl").string();
  const std::size_t total = n * full.generation_lengths.size();
  part.stop_after = total * 6 / 10;
  RunSummary first = run_grid(*backend, inst, part);
  o.require(first.written * 2 >= total, "interrupted at " + std::to_string(first.written));
  // Simulate a crash mid-append.
  {
    std::string body = read_file(part.results_path);
    std::FILE* f = std::fopen(part.results_path.c_str(), "ab");
    std::fwrite(body.data(), 1, 40, f);
    std::fclose(f);
  }
  part.stop_after.reset();
  part.resume = true;
  RunSummary second = run_grid(*backend, inst, part);
  o.require(second.skipped == first.written, "resume skipped " + std::to_string(second.skipped));
  const auto a = canonical(read_results(full.results_path));
  const auto b = canonical(read_results(part.results_path));
  o.require(a.size() == total, "uninterrupted run wrote " + std::to_string(a.size()));
  o.require(a == b, "record sets differ");
  fs::remove_all(dir);
  if (o.pass)
    o.detail = "interrupted at " + std::to_string(first.written) + "/" + std::to_string(total) +
               " with a torn line, resumed record set equal";
  return o;
}

Outcome reporting_consistency() {
  Outcome o;
  const FullRun& r = full_run();
  o.require(r.error.empty(), r.error);
  if (!o.pass) return o;
  ResultTable t = emit_table(r.records);
  std::size_t compared = 0;
  double worst = 0;
  for (const auto& [key, value] : t.cells) {
    const auto& [row, g, k] = key;
    const std::string model = row.substr(row.find('/') + 1);
    Heatmap h = render_heatmap(r.records, HeatmapGroup{model, Mode::Hybrid, k, g});
    worst = std::max(worst, std::fabs(h.grand_mean() - value));
    ++compared;
  }
  o.require(compared == 2 * 2 * 4, std::to_string(compared) + " cells");
  o.require(worst <= 1e-9, "max deviation " + fmt("%.3g", worst));
  const std::vector<std::string> rows{"hybrid/mock:hybrid_oracle", "hybrid/mock:pattern_retriever"};
  o.require(t.rows == rows, "row order");
  o.require(t.generation_lengths == std::vector<int>{32, 64}, "generation-length blocks");
  o.require(t.distractor_counts == std::vector<int>{0, 1, 2, 3}, "random-fact columns");
  const std::string text = table_text(t);
  std::vector<std::string> header;
  {
    std::istringstream first(text.substr(0, text.find('\n')));
    for (std::string w; first >> w;) header.push_back(w);
  }
  const std::vector<std::string> expect{"g32/k0", "g32/k1", "g32/k2", "g32/k3",
                                        "g64/k0", "g64/k1", "g64/k2", "g64/k3"};
  o.require(header == expect, "table header layout");
  o.require(text.find("\nhybrid/mock:hybrid_oracle") != std::string::npos, "table row label");
  o.require(fs::exists(r.dir / "report" / "table.txt"), "report files");
  if (o.pass) {
    o.detail = std::to_string(compared) + " cells, max deviation " + fmt("%.3g", worst);
    std::istringstream lines(text);
    for (std::string l; std::getline(lines, l);) info(l);
  }
  return o;
}

Outcome desk_run() {
  Outcome o;
  const FullRun& r = full_run();
  o.require(r.error.empty(), r.error);
  o.require(r.instances == 40 * 10 * 2 * 4, std::to_string(r.instances) + " instances");
  std::size_t oracle = 0;
  for (const auto& rec : r.records) oracle += rec.model_id == "mock:hybrid_oracle" && rec.ok();
  o.require(oracle == r.instances * 2, std::to_string(oracle) + " oracle records");
  o.require(r.seconds < 600.0, "took " + fmt("%.1f", r.seconds) + "s");
  if (o.pass)
    o.detail = std::to_string(r.instances) + " instances, " + std::to_string(r.records.size()) +
               " records (two mock models, synth + run + report) in " + fmt("%.1f", r.seconds) + "s";
  return o;
}

}  // namespace

int main() {
  std::printf("hniah acceptance (%d threads)\n", threads());
  report(1, "scoring oracle equivalence", scoring_oracle);
  report(2, "haystack geometry", haystack_geometry);
  do_full_run();
  report(3, "hybrid oracle ceiling", oracle_ceiling);
  {
    // Standard ten-depth grid, for comparison with the dense grid below.
    std::map<int, std::pair<double, int>> acc;
    for (const auto& rec : full_run().records)
      if (rec.model_id == "mock:pattern_retriever") {
        acc[rec.distractor_count].first += rec.score;
        ++acc[rec.distractor_count].second;
      }
    std::ostringstream s;
    for (const auto& [k, v] : acc) s << "k" << k << "=" << fmt("%.4f", v.first / std::max(1, v.second)) << " ";
    if (!acc.empty()) info("pattern_retriever on the 40x10 grid: " + s.str());
  }
  report(4, "pattern collapse under distractors", pattern_collapse);
  report(5, "alignment pipeline", alignment_pipeline);
  report(6, "consistency filter", consistency);
  report(7, "determinism", determinism);
  report(8, "resume correctness", resume_correctness);
  report(9, "reporting consistency", reporting_consistency);
  report(10, "end-to-end desk run", desk_run);
  std::error_code ec;
  fs::remove_all(full_run().dir, ec);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
