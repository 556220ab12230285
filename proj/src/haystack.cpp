// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/haystack.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "hniah/digest.hpp"
#include "hniah/errors.hpp"
#include "hniah/rng.hpp"
#include "hniah/text.hpp"

namespace hniah {

namespace {

// Stream tags keep the per-purpose seeds independent.
enum SeedTag : std::uint64_t { kNeedleTag = 1, kDistractorTag, kHaystackTag, kPlacementTag, kPadHaystackTag, kPadPlacementTag };

std::vector<Sentence> to_sentences(std::string_view text, const Tokenizer& tok) {
  std::vector<Sentence> out;
  for (auto& s : split_sentences(text)) {
    std::size_t n = tok.count(s);
    if (n) out.push_back({std::move(s), n});
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string cell_id(std::string_view prefix, int interval, int depth, int example, int k) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "-i%02d-d%02d-e%d-k%d", interval, depth, example, k);
  return std::string(prefix) + buf;
}

struct Cell {
  Mode mode;
  int interval, depth, example, k;
};

std::vector<Cell> grid_cells(const GridSpec& spec) {
  std::vector<Cell> cells;
  cells.reserve(spec.cells_per_mode() * spec.modes.size());
  for (Mode m : spec.modes)
    for (int i = 0; i < spec.n_intervals; ++i)
      for (int d = 0; d < spec.n_depths; ++d)
        for (int e = 0; e < spec.n_examples; ++e)
          for (int k : spec.distractor_counts) cells.push_back({m, i, d, e, k});
  return cells;
}

void check_assets(const SynthAssets& a) {
  if (!a.pairs || !a.facts || !a.corpus || !a.tokenizer) throw InvalidArgument("synthesis assets incomplete");
}

// Fills the instance's prompt from a haystack budget, dropping trailing
// haystack sentences if a non-additive tokenizer overshoots the target.
void assemble_prompt(Instance& inst, std::vector<Sentence> hay, const Insertion& primary,
                     const std::vector<Insertion>& extras, std::uint64_t placement_seed, const SynthAssets& a) {
  for (;;) {
    PlacedContext placed = place_insertions(hay, primary, extras, inst.depth_fraction, placement_seed);
    inst.prompt = a.prompt.assemble(placed.text, inst.query);
    inst.prompt_tokens = a.tokenizer->count(inst.prompt);
    inst.measured_depth = placed.measured_depth;
    if (inst.prompt_tokens <= inst.target_tokens || hay.empty()) return;
    hay.pop_back();
  }
}

Instance synthesize_cell(const GridSpec& spec, const SynthAssets& a, const std::vector<KnowledgePair>& targets,
                         const Cell& c) {
  const auto& facts = *a.facts;
  const Tokenizer& tok = *a.tokenizer;
  Instance inst;
  inst.mode = c.mode;
  inst.interval = c.interval;
  inst.depth_index = c.depth;
  inst.example_index = c.example;
  inst.distractor_count = c.k;
  inst.context_length = spec.interval_length(c.interval);
  inst.target_tokens = spec.interval_target(c.interval);
  inst.depth_fraction = spec.depth_fraction(c.depth);
  inst.id = cell_id(to_string(c.mode), c.interval, c.depth, c.example, c.k);

  const KnowledgePair& pair = targets[static_cast<std::size_t>(c.example)];
  inst.pair = pair;
  Rng fact_rng(mix_seed(spec.seed, {kNeedleTag, static_cast<std::uint64_t>(c.example)}));
  const std::string& fact = facts[static_cast<std::size_t>(fact_rng.below(facts.size()))];
  inst.needle = make_needle(pair.author, fact);
  inst.distractors = sample_distractors(
      *a.pairs, facts, pair.author, c.k,
      mix_seed(spec.seed, {kDistractorTag, static_cast<std::uint64_t>(c.interval), static_cast<std::uint64_t>(c.depth),
                           static_cast<std::uint64_t>(c.example), static_cast<std::uint64_t>(c.k)}),
      {fact});
  inst.query = make_query(pair, c.mode);
  inst.gold_answer = fact;

  const Insertion primary{inst.needle->rendered, tok.count(inst.needle->rendered)};
  std::vector<Insertion> extras;
  std::size_t overhead = tok.count(a.prompt.assemble("", inst.query)) + primary.tokens;
  for (const auto& d : inst.distractors) {
    extras.push_back({d.rendered, tok.count(d.rendered)});
    overhead += extras.back().tokens;
  }
  if (overhead > inst.target_tokens)
    throw InvalidArgument("interval target of " + std::to_string(inst.target_tokens) +
                          " tokens is smaller than the prompt overhead of " + std::to_string(overhead));
  auto hay = build_haystack_sentences(
      *a.corpus, inst.target_tokens - overhead,
      mix_seed(spec.seed, {kHaystackTag, static_cast<std::uint64_t>(c.interval), static_cast<std::uint64_t>(c.example)}));
  assemble_prompt(inst, std::move(hay), primary, extras,
                  mix_seed(spec.seed, {kPlacementTag, static_cast<std::uint64_t>(c.interval),
                                       static_cast<std::uint64_t>(c.depth), static_cast<std::uint64_t>(c.example),
                                       static_cast<std::uint64_t>(c.k)}),
                  a);
  return inst;
}

std::vector<KnowledgePair> grid_targets(const GridSpec& spec, const SynthAssets& a) {
  spec.validate();
  check_assets(a);
  std::vector<KnowledgePair> targets;
  for (const auto& p : *a.pairs)
    if (p.is_target) targets.push_back(p);
  if (static_cast<std::size_t>(spec.n_examples) > targets.size())
    throw InvalidArgument("grid asks for " + std::to_string(spec.n_examples) + " examples but the pair table has " +
                          std::to_string(targets.size()) + " targets");
  int max_k = *std::max_element(spec.distractor_counts.begin(), spec.distractor_counts.end());
  if (static_cast<std::size_t>(max_k) + 1 > a.facts->size())
    throw InvalidArgument("fact vocabulary too small for " + std::to_string(max_k) + " distractors");
  if (a.corpus->sentences.empty()) throw InvalidArgument("corpus is empty");
  return targets;
}

class InstanceWriter {
 public:
  explicit InstanceWriter(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path);
  }
  void add(const Instance& inst) {
    std::string line = instance_to_json(inst).dump();
    line.push_back('\n');
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    sha_.update(line);
    ++count_;
  }
  void finish(InstanceManifest manifest) {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_);
    manifest.instance_count = count_;
    manifest.instances_sha256 = sha_.hex();
    json spec = grid_spec_to_json(manifest.spec);
    json j = {{"format", manifest.format},
              {"source", manifest.source},
              {"spec", spec},
              {"tokenizer", manifest.tokenizer},
              {"tokenizer_digest", manifest.tokenizer_digest},
              {"prompt_version", manifest.prompt_version},
              {"assets", manifest.assets},
              {"instance_count", manifest.instance_count},
              {"instances_sha256", manifest.instances_sha256}};
    write_text_file(manifest_path_for(path_), j.dump(2) + "\n");
  }
  std::size_t count() const { return count_; }

 private:
  std::string path_;
  std::ofstream out_;
  Sha256 sha_;
  std::size_t count_ = 0;
};

}  // namespace

Corpus ingest_corpus(const std::vector<std::string>& paths, const Tokenizer& tokenizer) {
  Corpus c;
  c.tokenizer_digest = tokenizer.digest();
  for (const auto& path : paths) {
    std::string raw = read_file(path);
    if (trim(raw).empty()) throw InvalidArgument("corpus document is empty: " + path);
    auto sents = to_sentences(raw, tokenizer);
    std::string doc;
    std::vector<std::size_t> offsets;
    for (auto& s : sents) {
      if (!doc.empty()) doc.push_back(' ');
      offsets.push_back(doc.size());
      doc += s.text;
      c.total_tokens += s.tokens;
      c.max_sentence_tokens = std::max(c.max_sentence_tokens, s.tokens);
      c.sentences.push_back(std::move(s));
    }
    c.documents.push_back(std::move(doc));
    c.sentence_index.push_back(std::move(offsets));
  }
  if (c.sentences.empty()) throw InvalidArgument("corpus is empty");
  return c;
}

Corpus ingest_corpus_dir(const std::string& dir, const Tokenizer& tokenizer) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw InvalidArgument("corpus is empty: " + dir);
  return ingest_corpus(paths, tokenizer);
}

std::vector<Sentence> build_haystack_sentences(const Corpus& corpus, std::size_t budget, std::uint64_t seed) {
  std::vector<Sentence> out;
  const std::size_t n = corpus.sentences.size();
  if (n == 0 || budget == 0) return out;
  std::size_t i = static_cast<std::size_t>(Rng(seed).below(n));
  std::size_t used = 0;
  for (;;) {
    const Sentence& s = corpus.sentences[i];
    if (used + s.tokens > budget) break;
    used += s.tokens;
    out.push_back(s);
    i = (i + 1) % n;
  }
  return out;
}

std::string build_haystack(const Corpus& corpus, std::size_t budget, std::uint64_t seed) {
  std::string out;
  for (const auto& s : build_haystack_sentences(corpus, budget, seed)) {
    if (!out.empty()) out.push_back(' ');
    out += s.text;
  }
  return out;
}

PlacedContext place_insertions(const std::vector<Sentence>& haystack, const Insertion& primary,
                               const std::vector<Insertion>& extras, double depth_fraction, std::uint64_t seed) {
  if (!(depth_fraction >= 0.0 && depth_fraction <= 1.0)) throw InvalidArgument("depth_fraction must be in [0, 1]");
  const std::size_t n = haystack.size();
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> at(n + 1);
  for (std::size_t e = 0; e < extras.size(); ++e) at[static_cast<std::size_t>(rng.below(n + 1))].push_back(e);
  for (auto& v : at) rng.shuffle(v);

  std::size_t total = primary.tokens;
  for (const auto& s : haystack) total += s.tokens;
  for (const auto& e : extras) total += e.tokens;
  const double target = depth_fraction * static_cast<double>(total - primary.tokens);

  // Walk every slot in order; slot (b, s) puts the primary after the first
  // s extras at boundary b.
  std::size_t best_b = 0, best_s = 0, best_start = 0;
  double best_err = INFINITY;
  std::size_t pos = 0;
  for (std::size_t b = 0; b <= n; ++b) {
    for (std::size_t s = 0; s <= at[b].size(); ++s) {
      double err = std::fabs(static_cast<double>(pos) - target);
      if (err < best_err) {
        best_err = err;
        best_b = b;
        best_s = s;
        best_start = pos;
      }
      if (s < at[b].size()) pos += extras[at[b][s]].tokens;
    }
    if (b < n) pos += haystack[b].tokens;
  }

  PlacedContext out;
  std::size_t bytes = primary.text.size() + 1;
  for (const auto& s : haystack) bytes += s.text.size() + 1;
  for (const auto& e : extras) bytes += e.text.size() + 1;
  out.text.reserve(bytes);
  auto emit = [&](const std::string& t) {
    if (!out.text.empty()) out.text.push_back(' ');
    out.text += t;
  };
  for (std::size_t b = 0; b <= n; ++b) {
    for (std::size_t s = 0; s <= at[b].size(); ++s) {
      if (b == best_b && s == best_s) emit(primary.text);
      if (s < at[b].size()) emit(extras[at[b][s]].text);
    }
    if (b < n) emit(haystack[b].text);
  }
  out.total_tokens = total;
  out.target_token_index = best_start;
  const std::size_t span = total - primary.tokens;
  out.measured_depth = span ? static_cast<double>(best_start) / static_cast<double>(span) : 0.0;
  return out;
}

std::string insert_at_depth(std::string_view haystack, const NeedleFact& needle,
                            const std::vector<NeedleFact>& distractors, double depth_fraction, std::uint64_t seed,
                            const Tokenizer& tokenizer) {
  std::vector<Insertion> extras;
  for (const auto& d : distractors) extras.push_back({d.rendered, tokenizer.count(d.rendered)});
  return place_insertions(to_sentences(haystack, tokenizer), {needle.rendered, tokenizer.count(needle.rendered)},
                          extras, depth_fraction, seed)
      .text;
}

std::vector<NeedleFact> find_needles(std::string_view text) {
  std::vector<NeedleFact> out;
  constexpr std::size_t kMaxPart = 256;
  std::size_t pos = 0;
  while ((pos = text.find(kNeedlePrefix, pos)) != std::string_view::npos) {
    const std::size_t start = pos;
    pos += kNeedlePrefix.size();
    if (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) continue;
    std::size_t infix = text.find(kNeedleInfix, pos);
    if (infix == std::string_view::npos || infix - pos > kMaxPart) continue;
    // A later prefix before the infix starts the real candidate.
    if (text.find(kNeedlePrefix, pos) < infix) continue;
    std::size_t dot = text.find('.', infix + kNeedleInfix.size());
    if (dot == std::string_view::npos || dot - infix > kMaxPart) continue;
    std::string_view author = text.substr(pos, infix - pos);
    std::string_view fact = text.substr(infix + kNeedleInfix.size(), dot - infix - kNeedleInfix.size());
    if (author.empty() || fact.empty() || author.find('\n') != std::string_view::npos ||
        fact.find('\n') != std::string_view::npos)
      continue;
    out.push_back({std::string(author), std::string(fact), std::string(text.substr(start, dot + 1 - start))});
    pos = dot + 1;
  }
  return out;
}

std::optional<NeedleFact> parse_needle(std::string_view sentence) {
  std::string s = trim(sentence);
  auto found = find_needles(s);
  if (found.size() != 1 || found.front().rendered != s) return std::nullopt;
  return found.front();
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Niah: return "niah";
    case Mode::Hybrid: return "hybrid";
    case Mode::Parametric: return "parametric";
    case Mode::Conflict: return "conflict";
    case Mode::Irrelevant: return "irrelevant";
    case Mode::HotpotContext: return "hotpot_context";
    case Mode::HotpotParametric: return "hotpot_parametric";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::Niah, Mode::Hybrid, Mode::Parametric, Mode::Conflict, Mode::Irrelevant, Mode::HotpotContext,
                 Mode::HotpotParametric})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Mode mode_for(SubsetLabel label) {
  switch (label) {
    case SubsetLabel::Parametric: return Mode::Parametric;
    case SubsetLabel::Conflict: return Mode::Conflict;
    case SubsetLabel::Irrelevant: return Mode::Irrelevant;
    case SubsetLabel::HotpotContext: return Mode::HotpotContext;
    case SubsetLabel::HotpotParametric: return Mode::HotpotParametric;
  }
  return Mode::Parametric;
}

std::string make_query(const KnowledgePair& pair, Mode mode) {
  if (mode == Mode::Hybrid) return "What's the favorite thing of the person who wrote " + pair.work_title + "?";
  if (mode == Mode::Niah) return "What's the favorite thing of " + pair.author + "?";
  throw InvalidArgument("make_query supports only niah and hybrid modes");
}

std::string PromptTemplate::assemble(std::string_view context, std::string_view query) const {
  std::string out;
  out.reserve(instruction.size() + context.size() + query.size() + 24);
  out.append(instruction).append("\n\n").append(context).append("\n\nQuestion: ").append(query).append("\nAnswer:");
  return out;
}

void GridSpec::validate() const {
  if (max_context_tokens == 0) throw InvalidArgument("max_context_tokens must be positive");
  if (n_intervals < 1) throw InvalidArgument("n_intervals must be >= 1");
  if (n_depths < 2) throw InvalidArgument("n_depths must be >= 2");
  if (n_examples < 1) throw InvalidArgument("n_examples must be >= 1");
  if (distractor_counts.empty()) throw InvalidArgument("distractor_counts must be non-empty");
  for (int k : distractor_counts)
    if (k < 0 || k > 3) throw InvalidArgument("distractor counts must lie in 0..3");
  if (generation_lengths.empty()) throw InvalidArgument("generation_lengths must be non-empty");
  for (int g : generation_lengths)
    if (g <= 0) throw InvalidArgument("generation lengths must be positive");
  if (modes.empty()) throw InvalidArgument("modes must be non-empty");
  if (reserved_tokens >= interval_length(0)) throw InvalidArgument("reserved_tokens exceeds the smallest interval");
}

std::size_t GridSpec::interval_length(int interval) const {
  const std::size_t j = static_cast<std::size_t>(interval) + 1;
  const std::size_t n = static_cast<std::size_t>(n_intervals);
  return (max_context_tokens * j + n - 1) / n;
}

double GridSpec::depth_fraction(int depth_index) const {
  if (depth_index == n_depths - 1) return 1.0;
  return static_cast<double>(depth_index) / static_cast<double>(n_depths - 1);
}

std::size_t GridSpec::cells_per_mode() const {
  return static_cast<std::size_t>(n_intervals) * static_cast<std::size_t>(n_depths) *
         static_cast<std::size_t>(n_examples) * distractor_counts.size();
}

namespace {

struct Padded {
  SubsetInstance instance;
  double measured_depth = 0.0;
};

Padded pad_impl(const SubsetInstance& instance, const Corpus& corpus, const Tokenizer& tok, std::size_t target,
                double depth, std::uint64_t seed, std::size_t overhead) {
  const std::size_t ctx = tok.count(instance.context);
  if (target < ctx + overhead)
    throw InvalidArgument("target of " + std::to_string(target) + " tokens is smaller than context (" +
                          std::to_string(ctx) + ") plus overhead (" + std::to_string(overhead) + ")");
  Padded out{instance, depth};
  auto hay = build_haystack_sentences(corpus, target - ctx - overhead, seed);
  if (hay.empty()) return out;
  auto placed = place_insertions(hay, {instance.context, ctx}, {}, depth, splitmix64(seed));
  out.instance.context = std::move(placed.text);
  out.measured_depth = placed.measured_depth;
  return out;
}

}  // namespace

SubsetInstance pad_context(const SubsetInstance& instance, const Corpus& corpus, const Tokenizer& tokenizer,
                           std::size_t target_tokens, double depth_fraction, std::uint64_t seed,
                           std::size_t overhead_tokens) {
  return pad_impl(instance, corpus, tokenizer, target_tokens, depth_fraction, seed, overhead_tokens).instance;
}

std::vector<Instance> expand_grid(const GridSpec& spec, const SynthAssets& assets, int threads) {
  const auto targets = grid_targets(spec, assets);
  const auto cells = grid_cells(spec);
  std::vector<Instance> out(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) { out[i] = synthesize_cell(spec, assets, targets, cells[i]); });
  return out;
}

std::vector<Instance> expand_subset_grid(const GridSpec& spec, const std::vector<SubsetInstance>& subset,
                                         const SynthAssets& assets, int threads) {
  spec.validate();
  check_assets(assets);
  const Tokenizer& tok = *assets.tokenizer;
  struct SubsetCell {
    std::size_t item;
    int interval, depth;
  };
  std::vector<SubsetCell> cells;
  for (std::size_t e = 0; e < subset.size(); ++e)
    for (int i = 0; i < spec.n_intervals; ++i)
      for (int d = 0; d < spec.n_depths; ++d) cells.push_back({e, i, d});
  std::vector<Instance> out(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    const auto& c = cells[idx];
    const SubsetInstance& si = subset[c.item];
    Instance inst;
    inst.mode = mode_for(si.label);
    inst.interval = c.interval;
    inst.depth_index = c.depth;
    inst.example_index = static_cast<int>(c.item);
    inst.context_length = spec.interval_length(c.interval);
    inst.target_tokens = spec.interval_target(c.interval);
    inst.depth_fraction = spec.depth_fraction(c.depth);
    inst.query = si.question;
    inst.gold_answer = si.reference_answer;
    inst.opposing_answer = si.opposing_answer;
    char buf[48];
    std::snprintf(buf, sizeof buf, "-i%02d-d%02d", c.interval, c.depth);
    inst.id = std::string(to_string(inst.mode)) + "-" + si.id + buf;
    const std::size_t overhead = tok.count(assets.prompt.assemble("", si.question));
    const auto item = static_cast<std::uint64_t>(c.item);
    const auto ival = static_cast<std::uint64_t>(c.interval);
    const auto dep = static_cast<std::uint64_t>(c.depth);
    const std::size_t ctx = tok.count(si.context);
    if (inst.target_tokens < ctx + overhead)
      throw InvalidArgument("interval target of " + std::to_string(inst.target_tokens) + " tokens cannot hold " +
                            si.id + " (" + std::to_string(ctx + overhead) + " tokens)");
    auto hay = build_haystack_sentences(*assets.corpus, inst.target_tokens - ctx - overhead,
                                        mix_seed(spec.seed, {kPadHaystackTag, ival, item}));
    assemble_prompt(inst, std::move(hay), {si.context, ctx}, {}, mix_seed(spec.seed, {kPadPlacementTag, ival, dep, item}),
                    assets);
    out[idx] = std::move(inst);
  });
  return out;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["id"] = inst.id;
  j["mode"] = to_string(inst.mode);
  if (inst.pair)
    j["pair"] = {{"work_title", inst.pair->work_title}, {"author", inst.pair->author}, {"is_target", inst.pair->is_target}};
  auto needle_json = [](const NeedleFact& n) {
    return json{{"author", n.author}, {"fact", n.fact}, {"rendered", n.rendered}};
  };
  if (inst.needle) j["needle"] = needle_json(*inst.needle);
  j["distractors"] = json::array();
  for (const auto& d : inst.distractors) j["distractors"].push_back(needle_json(d));
  j["interval"] = inst.interval;
  j["depth_index"] = inst.depth_index;
  j["example_index"] = inst.example_index;
  j["distractor_count"] = inst.distractor_count;
  j["context_length"] = inst.context_length;
  j["target_tokens"] = inst.target_tokens;
  j["depth_fraction"] = inst.depth_fraction;
  j["query"] = inst.query;
  j["gold_answer"] = inst.gold_answer;
  if (inst.opposing_answer) j["opposing_answer"] = *inst.opposing_answer;
  j["prompt"] = inst.prompt;
  j["prompt_tokens"] = inst.prompt_tokens;
  j["measured_depth"] = inst.measured_depth;
  return j;
}

Instance instance_from_json(const json& j) {
  Instance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw ParseError("unknown mode '" + j.at("mode").get<std::string>() + "'", 0);
    inst.mode = *mode;
    if (auto p = j.find("pair"); p != j.end())
      inst.pair = KnowledgePair{p->at("work_title").get<std::string>(), p->at("author").get<std::string>(),
                                p->value("is_target", false)};
    auto needle_from = [](const json& n) {
      return NeedleFact{n.at("author").get<std::string>(), n.at("fact").get<std::string>(),
                        n.at("rendered").get<std::string>()};
    };
    if (auto n = j.find("needle"); n != j.end()) inst.needle = needle_from(*n);
    if (auto d = j.find("distractors"); d != j.end())
      for (const auto& e : *d) inst.distractors.push_back(needle_from(e));
    inst.interval = j.at("interval").get<int>();
    inst.depth_index = j.at("depth_index").get<int>();
    inst.example_index = j.value("example_index", 0);
    inst.distractor_count = j.value("distractor_count", 0);
    inst.context_length = j.at("context_length").get<std::size_t>();
    inst.target_tokens = j.at("target_tokens").get<std::size_t>();
    inst.depth_fraction = j.at("depth_fraction").get<double>();
    inst.query = j.at("query").get<std::string>();
    inst.gold_answer = j.at("gold_answer").get<std::string>();
    if (auto o = j.find("opposing_answer"); o != j.end() && o->is_string()) inst.opposing_answer = o->get<std::string>();
    inst.prompt = j.at("prompt").get<std::string>();
    inst.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
    inst.measured_depth = j.value("measured_depth", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad instance record: ") + e.what(), 0);
  }
  return inst;
}

json grid_spec_to_json(const GridSpec& spec) {
  json modes = json::array();
  for (Mode m : spec.modes) modes.push_back(to_string(m));
  return {{"max_context_tokens", spec.max_context_tokens},
          {"n_intervals", spec.n_intervals},
          {"n_depths", spec.n_depths},
          {"n_examples", spec.n_examples},
          {"distractor_counts", spec.distractor_counts},
          {"generation_lengths", spec.generation_lengths},
          {"modes", modes},
          {"reserved_tokens", spec.reserved_tokens},
          {"seed", spec.seed}};
}

GridSpec grid_spec_from_json(const json& j) {
  GridSpec s;
  try {
    s.max_context_tokens = j.value("max_context_tokens", s.max_context_tokens);
    s.n_intervals = j.value("n_intervals", s.n_intervals);
    s.n_depths = j.value("n_depths", s.n_depths);
    s.n_examples = j.value("n_examples", s.n_examples);
    s.distractor_counts = j.value("distractor_counts", s.distractor_counts);
    s.generation_lengths = j.value("generation_lengths", s.generation_lengths);
    if (auto m = j.find("modes"); m != j.end()) {
      s.modes.clear();
      for (const auto& e : *m) {
        auto mode = parse_mode(e.get<std::string>());
        if (!mode) throw InvalidArgument("unknown mode '" + e.get<std::string>() + "'");
        s.modes.push_back(*mode);
      }
    }
    s.reserved_tokens = j.value("reserved_tokens", s.reserved_tokens);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad grid spec: ") + e.what(), 0);
  }
  return s;
}

std::string manifest_path_for(const std::string& instances_path) { return instances_path + ".manifest.json"; }

void write_instances(const std::string& path, const std::vector<Instance>& instances, InstanceManifest manifest) {
  InstanceWriter w(path);
  for (const auto& inst : instances) w.add(inst);
  w.finish(std::move(manifest));
}

std::size_t write_grid(const GridSpec& spec, const SynthAssets& assets, const std::string& path,
                       InstanceManifest manifest, int threads) {
  const auto targets = grid_targets(spec, assets);
  const auto cells = grid_cells(spec);
  InstanceWriter w(path);
  const std::size_t chunk = 64;
  std::vector<Instance> buf;
  for (std::size_t base = 0; base < cells.size(); base += chunk) {
    const std::size_t n = std::min(chunk, cells.size() - base);
    buf.assign(n, Instance{});
    parallel_for(n, threads, [&](std::size_t i) { buf[i] = synthesize_cell(spec, assets, targets, cells[base + i]); });
    for (const auto& inst : buf) w.add(inst);
  }
  w.finish(std::move(manifest));
  return w.count();
}

void for_each_instance(const std::string& path, const std::function<void(Instance&&)>& fn) {
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      fn(instance_from_json(j));
    } catch (const ParseError& e) {
      if (e.line) throw;
      throw ParseError(e.what(), line);
    }
  });
}

std::vector<Instance> read_instances(const std::string& path) {
  std::vector<Instance> out;
  for_each_instance(path, [&](Instance&& inst) { out.push_back(std::move(inst)); });
  return out;
}

InstanceManifest read_manifest(const std::string& manifest_path) {
  InstanceManifest m;
  try {
    json j = json::parse(read_file(manifest_path));
    m.format = j.at("format").get<std::string>();
    m.source = j.value("source", "");
    m.spec = grid_spec_from_json(j.at("spec"));
    m.tokenizer = j.value("tokenizer", "");
    m.tokenizer_digest = j.value("tokenizer_digest", "");
    m.prompt_version = j.value("prompt_version", "");
    m.assets = j.value("assets", std::map<std::string, std::string>{});
    m.instance_count = j.at("instance_count").get<std::size_t>();
    m.instances_sha256 = j.at("instances_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw ManifestError(manifest_path + ": " + e.what());
  } catch (const IoError& e) {
    throw ManifestError(std::string("manifest unreadable: ") + e.what());
  }
  return m;
}

InstanceManifest verify_instances(const std::string& path) {
  InstanceManifest m = read_manifest(manifest_path_for(path));
  if (m.format != "hniah-instances-v1") throw ManifestError("unsupported instance format '" + m.format + "'");
  if (sha256_file(path) != m.instances_sha256) throw ManifestError("instance file checksum does not match manifest");
  std::size_t lines = 0;
  {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) ++lines;
  }
  if (lines != m.instance_count) throw ManifestError("instance count does not match manifest");
  return m;
}

}  // namespace hniah
