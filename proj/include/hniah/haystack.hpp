// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Haystack synthesis: corpus ingestion, token-budgeted filler, needle and
// distractor placement, query templates and grid expansion.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hniah/jsonl.hpp"
#include "hniah/knowledge.hpp"
#include "hniah/subsets.hpp"
#include "hniah/tokenizer.hpp"

namespace hniah {

struct Sentence {
  std::string text;
  std::size_t tokens = 0;
};

struct Corpus {
  std::vector<std::string> documents;
  // Byte offset of each sentence start within its (whitespace-normalized)
  // document, per document.
  std::vector<std::vector<std::size_t>> sentence_index;
  // All sentences in document order.
  std::vector<Sentence> sentences;
  std::string tokenizer_digest;
  std::size_t total_tokens = 0;
  std::size_t max_sentence_tokens = 0;
};

Corpus ingest_corpus(const std::vector<std::string>& paths, const Tokenizer& tokenizer);
// Every regular file in `dir`, sorted by name.
Corpus ingest_corpus_dir(const std::string& dir, const Tokenizer& tokenizer);

// Whole sentences, starting at a seed-derived sentence and cycling through
// the corpus, until the next sentence would exceed `budget`.
std::vector<Sentence> build_haystack_sentences(const Corpus& corpus, std::size_t budget, std::uint64_t seed);
std::string build_haystack(const Corpus& corpus, std::size_t budget, std::uint64_t seed);

// A block of text inserted between haystack sentences.
struct Insertion {
  std::string text;
  std::size_t tokens = 0;
};

struct PlacedContext {
  std::string text;
  std::size_t total_tokens = 0;
  std::size_t target_token_index = 0;  // first token of the primary insertion
  // target_token_index / (total_tokens - primary tokens); 1 means last.
  double measured_depth = 0.0;
};

// Places `primary` at the slot whose first-token index is closest to
// depth_fraction * (total - primary.tokens); each extra insertion goes to an
// independent uniform sentence boundary, with seed-random order among
// insertions sharing a boundary. depth 0 puts `primary` first, depth 1 last.
PlacedContext place_insertions(const std::vector<Sentence>& haystack, const Insertion& primary,
                               const std::vector<Insertion>& extras, double depth_fraction,
                               std::uint64_t seed);

std::string insert_at_depth(std::string_view haystack, const NeedleFact& needle,
                            const std::vector<NeedleFact>& distractors, double depth_fraction,
                            std::uint64_t seed, const Tokenizer& tokenizer);

// Needle-template matcher. Returns every needle sentence in textual order.
std::vector<NeedleFact> find_needles(std::string_view text);
std::optional<NeedleFact> parse_needle(std::string_view sentence);

enum class Mode { Niah, Hybrid, Parametric, Conflict, Irrelevant, HotpotContext, HotpotParametric };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);
Mode mode_for(SubsetLabel label);

// hybrid: "What's the favorite thing of the person who wrote {title}?"
// niah:   "What's the favorite thing of {author}?"
std::string make_query(const KnowledgePair& pair, Mode mode);

struct PromptTemplate {
  std::string version = "prompt-v1";
  std::string instruction =
      "Below is a long document. Read it carefully, then answer the question that follows "
      "with a short phrase.";

  std::string assemble(std::string_view context, std::string_view query) const;
};

struct GridSpec {
  std::size_t max_context_tokens = 32768;
  int n_intervals = 40;
  int n_depths = 10;
  int n_examples = 1;
  std::vector<int> distractor_counts{0, 1, 2, 3};
  std::vector<int> generation_lengths{32, 64};
  std::vector<Mode> modes{Mode::Hybrid};
  // Subtracted from every interval's length (e.g. to leave room for output).
  std::size_t reserved_tokens = 0;
  std::uint64_t seed = 0;

  void validate() const;
  // ceil(max_context_tokens * (interval + 1) / n_intervals)
  std::size_t interval_length(int interval) const;
  std::size_t interval_target(int interval) const { return interval_length(interval) - reserved_tokens; }
  double depth_fraction(int depth_index) const;
  std::size_t cells_per_mode() const;
};

struct Instance {
  std::string id;
  Mode mode = Mode::Hybrid;
  std::optional<KnowledgePair> pair;
  std::optional<NeedleFact> needle;
  std::vector<NeedleFact> distractors;
  int interval = 0;
  int depth_index = 0;
  int example_index = 0;
  int distractor_count = 0;
  std::size_t context_length = 0;  // interval length before reserved tokens
  std::size_t target_tokens = 0;   // prompt budget
  double depth_fraction = 0.0;
  std::string query;
  std::string gold_answer;
  std::optional<std::string> opposing_answer;
  std::string prompt;
  std::size_t prompt_tokens = 0;
  double measured_depth = 0.0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Embeds the instance context as one block at `depth_fraction` inside
// corpus filler so that context + filler + overhead_tokens <= target_tokens.
// Throws InvalidArgument when target_tokens < context + overhead_tokens.
SubsetInstance pad_context(const SubsetInstance& instance, const Corpus& corpus, const Tokenizer& tokenizer,
                           std::size_t target_tokens, double depth_fraction, std::uint64_t seed,
                           std::size_t overhead_tokens = 0);

struct SynthAssets {
  const std::vector<KnowledgePair>* pairs = nullptr;
  const std::vector<std::string>* facts = nullptr;
  const Corpus* corpus = nullptr;
  const Tokenizer* tokenizer = nullptr;
  PromptTemplate prompt;
};

// One instance per (mode, interval, depth, example, distractor count), in
// that nesting order. Example e uses the e-th target pair. `threads` > 1
// synthesizes cells in parallel; the output is identical either way.
std::vector<Instance> expand_grid(const GridSpec& spec, const SynthAssets& assets, int threads = 1);

// Pads each subset instance to every (interval, depth) cell of `spec`.
// Distractor counts and modes of the spec are ignored.
std::vector<Instance> expand_subset_grid(const GridSpec& spec, const std::vector<SubsetInstance>& subset,
                                         const SynthAssets& assets, int threads = 1);

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);
json grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const json& j);

// Sidecar describing how an instance file was produced.
struct InstanceManifest {
  std::string format = "hniah-instances-v1";
  std::string source;  // "grid" or the subset file name
  GridSpec spec;
  std::string tokenizer;
  std::string tokenizer_digest;
  std::string prompt_version;
  std::map<std::string, std::string> assets;  // asset name -> sha256
  std::size_t instance_count = 0;
  std::string instances_sha256;
};

std::string manifest_path_for(const std::string& instances_path);

// Writes `path` and its manifest; count and checksum are filled in here.
void write_instances(const std::string& path, const std::vector<Instance>& instances,
                     InstanceManifest manifest);
// Synthesizes the grid straight into `path` in bounded memory; the file is
// byte-identical to write_instances(path, expand_grid(spec, assets), ...).
std::size_t write_grid(const GridSpec& spec, const SynthAssets& assets, const std::string& path,
                       InstanceManifest manifest, int threads = 1);
std::vector<Instance> read_instances(const std::string& path);
// Calls `fn` for each instance without holding the whole file in memory.
void for_each_instance(const std::string& path, const std::function<void(Instance&&)>& fn);
InstanceManifest read_manifest(const std::string& manifest_path);
// Throws ManifestError when the instance file's checksum or count differs
// from its manifest.
InstanceManifest verify_instances(const std::string& path);

}  // namespace hniah
