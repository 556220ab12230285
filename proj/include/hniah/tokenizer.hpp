// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Length-budgeting tokenizers. These are used to size prompts against a
// model's context window; answer scoring uses its own model-independent
// normalization (scoring.hpp).

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hniah {

// Byte span of one token inside the source text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::string name() const = 0;
  virtual std::vector<TokenSpan> spans(std::string_view text) const = 0;

  virtual std::size_t count(std::string_view text) const { return spans(text).size(); }

  // Stable identifier recorded in instance manifests.
  std::string digest() const;

  // Returns the prefix of `text` holding at most `max_tokens` tokens.
  std::string truncate(std::string_view text, std::size_t max_tokens) const;
};

// Tokens are maximal runs of non-whitespace bytes.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::string name() const override { return "whitespace-v1"; }
  std::vector<TokenSpan> spans(std::string_view text) const override;
  std::size_t count(std::string_view text) const override;
};

// Alphanumeric runs are tokens; every other non-space byte is its own token.
// Closer to subword counts than whitespace splitting for punctuation-heavy text.
class WordPunctTokenizer final : public Tokenizer {
 public:
  std::string name() const override { return "wordpunct-v1"; }
  std::vector<TokenSpan> spans(std::string_view text) const override;
};

// "whitespace" or "wordpunct"; throws InvalidArgument otherwise.
std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view name);

}  // namespace hniah
