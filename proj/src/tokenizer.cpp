// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/tokenizer.hpp"

#include <cctype>

#include "hniah/digest.hpp"
#include "hniah/errors.hpp"

namespace hniah {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

}  // namespace

std::string Tokenizer::digest() const { return sha256_hex(name()).substr(0, 16); }

std::string Tokenizer::truncate(std::string_view text, std::size_t max_tokens) const {
  auto sp = spans(text);
  if (sp.size() <= max_tokens) return std::string(text);
  if (max_tokens == 0) return {};
  return std::string(text.substr(0, sp[max_tokens - 1].end));
}

std::vector<TokenSpan> WhitespaceTokenizer::spans(std::string_view text) const {
  std::vector<TokenSpan> out;
  std::size_t i = 0, n = text.size();
  while (i < n) {
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t b = i;
    while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    out.push_back({b, i});
  }
  return out;
}

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  bool in_token = false;
  for (char ch : text) {
    bool sp = is_space(static_cast<unsigned char>(ch));
    if (!sp && !in_token) ++n;
    in_token = !sp;
  }
  return n;
}

std::vector<TokenSpan> WordPunctTokenizer::spans(std::string_view text) const {
  std::vector<TokenSpan> out;
  std::size_t i = 0, n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_word(c)) {
      std::size_t b = i;
      while (i < n && is_word(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({b, i});
    } else {
      out.push_back({i, i + 1});
      ++i;
    }
  }
  return out;
}

std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view name) {
  if (name == "whitespace" || name == "whitespace-v1") return std::make_shared<WhitespaceTokenizer>();
  if (name == "wordpunct" || name == "wordpunct-v1") return std::make_shared<WordPunctTokenizer>();
  throw InvalidArgument("unknown tokenizer: " + std::string(name));
}

}  // namespace hniah
