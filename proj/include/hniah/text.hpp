// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hniah {

// Answer normalization used for agreement checks: ASCII lowercase, runs of
// other ASCII non-alphanumerics collapsed to one space, trimmed. Matches
// the scoring token list joined by spaces. Bytes >= 0x80 pass through
// untouched so UTF-8 names survive.
std::string normalize_answer(std::string_view text);

std::string trim(std::string_view text);
std::string ascii_lower(std::string_view text);

// Splits prose into sentences. A sentence ends at '.', '!' or '?' (plus any
// trailing closing quotes or brackets) followed by whitespace or end of
// input. Sentences are trimmed; a trailing fragment without terminal
// punctuation gets a '.' appended so that joining with ' ' and re-splitting
// is the identity.
std::vector<std::string> split_sentences(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::string& path);

}  // namespace hniah
