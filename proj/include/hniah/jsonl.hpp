// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "json.hpp"

namespace hniah {

using json = nlohmann::json;

// Calls `fn(record, line_number)` for every non-blank line. Malformed JSON
// raises ParseError carrying the line number.
void for_each_jsonl(const std::string& path, const std::function<void(const json&, std::size_t)>& fn);

// Replaces `path` with `contents`.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace hniah
