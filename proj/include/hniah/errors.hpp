// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy for the core library. The C API maps each class onto
// a stable status code (see hniah.h).

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hniah {

enum class ErrorKind {
  InvalidArgument,
  Io,
  Parse,
  Invariant,
  Transport,
  ContextOverflow,
  Manifest,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

// Malformed record. `line` is 1-based; 0 when not line-oriented.
struct ParseError : Error {
  ParseError(const std::string& w, std::size_t line_no)
      : Error(ErrorKind::Parse, line_no ? "line " + std::to_string(line_no) + ": " + w : w),
        line(line_no) {}
  std::size_t line;
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& w) : Error(ErrorKind::Invariant, w) {}
};

struct TransportError : Error {
  explicit TransportError(const std::string& w) : Error(ErrorKind::Transport, w) {}
};

struct ContextOverflowError : Error {
  explicit ContextOverflowError(const std::string& w) : Error(ErrorKind::ContextOverflow, w) {}
};

struct ManifestError : Error {
  explicit ManifestError(const std::string& w) : Error(ErrorKind::Manifest, w) {}
};

}  // namespace hniah
