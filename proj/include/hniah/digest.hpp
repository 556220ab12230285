// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace hniah {

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  std::string hex();  // finalizes; call once

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Parses a `sha256sum`-style MANIFEST ("<hex>  <relative path>" per line).
std::map<std::string, std::string> read_checksum_manifest(const std::string& path);

// Re-hashes every listed file (relative to the manifest's directory) and
// throws ManifestError on the first mismatch or missing file.
void verify_checksum_manifest(const std::string& path);

}  // namespace hniah
