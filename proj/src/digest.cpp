// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "hniah/errors.hpp"
#include "hniah/text.hpp"

namespace hniah {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::string_view data) { EVP_DigestUpdate(impl_->ctx, data.data(), data.size()); }

std::string Sha256::hex() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[md[i] >> 4]);
    out.push_back(digits[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

std::map<std::string, std::string> read_checksum_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto sp = t.find(' ');
    if (sp != 64) throw ParseError("expected '<sha256>  <path>'", lineno);
    std::string file = trim(std::string_view(t).substr(sp));
    if (!file.empty() && file[0] == '*') file.erase(0, 1);
    out[file] = t.substr(0, 64);
  }
  return out;
}

void verify_checksum_manifest(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(path).parent_path();
  for (const auto& [file, sum] : read_checksum_manifest(path)) {
    fs::path p = base / file;
    if (!fs::exists(p)) throw ManifestError("asset missing: " + p.string());
    if (sha256_file(p.string()) != sum) throw ManifestError("checksum mismatch: " + p.string());
  }
}

}  // namespace hniah
