// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0
//
// Uniform text-generation interface over OpenAI-compatible chat-completion
// services and deterministic in-process mocks.

#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hniah/tokenizer.hpp"

namespace hniah {

struct GenerationConfig {
  int max_new_tokens = 32;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;

  bool greedy() const { return temperature == 0.0; }
};

struct Completion {
  std::string text;
  int token_count = 0;
  std::chrono::duration<double> latency{0};
  std::string backend_id;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Thread-safe. Throws ContextOverflowError when the prompt exceeds
  // max_context() (no request is issued) and TransportError after the
  // retry budget is spent.
  virtual Completion generate(const std::string& prompt, const GenerationConfig& cfg) = 0;

  virtual std::string id() const = 0;
  virtual std::size_t max_context() const = 0;
  virtual const Tokenizer& tokenizer() const = 0;
};

enum class MockKind { HybridOracle, PatternRetriever, ParametricOnly, RefusalFreeEcho };

std::string_view to_string(MockKind k);
std::optional<MockKind> parse_mock_kind(std::string_view s);

// Parameters for mock backends. Every value is a string; maps carry the
// structured data some kinds need.
struct MockParams {
  // hybrid_oracle: work title -> author.
  std::map<std::string, std::string> book_to_author;
  // parametric_only: key -> canned answer. The longest key contained in the
  // question (case-insensitive) wins.
  std::map<std::string, std::string> answers;
  std::string fallback_answer = "I don't know.";
  std::size_t max_context = 1u << 22;
  std::string tokenizer = "whitespace";
};

std::unique_ptr<Backend> mock_backend(MockKind kind, const MockParams& params);

struct RemoteConfig {
  std::string endpoint;  // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::size_t max_context = 32768;
  std::string api_key_env;  // name of the environment variable holding the key
  std::string system_message;
  std::string tokenizer = "whitespace";
  double timeout_seconds = 600.0;
  int max_attempts = 3;
  double backoff_initial_seconds = 1.0;
  int max_in_flight = 4;
};

std::unique_ptr<Backend> remote_backend(const RemoteConfig& cfg);

// Request body for one chat completion. Exposed for testing the wire format.
std::string chat_request_body(const RemoteConfig& cfg, const std::string& prompt,
                              const GenerationConfig& gen);

// Bounded counting semaphore used to cap in-flight remote requests.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : available_(limit < 1 ? 1 : limit) {}
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

}  // namespace hniah
