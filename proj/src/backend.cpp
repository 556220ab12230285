// Copyright (c) 2026, hniah contributors
// SPDX-License-Identifier: Apache-2.0

#include "hniah/backend.hpp"

#include "httplib.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <thread>

#include "hniah/errors.hpp"
#include "hniah/haystack.hpp"
#include "hniah/jsonl.hpp"
#include "hniah/text.hpp"

namespace hniah {

namespace {

struct LimiterGuard {
  explicit LimiterGuard(InFlightLimiter& l) : limiter(l) { limiter.acquire(); }
  ~LimiterGuard() { limiter.release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;
  InFlightLimiter& limiter;
};

using Clock = std::chrono::steady_clock;

// Applies stop sequences and the token limit.
std::string clip_output(std::string text, const GenerationConfig& cfg, const Tokenizer& tok) {
  for (const auto& stop : cfg.stop_sequences) {
    if (stop.empty()) continue;
    if (auto pos = text.find(stop); pos != std::string::npos) text.resize(pos);
  }
  return tok.truncate(text, static_cast<std::size_t>(std::max(cfg.max_new_tokens, 0)));
}

struct PromptParts {
  std::string_view context;
  std::string question;
};

// Splits a harness prompt into the part before the final "Question:" line
// and the question text itself.
PromptParts split_prompt(std::string_view prompt) {
  constexpr std::string_view marker = "Question:";
  auto pos = prompt.rfind(marker);
  if (pos == std::string_view::npos) {
    auto nl = prompt.rfind('\n');
    std::string_view q = nl == std::string_view::npos ? prompt : prompt.substr(nl + 1);
    return {prompt, trim(q)};
  }
  std::string_view rest = prompt.substr(pos + marker.size());
  auto nl = rest.find('\n');
  return {prompt.substr(0, pos), trim(rest.substr(0, nl))};
}

class MockBackend final : public Backend {
 public:
  MockBackend(MockKind kind, MockParams params)
      : kind_(kind), params_(std::move(params)), tokenizer_(make_tokenizer(params_.tokenizer)) {
    for (const auto& [k, v] : params_.book_to_author) books_[trim(k)] = v;
    for (const auto& [k, v] : params_.answers) answers_.emplace_back(ascii_lower(trim(k)), v);
    std::stable_sort(answers_.begin(), answers_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }

  Completion generate(const std::string& prompt, const GenerationConfig& cfg) override {
    const auto start = Clock::now();
    if (tokenizer_->count(prompt) > params_.max_context)
      throw ContextOverflowError("prompt exceeds mock max context of " + std::to_string(params_.max_context));
    Completion c;
    c.text = clip_output(respond(prompt), cfg, *tokenizer_);
    c.token_count = static_cast<int>(tokenizer_->count(c.text));
    c.backend_id = id();
    c.latency = Clock::now() - start;
    return c;
  }

  std::string id() const override { return "mock:" + std::string(to_string(kind_)); }
  std::size_t max_context() const override { return params_.max_context; }
  const Tokenizer& tokenizer() const override { return *tokenizer_; }

 private:
  std::string respond(const std::string& prompt) const {
    switch (kind_) {
      case MockKind::RefusalFreeEcho:
        return prompt;
      case MockKind::ParametricOnly: {
        const std::string q = ascii_lower(split_prompt(prompt).question);
        for (const auto& [key, answer] : answers_)
          if (q.find(key) != std::string::npos) return answer;
        return params_.fallback_answer;
      }
      case MockKind::PatternRetriever: {
        auto needles = find_needles(split_prompt(prompt).context);
        if (needles.empty()) return params_.fallback_answer;
        return needles.front().fact;
      }
      case MockKind::HybridOracle: {
        auto parts = split_prompt(prompt);
        std::optional<std::string> author = resolve_author(parts.question);
        if (!author) return params_.fallback_answer;
        for (const auto& n : find_needles(parts.context))
          if (n.author == *author) return n.fact;
        return params_.fallback_answer;
      }
    }
    return params_.fallback_answer;
  }

  std::optional<std::string> resolve_author(std::string_view question) const {
    constexpr std::string_view hybrid = "What's the favorite thing of the person who wrote ";
    constexpr std::string_view direct = "What's the favorite thing of ";
    auto strip_q = [](std::string_view s) {
      if (!s.empty() && s.back() == '?') s.remove_suffix(1);
      return trim(s);
    };
    if (auto p = question.find(hybrid); p != std::string_view::npos) {
      auto it = books_.find(strip_q(question.substr(p + hybrid.size())));
      if (it == books_.end()) return std::nullopt;
      return it->second;
    }
    if (auto p = question.find(direct); p != std::string_view::npos) return strip_q(question.substr(p + direct.size()));
    return std::nullopt;
  }

  MockKind kind_;
  MockParams params_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::map<std::string, std::string> books_;
  std::vector<std::pair<std::string, std::string>> answers_;
};

bool looks_like_overflow(int status, const std::string& body) {
  if (status != 400 && status != 413 && status != 422) return false;
  const std::string b = ascii_lower(body);
  return b.find("context length") != std::string::npos || b.find("context_length") != std::string::npos ||
         b.find("maximum context") != std::string::npos || b.find("too many tokens") != std::string::npos ||
         b.find("too long") != std::string::npos;
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig cfg)
      : cfg_(std::move(cfg)), tokenizer_(make_tokenizer(cfg_.tokenizer)), limiter_(cfg_.max_in_flight) {
    if (cfg_.endpoint.empty()) throw InvalidArgument("remote backend needs an endpoint");
    if (cfg_.model.empty()) throw InvalidArgument("remote backend needs a model name");
    if (!cfg_.api_key_env.empty()) {
      const char* v = std::getenv(cfg_.api_key_env.c_str());
      if (!v || !*v) throw InvalidArgument("environment variable " + cfg_.api_key_env + " is not set");
      api_key_ = v;
    }
  }

  Completion generate(const std::string& prompt, const GenerationConfig& gen) override {
    const std::size_t n = tokenizer_->count(prompt);
    if (n > cfg_.max_context)
      throw ContextOverflowError("prompt has " + std::to_string(n) + " tokens, max context is " +
                                 std::to_string(cfg_.max_context));
    const std::string body = chat_request_body(cfg_, prompt, gen);
    const auto start = Clock::now();
    std::string last_error;
    const int attempts = std::max(cfg_.max_attempts, 1);
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        const double wait = cfg_.backoff_initial_seconds * static_cast<double>(1 << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      }
      httplib::Result res;
      {
        LimiterGuard slot(limiter_);
        httplib::Client cli(cfg_.endpoint);
        const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        res = cli.Post(cfg_.path, headers, body, "application/json");
      }
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return parse_response(res->body, gen, start);
      if (looks_like_overflow(res->status, res->body))
        throw ContextOverflowError("service rejected prompt: HTTP " + std::to_string(res->status) + ": " + res->body);
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512);
      if (!retryable(res->status)) break;
    }
    throw TransportError(last_error);
  }

  std::string id() const override { return cfg_.model; }
  std::size_t max_context() const override { return cfg_.max_context; }
  const Tokenizer& tokenizer() const override { return *tokenizer_; }

 private:
  Completion parse_response(const std::string& body, const GenerationConfig& gen, Clock::time_point start) const {
    Completion c;
    try {
      json j = json::parse(body);
      const json& choice = j.at("choices").at(0);
      if (auto m = choice.find("message"); m != choice.end() && m->contains("content") && !(*m)["content"].is_null())
        c.text = (*m)["content"].get<std::string>();
      else if (choice.contains("text"))
        c.text = choice["text"].get<std::string>();
      c.text = clip_output(c.text, gen, *tokenizer_);
      c.token_count = static_cast<int>(tokenizer_->count(c.text));
      if (auto u = j.find("usage"); u != j.end() && u->contains("completion_tokens"))
        c.token_count = std::min((*u)["completion_tokens"].get<int>(), gen.max_new_tokens);
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed completion response: ") + e.what());
    }
    c.backend_id = cfg_.model;
    c.latency = Clock::now() - start;
    return c;
  }

  RemoteConfig cfg_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  InFlightLimiter limiter_;
  std::string api_key_;
};

}  // namespace

std::string_view to_string(MockKind k) {
  switch (k) {
    case MockKind::HybridOracle: return "hybrid_oracle";
    case MockKind::PatternRetriever: return "pattern_retriever";
    case MockKind::ParametricOnly: return "parametric_only";
    case MockKind::RefusalFreeEcho: return "refusal_free_echo";
  }
  return "unknown";
}

std::optional<MockKind> parse_mock_kind(std::string_view s) {
  for (MockKind k : {MockKind::HybridOracle, MockKind::PatternRetriever, MockKind::ParametricOnly,
                     MockKind::RefusalFreeEcho})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::unique_ptr<Backend> mock_backend(MockKind kind, const MockParams& params) {
  if (kind == MockKind::HybridOracle && params.book_to_author.empty())
    throw InvalidArgument("hybrid_oracle needs a non-empty book_to_author map");
  if (kind == MockKind::ParametricOnly && params.answers.empty())
    throw InvalidArgument("parametric_only needs a non-empty answers map");
  if (params.max_context == 0) throw InvalidArgument("mock max_context must be positive");
  return std::make_unique<MockBackend>(kind, params);
}

std::unique_ptr<Backend> remote_backend(const RemoteConfig& cfg) { return std::make_unique<RemoteBackend>(cfg); }

std::string chat_request_body(const RemoteConfig& cfg, const std::string& prompt, const GenerationConfig& gen) {
  json messages = json::array();
  if (!cfg.system_message.empty()) messages.push_back({{"role", "system"}, {"content", cfg.system_message}});
  messages.push_back({{"role", "user"}, {"content", prompt}});
  json body = {{"model", cfg.model}, {"messages", messages}, {"temperature", gen.temperature},
               {"max_tokens", gen.max_new_tokens}};
  if (!gen.stop_sequences.empty()) body["stop"] = gen.stop_sequences;
  return body.dump();
}

void InFlightLimiter::acquire() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return available_ > 0; });
  --available_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lk(mu_);
    ++available_;
  }
  cv_.notify_one();
}

}  // namespace hniah
