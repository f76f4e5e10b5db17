#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrat/error.hpp"

namespace kgrat::gateway {

struct GatewayConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080/v1"
  std::string model;
  // Environment variable holding the API key. Empty means the endpoint
  // needs no authentication.
  std::string api_key_env;
  std::chrono::milliseconds timeout{60'000};
  unsigned max_retries = 3;
  double temperature = 0.0;
  std::chrono::milliseconds backoff_base{1'000};
  double backoff_factor = 2.0;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct Completion {
  std::string text;
  std::optional<TokenUsage> usage;
  std::chrono::milliseconds latency{0};
  unsigned attempts = 0;
};

class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, int status, std::string body, unsigned attempts)
      : Error(what), status_(status), body_(std::move(body)), attempts_(attempts) {}

  // Last HTTP status, or -1 for a transport failure.
  int status() const { return status_; }
  const std::string& body() const { return body_; }
  unsigned attempts() const { return attempts_; }

 private:
  int status_;
  std::string body_;
  unsigned attempts_;
};

// {"model":...,"temperature":...,"messages":[system, user]} with fixed key
// order, so equal inputs give equal bytes.
std::string build_request_body(const GatewayConfig& cfg, std::string_view system,
                               std::string_view user);

// One chat-completions call. Non-2xx responses and transport failures are
// retried with exponential backoff up to cfg.max_retries times. Throws
// ConfigError (before any request) when the key variable is unset, and
// GatewayError once retries are exhausted.
Completion complete(const GatewayConfig& cfg, std::string_view system, std::string_view user);

// In-process OpenAI-compatible endpoint replaying a scripted list of
// replies; the last reply repeats once the script runs out.
class MockChatServer {
 public:
  struct Reply {
    int status = 200;
    std::string body;
  };

  struct Request {
    std::string path;
    std::string body;
    std::string authorization;
  };

  static Reply text_reply(std::string_view text);
  static Reply error_reply(int status, std::string_view message = "scripted failure");

  explicit MockChatServer(std::vector<Reply> script);
  ~MockChatServer();
  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  // "http://127.0.0.1:<port>/v1"
  std::string base_url() const;
  std::size_t request_count() const;
  std::vector<Request> requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kgrat::gateway
