#include "kgrat/gateway.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <mutex>
#include <thread>

namespace kgrat::gateway {
namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /chat/completions
};

Endpoint parse_endpoint(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url must include a scheme: '" + base_url + "'");
  }
  const auto scheme = base_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme '" + scheme + "'");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/chat/completions";
  return ep;
}

std::optional<TokenUsage> read_usage(const ordered_json& j) {
  if (!j.contains("usage") || !j["usage"].is_object()) return std::nullopt;
  TokenUsage u;
  u.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
  u.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
  return u;
}

}  // namespace

std::string build_request_body(const GatewayConfig& cfg, std::string_view system,
                               std::string_view user) {
  ordered_json body;
  body["model"] = cfg.model;
  if (std::nearbyint(cfg.temperature) == cfg.temperature && std::abs(cfg.temperature) < 1e9) {
    body["temperature"] = static_cast<std::int64_t>(cfg.temperature);
  } else {
    body["temperature"] = cfg.temperature;
  }
  body["messages"] = ordered_json::array({
      ordered_json{{"role", "system"}, {"content", std::string(system)}},
      ordered_json{{"role", "user"}, {"content", std::string(user)}},
  });
  return body.dump();
}

Completion complete(const GatewayConfig& cfg, std::string_view system, std::string_view user) {
  const auto endpoint = parse_endpoint(cfg.base_url);
  std::string key;
  if (!cfg.api_key_env.empty()) {
    const char* v = std::getenv(cfg.api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
      throw ConfigError("environment variable " + cfg.api_key_env + " is not set");
    }
    key = v;
  }

  httplib::Client client(endpoint.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const auto body = build_request_body(cfg, system, user);
  const auto t0 = Clock::now();
  int last_status = -1;
  std::string last_body;
  auto delay = std::chrono::duration<double, std::milli>(cfg.backoff_base);
  for (unsigned attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay *= cfg.backoff_factor;
    }
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_status = -1;
      last_body = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    last_body = res->body;
    if (res->status < 200 || res->status >= 300) continue;

    const auto parsed = ordered_json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
      continue;
    }
    const auto& msg = parsed["choices"][0]["message"];
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) continue;

    Completion c;
    c.text = msg["content"].get<std::string>();
    c.usage = read_usage(parsed);
    c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
    c.attempts = attempt;
    return c;
  }
  throw GatewayError("chat completion failed after " + std::to_string(cfg.max_retries + 1) +
                         " attempts (last status " + std::to_string(last_status) + ")",
                     last_status, last_body, cfg.max_retries + 1);
}

struct MockChatServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mu;
  std::vector<Reply> script;
  std::vector<Request> seen;
};

MockChatServer::Reply MockChatServer::text_reply(std::string_view text) {
  ordered_json j;
  j["id"] = "mock";
  j["object"] = "chat.completion";
  j["choices"] = ordered_json::array({ordered_json{
      {"index", 0},
      {"message", {{"role", "assistant"}, {"content", std::string(text)}}},
      {"finish_reason", "stop"}}});
  j["usage"] = {{"prompt_tokens", 0}, {"completion_tokens", 0}};
  return {200, j.dump()};
}

MockChatServer::Reply MockChatServer::error_reply(int status, std::string_view message) {
  ordered_json j;
  j["error"] = {{"message", std::string(message)}};
  return {status, j.dump()};
}

MockChatServer::MockChatServer(std::vector<Reply> script) : impl_(std::make_unique<Impl>()) {
  if (script.empty()) script.push_back(text_reply(""));
  impl_->script = std::move(script);
  auto* impl = impl_.get();
  impl->server.Post(R"(.*/chat/completions)", [impl](const httplib::Request& req,
                                                     httplib::Response& res) {
    Reply reply;
    {
      std::lock_guard lock(impl->mu);
      const auto idx = std::min(impl->seen.size(), impl->script.size() - 1);
      reply = impl->script[idx];
      impl->seen.push_back({req.path, req.body, req.get_header_value("Authorization")});
    }
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  impl->port = impl->server.bind_to_any_port("127.0.0.1");
  if (impl->port <= 0) throw Error("mock server could not bind a port");
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

MockChatServer::~MockChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1";
}

std::size_t MockChatServer::request_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->seen.size();
}

std::vector<MockChatServer::Request> MockChatServer::requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->seen;
}

}  // namespace kgrat::gateway
