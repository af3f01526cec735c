// OpenAI-compatible chat-completions client.
#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace etr {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  int max_tokens = 3000;
  int thinking_budget = 0;  // 0 = no reasoning budget sent
  double temperature = 0.0;
  double timeout_seconds = 120.0;
};

struct ChatResponse {
  std::string content;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

/// Network, timeout, rate-limit or server failure. `retryable` is false for
/// client errors that will not change on retry.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

inline nlohmann::json request_body(const ChatRequest& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["messages"] = nlohmann::json::array();
  for (const auto& m : r.messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["max_tokens"] = r.max_tokens;
  j["temperature"] = r.temperature;
  if (r.thinking_budget > 0) j["reasoning"] = {{"max_tokens", r.thinking_budget}};
  return j;
}

inline ChatResponse parse_response_body(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed response: ") + e.what(), true);
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw TransportError("response has no choices", true);
  ChatResponse r;
  const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
  if (msg.contains("content") && msg["content"].is_string()) r.content = msg["content"].get<std::string>();
  if (j.contains("usage")) {
    r.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    r.completion_tokens = j["usage"].value("completion_tokens", 0);
  }
  return r;
}

/// "https://host:port/api/v1" -> {"https://host:port", "/api/v1"}.
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string base_url, std::string api_key) : api_key_(std::move(api_key)) {
    std::tie(host_, path_) = split_base_url(base_url);
  }

  /// API key read from the environment variable `key_env` (may be unset for
  /// local endpoints).
  static std::unique_ptr<HttpChatClient> from_env(const std::string& base_url, const std::string& key_env) {
    const char* key = key_env.empty() ? nullptr : std::getenv(key_env.c_str());
    return std::make_unique<HttpChatClient>(base_url, key ? key : "");
  }

  ChatResponse complete(const ChatRequest& request) override {
    httplib::Client cli(host_);
    const auto secs = std::chrono::duration<double>(request.timeout_seconds);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    cli.set_connection_timeout(usecs);
    cli.set_read_timeout(usecs);
    cli.set_write_timeout(usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path_ + "/chat/completions", headers, request_body(request).dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw TransportError("HTTP " + std::to_string(res->status), true);
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, false);
    return parse_response_body(res->body);
  }

 private:
  std::string host_;
  std::string path_;
  std::string api_key_;
};

}  // namespace etr
