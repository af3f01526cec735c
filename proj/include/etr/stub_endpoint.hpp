// A scripted chat endpoint for offline runs: replies are looked up by the
// hash of the last user message. Usable in-process or mounted on an HTTP
// server speaking the chat-completions wire format.
#pragma once

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "etr/chat_client.hpp"
#include "etr/hash.hpp"
#include "httplib.h"
#include "json.hpp"

namespace etr {

class ScriptedEndpoint : public ChatClient {
 public:
  ScriptedEndpoint() = default;
  explicit ScriptedEndpoint(std::string default_reply) : default_reply_(std::move(default_reply)) {}

  void script(const std::string& prompt, const std::string& reply) {
    std::lock_guard lock(mu_);
    replies_[content_hash(prompt)] = reply;
  }
  void script_hash(const std::string& hash, const std::string& reply) {
    std::lock_guard lock(mu_);
    replies_[hash] = reply;
  }
  void set_default(const std::string& reply) {
    std::lock_guard lock(mu_);
    default_reply_ = reply;
  }
  /// The next `n` calls fail with a retryable transport error.
  void fail_next(int n) { failures_ = n; }
  int calls() const { return calls_; }

  std::string reply_for(const std::string& prompt) const {
    std::lock_guard lock(mu_);
    auto it = replies_.find(content_hash(prompt));
    return it == replies_.end() ? default_reply_ : it->second;
  }

  ChatResponse complete(const ChatRequest& request) override {
    ++calls_;
    if (failures_.fetch_sub(1) > 0) throw TransportError("scripted failure", true);
    std::string prompt;
    for (const auto& m : request.messages)
      if (m.role == "user") prompt = m.content;
    ChatResponse r;
    r.content = reply_for(prompt);
    r.prompt_tokens = static_cast<int>(prompt.size() / 4);
    r.completion_tokens = static_cast<int>(r.content.size() / 4);
    return r;
  }

  nlohmann::json to_json() const {
    std::lock_guard lock(mu_);
    return {{"default", default_reply_}, {"replies", replies_}};
  }

  static std::shared_ptr<ScriptedEndpoint> from_json(const nlohmann::json& j) {
    auto e = std::make_shared<ScriptedEndpoint>(j.value("default", ""));
    if (j.contains("replies"))
      for (const auto& [hash, reply] : j["replies"].items()) e->script_hash(hash, reply.get<std::string>());
    return e;
  }

  static std::shared_ptr<ScriptedEndpoint> load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return from_json(nlohmann::json::parse(in));
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> replies_;
  std::string default_reply_ = "Answer: From the premises, nothing follows.";
  std::atomic<int> failures_{0};
  std::atomic<int> calls_{0};
};

/// Serve `endpoint` at <prefix>/chat/completions.
inline void mount_stub(httplib::Server& server, ScriptedEndpoint& endpoint, const std::string& prefix = "/v1") {
  server.Post(prefix + "/chat/completions", [&endpoint](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"malformed request"})", "application/json");
      return;
    }
    ChatRequest r;
    r.model = body.value("model", "");
    for (const auto& m : body.value("messages", nlohmann::json::array()))
      r.messages.push_back({m.value("role", ""), m.value("content", "")});
    try {
      const ChatResponse out = endpoint.complete(r);
      nlohmann::json j = {{"id", "stub"},
                          {"object", "chat.completion"},
                          {"model", r.model},
                          {"choices", {{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", out.content}}},
                                        {"finish_reason", "stop"}}}},
                          {"usage", {{"prompt_tokens", out.prompt_tokens}, {"completion_tokens", out.completion_tokens}}}};
      res.set_content(j.dump(), "application/json");
    } catch (const TransportError& e) {
      res.status = 503;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

}  // namespace etr
