// Rewriting free-form model answers into the constrained answer grammar via
// a separate chat model. The translator never sees the premises.
#pragma once

#include <string>

#include "etr/chat_client.hpp"
#include "etr/config.hpp"

namespace etr {

inline constexpr const char* translator_prompt_version = "translator-v1";

inline const std::string& translator_instructions() {
  static const std::string text =
      "Rewrite the final conclusion of the answer below as a single line of the form\n"
      "\"Answer: From the premises, we can conclude that <conclusion>.\"\n"
      "Use only simple clauses of the form \"<entity> is <property>\" or \"<entity> is not <property>\", "
      "joined by \"and\" within an alternative and by \", or \" between alternatives (start a two-way "
      "choice with \"either\"). Quantified claims start with \"there is some X such that\" or \"every X is "
      "such that\". If the answer says that nothing follows, reply exactly "
      "\"Answer: From the premises, nothing follows.\" Reply with that one line and nothing else.\n"
      "\n"
      "Answer to rewrite:\n";
  return text;
}

struct TranslationConfig {
  std::string model;
  int max_tokens = 300;
  double timeout_seconds = 60.0;
  int attempts = 3;
};

struct Translation {
  bool ok = false;
  std::string text;
  std::string error;
  int attempts = 0;
  bool passthrough = false;  // already constrained, no request made
};

/// One line that already starts with "Answer: From the premises,".
inline bool is_constrained(const std::string& text) {
  const std::string t = trim(text);
  return t.find('\n') == std::string::npos && t.rfind("Answer: From the premises,", 0) == 0;
}

inline Translation translate_freeform(const std::string& text, ChatClient& client, const TranslationConfig& cfg) {
  Translation out;
  if (trim(text).empty()) {
    out.error = "empty reply";
    return out;
  }
  if (is_constrained(text)) {
    out.ok = true;
    out.passthrough = true;
    out.text = trim(text);
    return out;
  }
  ChatRequest req;
  req.model = cfg.model;
  req.max_tokens = cfg.max_tokens;
  req.timeout_seconds = cfg.timeout_seconds;
  req.messages = {{"user", translator_instructions() + text}};
  for (int i = 0; i < cfg.attempts; ++i) {
    ++out.attempts;
    try {
      const std::string reply = trim(client.complete(req).content);
      if (reply.empty()) {
        out.error = "translator returned an empty reply";
        return out;
      }
      out.ok = true;
      out.text = reply;
      return out;
    } catch (const TransportError& e) {
      out.error = e.what();
      if (!e.retryable()) break;
    }
  }
  return out;
}

}  // namespace etr
