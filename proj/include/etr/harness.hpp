// Evaluation runs: every (model, problem, order) exchange is rendered, sent,
// judged and appended to a line-delimited run store. Resumable.
#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "etr/chat_client.hpp"
#include "etr/judge.hpp"
#include "etr/problem.hpp"
#include "etr/render.hpp"
#include "etr/translate.hpp"
#include "json.hpp"

namespace etr {

struct RetryPolicy {
  int attempts = 3;
  int base_delay_ms = 500;
  double jitter = 0.25;  // +/- fraction of each delay
};

struct ModelSpec {
  std::string provider;
  std::string model;
  int max_tokens = 3000;
  int thinking_budget = 2400;  // sent only for reasoning models
  bool reasoning = false;
  double timeout_seconds = 120.0;
  double temperature = 0.0;
  RetryPolicy retry;

  std::string id() const { return provider.empty() ? model : provider + "/" + model; }

  void validate() const {
    if (model.empty()) throw std::invalid_argument("model id is empty");
    if (max_tokens <= 0 || thinking_budget <= 0) throw std::invalid_argument(id() + ": token budgets must be positive");
    if (thinking_budget > max_tokens) throw std::invalid_argument(id() + ": thinking budget exceeds output budget");
    if (timeout_seconds <= 0) throw std::invalid_argument(id() + ": timeout must be positive");
    if (retry.attempts < 1) throw std::invalid_argument(id() + ": need at least one attempt");
  }

  /// "provider/model" or bare "model".
  static ModelSpec parse(const std::string& text) {
    ModelSpec m;
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      m.model = text;
    } else {
      m.provider = text.substr(0, slash);
      m.model = text.substr(slash + 1);
    }
    return m;
  }
};

enum class Order { original, reversed };

inline std::string to_string(Order o) { return o == Order::original ? "original" : "reversed"; }

inline Order order_from_string(const std::string& s) {
  if (s == "original") return Order::original;
  if (s == "reversed") return Order::reversed;
  throw std::invalid_argument("unknown order: " + s);
}

struct RunRecord {
  std::string model;
  std::string problem_id;  // id of the original-order problem
  Order order = Order::original;
  std::string status = "ok";  // ok | transport-error
  std::string theme;
  std::uint64_t mapping_seed = 0;
  std::string prompt_hash;
  std::string raw_reply;
  std::string translated;
  std::string translator_version;
  AnswerStatus answer = AnswerStatus::parse_error;
  std::optional<View> conclusion;
  std::optional<Verdict> verdict;
  std::string error;
  double elapsed_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int attempts = 0;
  double temperature = 0;

  std::string key() const { return model + "\t" + problem_id + "\t" + to_string(order); }
  bool answered() const { return status == "ok"; }
  bool judged() const { return verdict.has_value(); }
};

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j = {{"model", r.model},
                      {"problem_id", r.problem_id},
                      {"order", to_string(r.order)},
                      {"status", r.status},
                      {"theme", r.theme},
                      {"mapping_seed", r.mapping_seed},
                      {"prompt_hash", r.prompt_hash},
                      {"raw_reply", r.raw_reply},
                      {"answer", to_string(r.answer)},
                      {"elapsed_ms", r.elapsed_ms},
                      {"prompt_tokens", r.prompt_tokens},
                      {"completion_tokens", r.completion_tokens},
                      {"attempts", r.attempts},
                      {"temperature", r.temperature}};
  if (!r.translated.empty()) j["translated"] = r.translated;
  if (!r.translator_version.empty()) j["translator_version"] = r.translator_version;
  if (r.conclusion) j["conclusion"] = print_view(*r.conclusion);
  if (r.verdict)
    j["verdict"] = {{"logically_correct", r.verdict->logically_correct},
                    {"etr_predicted", r.verdict->etr_predicted},
                    {"human_like_fallacy", r.verdict->human_like_fallacy},
                    {"mode", to_string(r.verdict->mode)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.model = j.at("model").get<std::string>();
  r.problem_id = j.at("problem_id").get<std::string>();
  r.order = order_from_string(j.at("order").get<std::string>());
  r.status = j.value("status", "ok");
  r.theme = j.value("theme", "");
  r.mapping_seed = j.value("mapping_seed", std::uint64_t{0});
  r.prompt_hash = j.value("prompt_hash", "");
  r.raw_reply = j.value("raw_reply", "");
  r.translated = j.value("translated", "");
  r.translator_version = j.value("translator_version", "");
  r.answer = answer_status_from_string(j.value("answer", "parse-error"));
  if (j.contains("conclusion")) r.conclusion = parse_view(j["conclusion"].get<std::string>());
  if (j.contains("verdict")) {
    const auto& v = j["verdict"];
    r.verdict = Verdict{v.at("logically_correct").get<bool>(), v.at("etr_predicted").get<bool>(),
                        v.at("human_like_fallacy").get<bool>(), judge_mode_from_string(v.value("mode", "endorsement"))};
  }
  r.error = j.value("error", "");
  r.elapsed_ms = j.value("elapsed_ms", 0.0);
  r.prompt_tokens = j.value("prompt_tokens", 0);
  r.completion_tokens = j.value("completion_tokens", 0);
  r.attempts = j.value("attempts", 0);
  r.temperature = j.value("temperature", 0.0);
  return r;
}

/// Append-only store. A trailing partial line (interrupted write) is ignored
/// on load.
class RunStore {
 public:
  explicit RunStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      try {
        RunRecord r = run_record_from_json(nlohmann::json::parse(line));
        if (keys_.insert(r.key()).second) records_.push_back(std::move(r));
      } catch (const nlohmann::json::exception&) {
      }
    }
    std::ifstream tail(path_, std::ios::binary | std::ios::ate);
    if (tail && tail.tellg() > 0) {
      tail.seekg(-1, std::ios::end);
      needs_newline_ = tail.get() != '\n';
    }
  }

  bool contains(const std::string& key) const {
    std::lock_guard lock(mu_);
    return keys_.count(key) > 0;
  }

  void append(const RunRecord& r) {
    std::lock_guard lock(mu_);
    if (!keys_.insert(r.key()).second) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path_);
    if (needs_newline_) out << "\n";
    needs_newline_ = false;
    out << to_json(r).dump() << "\n";
    out.flush();
    records_.push_back(r);
  }

  std::vector<RunRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::set<std::string> keys_;
  std::vector<RunRecord> records_;
  bool needs_newline_ = false;
};

inline std::vector<RunRecord> read_run_records(const std::string& path) { return RunStore(path).records(); }

struct SuiteConfig {
  std::string store_path = "run.jsonl";
  std::size_t in_flight = 8;
  JudgeMode mode = JudgeMode::endorsement;
  bool reversed = true;
  std::vector<Theme> themes = builtin_themes();
  OracleConfig oracle;
  std::shared_ptr<ChatClient> translator;  // optional
  TranslationConfig translation;
};

struct SuiteSummary {
  std::size_t sent = 0;
  std::size_t skipped = 0;
  std::size_t transport_errors = 0;
  std::size_t parse_errors = 0;
};

using ClientFactory = std::function<std::shared_ptr<ChatClient>(const ModelSpec&)>;

namespace detail {

inline void backoff(const RetryPolicy& p, int attempt, Rng& rng) {
  if (p.base_delay_ms <= 0) return;
  const double base = p.base_delay_ms * static_cast<double>(1u << std::min(attempt, 10));
  const double jitter = 1.0 + p.jitter * (2.0 * static_cast<double>(rng.below(1001)) / 1000.0 - 1.0);
  std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(base * jitter)));
}

}  // namespace detail

/// Judge a raw reply for `p`, translating first when the direct parse fails
/// and a translator is configured.
inline void judge_into(RunRecord& r, const std::string& reply, const Problem& p, const ThemeMapping& m,
                       const SuiteConfig& cfg) {
  ParsedAnswer a = parse_answer(reply, m);
  if (a.status == AnswerStatus::parse_error && cfg.translator) {
    const Translation t = translate_freeform(reply, *cfg.translator, cfg.translation);
    r.translator_version = translator_prompt_version;
    if (t.ok) {
      r.translated = t.text;
      a = parse_answer(t.text, m);
    } else {
      a.error = "translation failed: " + t.error;
    }
  }
  r.answer = a.status;
  r.conclusion = a.conclusion;
  if (a.status == AnswerStatus::parse_error) {
    r.error = a.error;
    return;
  }
  r.verdict = judge_response(p, a, cfg.mode, cfg.oracle);
}

inline SuiteSummary run_suite(const std::vector<ModelSpec>& models, const std::vector<Problem>& problems,
                              const SuiteConfig& cfg, const ClientFactory& make_client) {
  for (const auto& m : models) m.validate();
  RunStore store(cfg.store_path);

  struct Item {
    const ModelSpec* model;
    std::size_t problem;
    Order order;
  };
  std::vector<Problem> reversed(problems.size());
  std::vector<ThemeMapping> mappings;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    mappings.push_back(assign_theme(problems[i], cfg.themes));
    if (cfg.reversed) reversed[i] = reverse_premises(problems[i]);
  }

  SuiteSummary summary;
  std::vector<Item> work;
  for (const auto& m : models)
    for (std::size_t i = 0; i < problems.size(); ++i)
      for (Order o : {Order::original, Order::reversed}) {
        if (o == Order::reversed && !cfg.reversed) continue;
        RunRecord probe;
        probe.model = m.id();
        probe.problem_id = problems[i].id;
        probe.order = o;
        if (store.contains(probe.key()))
          ++summary.skipped;
        else
          work.push_back({&m, i, o});
      }

  std::map<std::string, std::shared_ptr<ChatClient>> clients;
  for (const auto& m : models) clients[m.id()] = make_client(m);

  std::atomic<std::size_t> next{0};
  std::mutex summary_mu;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < work.size();) {
      const Item& item = work[k];
      const ModelSpec& spec = *item.model;
      const Problem& p = item.order == Order::original ? problems[item.problem] : reversed[item.problem];
      const ThemeMapping& mapping = mappings[item.problem];

      RunRecord r;
      r.model = spec.id();
      r.problem_id = problems[item.problem].id;
      r.order = item.order;
      r.theme = mapping.theme.name;
      r.mapping_seed = mapping.rng_seed;
      r.temperature = spec.temperature;
      const std::string prompt = render_prompt(p, mapping);
      r.prompt_hash = prompt_hash(prompt);

      ChatRequest req;
      req.model = spec.model;
      req.messages = {{"user", prompt}};
      req.max_tokens = spec.max_tokens;
      req.thinking_budget = spec.reasoning ? spec.thinking_budget : 0;
      req.temperature = spec.temperature;
      req.timeout_seconds = spec.timeout_seconds;

      Rng jitter(fnv1a64(r.key()));
      const auto start = std::chrono::steady_clock::now();
      std::optional<ChatResponse> reply;
      for (int attempt = 0; attempt < spec.retry.attempts && !reply; ++attempt) {
        ++r.attempts;
        try {
          reply = clients.at(spec.id())->complete(req);
        } catch (const TransportError& e) {
          r.error = e.what();
          if (!e.retryable()) break;
          if (attempt + 1 < spec.retry.attempts) detail::backoff(spec.retry, attempt, jitter);
        }
      }
      r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

      if (!reply) {
        r.status = "transport-error";
      } else {
        r.error.clear();
        r.raw_reply = reply->content;
        r.prompt_tokens = reply->prompt_tokens;
        r.completion_tokens = reply->completion_tokens;
        try {
          judge_into(r, reply->content, p, mapping, cfg);
        } catch (const OracleError& e) {
          r.verdict.reset();
          r.answer = AnswerStatus::parse_error;
          r.error = std::string("oracle: ") + e.what();
        }
      }
      store.append(r);
      std::lock_guard lock(summary_mu);
      ++summary.sent;
      if (!r.answered()) ++summary.transport_errors;
      if (r.answered() && !r.judged()) ++summary.parse_errors;
    }
  };

  const std::size_t n = std::max<std::size_t>(1, std::min(cfg.in_flight, work.size()));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return summary;
}

/// Endpoint and models for an evaluation run, read from a key = value file.
/// Options before the first "model" line are defaults; options after a
/// "model" line apply to that model only.
struct EvalConfig {
  std::string base_url = "https://openrouter.ai/api/v1";
  std::string api_key_env = "OPENROUTER_API_KEY";
  std::string translator;  // model id, empty for none
  std::vector<ModelSpec> models;
};

inline EvalConfig parse_eval_config(const KeyValues& kv) {
  EvalConfig c;
  ModelSpec defaults;
  auto number = [](const std::string& k, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::logic_error&) {
      throw std::invalid_argument("eval config: " + k + " needs a number, got '" + v + "'");
    }
  };
  for (const auto& [k, v] : kv) {
    ModelSpec& target = c.models.empty() ? defaults : c.models.back();
    if (k == "base_url") c.base_url = v;
    else if (k == "api_key_env") c.api_key_env = v;
    else if (k == "translator") c.translator = v;
    else if (k == "model") {
      ModelSpec m = defaults;
      const ModelSpec parsed = ModelSpec::parse(v);
      m.provider = parsed.provider;
      m.model = parsed.model;
      c.models.push_back(m);
    } else if (k == "max_tokens") target.max_tokens = static_cast<int>(number(k, v));
    else if (k == "thinking_budget") target.thinking_budget = static_cast<int>(number(k, v));
    else if (k == "reasoning") {
      if (v != "true" && v != "false") throw std::invalid_argument("eval config: reasoning must be true or false");
      target.reasoning = v == "true";
    } else if (k == "timeout") target.timeout_seconds = number(k, v);
    else if (k == "temperature") target.temperature = number(k, v);
    else if (k == "attempts") target.retry.attempts = static_cast<int>(number(k, v));
    else if (k == "retry_delay_ms") target.retry.base_delay_ms = static_cast<int>(number(k, v));
    else throw std::invalid_argument("eval config: unknown key '" + k + "'");
  }
  if (c.models.empty()) throw std::invalid_argument("eval config: no models listed");
  for (const auto& m : c.models) m.validate();
  return c;
}

/// Keys of records whose prompt hash differs from re-rendering the problem
/// under the recorded theme mapping.
inline std::vector<std::string> prompt_hash_mismatches(const std::vector<RunRecord>& records,
                                                       const std::vector<Problem>& problems,
                                                       const std::vector<Theme>& themes = builtin_themes()) {
  std::map<std::string, const Problem*> by_id;
  for (const auto& p : problems) by_id[p.id] = &p;
  std::vector<std::string> bad;
  for (const auto& r : records) {
    auto it = by_id.find(r.problem_id);
    if (it == by_id.end()) continue;
    const ThemeMapping m = assign_theme(*it->second, themes);
    const Problem p = r.order == Order::original ? *it->second : reverse_premises(*it->second);
    if (m.rng_seed != r.mapping_seed || prompt_hash(render_prompt(p, m)) != r.prompt_hash) bad.push_back(r.key());
  }
  return bad;
}

struct ModelExclusion {
  std::string model;
  std::size_t records = 0;
  std::size_t answered = 0;
  std::size_t parse_errors = 0;
  std::size_t transport_errors = 0;
  double parse_error_rate = 0;
  bool excluded = false;
};

struct ExclusionManifest {
  double threshold = 0.2;
  std::vector<ModelExclusion> models;
  std::vector<std::string> excluded_responses;  // record keys

  bool model_excluded(const std::string& model) const {
    for (const auto& m : models)
      if (m.model == model) return m.excluded;
    return false;
  }
};

/// Models whose parse-error rate over answered records exceeds `threshold`
/// are excluded; in retained models each parse-error response is dropped.
inline ExclusionManifest exclusion_report(const std::vector<RunRecord>& records, double threshold = 0.2) {
  ExclusionManifest out;
  out.threshold = threshold;
  std::map<std::string, ModelExclusion> by_model;
  for (const auto& r : records) {
    auto& m = by_model[r.model];
    m.model = r.model;
    ++m.records;
    if (!r.answered()) {
      ++m.transport_errors;
      continue;
    }
    ++m.answered;
    if (!r.judged()) ++m.parse_errors;
  }
  for (auto& [name, m] : by_model) {
    m.parse_error_rate = m.answered ? static_cast<double>(m.parse_errors) / static_cast<double>(m.answered) : 0.0;
    m.excluded = m.parse_error_rate > threshold;
    out.models.push_back(m);
  }
  for (const auto& r : records)
    if (r.answered() && !r.judged() && !out.model_excluded(r.model)) out.excluded_responses.push_back(r.key());
  return out;
}

inline nlohmann::json to_json(const ExclusionManifest& m) {
  nlohmann::json j = {{"threshold", m.threshold}, {"models", nlohmann::json::array()}};
  for (const auto& e : m.models)
    j["models"].push_back({{"model", e.model},
                           {"records", e.records},
                           {"answered", e.answered},
                           {"parse_errors", e.parse_errors},
                           {"transport_errors", e.transport_errors},
                           {"parse_error_rate", e.parse_error_rate},
                           {"excluded", e.excluded}});
  j["excluded_responses"] = m.excluded_responses;
  return j;
}

/// Records that enter the analysis: answered, judged, from retained models.
inline std::vector<RunRecord> analyzable(const std::vector<RunRecord>& records, const ExclusionManifest& m) {
  std::vector<RunRecord> out;
  for (const auto& r : records)
    if (r.answered() && r.judged() && !m.model_excluded(r.model)) out.push_back(r);
  return out;
}

}  // namespace etr
