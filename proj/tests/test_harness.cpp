#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "etr/analytics.hpp"
#include "etr/harness.hpp"
#include "etr/stub_endpoint.hpp"

using namespace etr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("etr_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

const std::vector<Problem>& problems() {
  static const std::vector<Problem> ps = generate_problems(GenConfig{}, 12);
  return ps;
}

std::string predicted_reply(const Problem& p, const ThemeMapping& m) {
  return "Answer: From the premises, we can conclude that " + render_clause(p.predicted, m) + ".";
}

// Original order answers with the predicted conclusion, reversed order with nothing.
std::shared_ptr<ScriptedEndpoint> fallacious_stub(const std::vector<Problem>& ps) {
  auto stub = std::make_shared<ScriptedEndpoint>();
  for (const auto& p : ps) {
    const ThemeMapping m = assign_theme(p);
    stub->script(render_prompt(p, m), predicted_reply(p, m));
  }
  return stub;
}

ModelSpec fast_model(const std::string& id) {
  ModelSpec m = ModelSpec::parse(id);
  m.retry.base_delay_ms = 0;
  return m;
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

RunRecord record(const std::string& model, int i, bool parsed) {
  RunRecord r;
  r.model = model;
  r.problem_id = "p" + std::to_string(i);
  r.answer = parsed ? AnswerStatus::parsed : AnswerStatus::parse_error;
  if (parsed) r.verdict = Verdict{false, true, true, JudgeMode::endorsement};
  return r;
}

}  // namespace

TEST(ModelSpec, ParseAndValidate) {
  ModelSpec m = ModelSpec::parse("openai/gpt-4o");
  EXPECT_EQ(m.provider, "openai");
  EXPECT_EQ(m.model, "gpt-4o");
  EXPECT_EQ(m.id(), "openai/gpt-4o");
  EXPECT_NO_THROW(m.validate());
  m.thinking_budget = 4000;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  EXPECT_EQ(ModelSpec::parse("bare").id(), "bare");
  EXPECT_THROW(ModelSpec::parse("").validate(), std::invalid_argument);
}

TEST(EvalConfig, DefaultsAndPerModelOptions) {
  std::istringstream in(
      "base_url = http://localhost:9/v1\nmax_tokens = 2000\nthinking_budget = 1000\n"
      "model = openai/gpt-4o\nmodel = deepseek/r1\nreasoning = true\ntemperature = 0.5\n");
  const EvalConfig c = parse_eval_config(parse_key_values(in));
  EXPECT_EQ(c.base_url, "http://localhost:9/v1");
  ASSERT_EQ(c.models.size(), 2u);
  EXPECT_EQ(c.models[0].max_tokens, 2000);
  EXPECT_FALSE(c.models[0].reasoning);
  EXPECT_TRUE(c.models[1].reasoning);
  EXPECT_EQ(c.models[1].thinking_budget, 1000);
  EXPECT_DOUBLE_EQ(c.models[1].temperature, 0.5);
  EXPECT_THROW(parse_eval_config({{"base_url", "x"}}), std::invalid_argument);
  EXPECT_THROW(parse_eval_config({{"model", "a/b"}, {"colour", "red"}}), std::invalid_argument);
  EXPECT_THROW(parse_eval_config({{"model", "a/b"}, {"max_tokens", "lots"}}), std::invalid_argument);
  EXPECT_THROW(parse_eval_config({{"model", "a/b"}, {"thinking_budget", "5000"}}), std::invalid_argument);
}

TEST(ChatWire, RequestAndResponseBodies) {
  ChatRequest r;
  r.model = "m";
  r.messages = {{"user", "hi"}};
  EXPECT_FALSE(request_body(r).contains("reasoning"));
  r.thinking_budget = 2400;
  EXPECT_EQ(request_body(r)["reasoning"]["max_tokens"], 2400);
  const ChatResponse resp =
      parse_response_body(R"({"choices":[{"message":{"content":"ok"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
  EXPECT_EQ(resp.content, "ok");
  EXPECT_EQ(resp.prompt_tokens, 3);
  EXPECT_THROW(parse_response_body("{}"), TransportError);
  EXPECT_THROW(parse_response_body("not json"), TransportError);
  EXPECT_EQ(split_base_url("https://openrouter.ai/api/v1/"),
            (std::pair<std::string, std::string>{"https://openrouter.ai", "/api/v1"}));
  EXPECT_THROW(split_base_url("localhost:8080"), std::invalid_argument);
}

TEST(RunRecord, JsonRoundTrip) {
  RunRecord r;
  r.model = "a/b";
  r.problem_id = "00ff";
  r.order = Order::reversed;
  r.theme = "Cards";
  r.mapping_seed = 255;
  r.raw_reply = "Answer: x";
  r.answer = AnswerStatus::parsed;
  r.conclusion = parse_view("{P(a())}");
  r.verdict = Verdict{false, true, true, JudgeMode::exact};
  r.attempts = 2;
  const RunRecord back = run_record_from_json(to_json(r));
  EXPECT_EQ(back.key(), r.key());
  EXPECT_EQ(back.theme, "Cards");
  EXPECT_EQ(back.mapping_seed, 255u);
  ASSERT_TRUE(back.conclusion.has_value());
  EXPECT_TRUE(alpha_equal(*back.conclusion, *r.conclusion));
  EXPECT_EQ(back.verdict->mode, JudgeMode::exact);
  EXPECT_TRUE(back.verdict->human_like_fallacy);
  EXPECT_EQ(to_json(back), to_json(r));
}

TEST(RunSuite, StubRunIsJudged) {
  TempDir dir;
  auto stub = fallacious_stub(problems());
  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  const auto summary = run_suite({fast_model("stub/a"), fast_model("stub/b")}, problems(), cfg,
                                 [&](const ModelSpec&) { return stub; });
  EXPECT_EQ(summary.sent, 2 * 2 * problems().size());
  EXPECT_EQ(summary.parse_errors, 0u);
  EXPECT_EQ(summary.transport_errors, 0u);

  const auto records = read_run_records(cfg.store_path);
  ASSERT_EQ(records.size(), summary.sent);
  for (const auto& r : records) {
    ASSERT_TRUE(r.judged()) << r.key() << " " << r.error;
    if (r.order == Order::original) {
      EXPECT_TRUE(r.verdict->human_like_fallacy) << r.key();
    } else {
      EXPECT_EQ(r.answer, AnswerStatus::nothing_follows);
      EXPECT_TRUE(r.verdict->logically_correct);
    }
  }
  EXPECT_DOUBLE_EQ(fallacy_rate(records), 1.0);
  const auto rows = reversal_effect(records);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_DOUBLE_EQ(row.blocked_fraction, 1.0);
    EXPECT_LT(row.test.p, 0.05);
  }
  EXPECT_TRUE(prompt_hash_mismatches(records, problems()).empty());
}

TEST(RunSuite, ResumeSkipsCompletedWork) {
  TempDir dir;
  auto stub = fallacious_stub(problems());
  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  const std::vector<Problem> half(problems().begin(), problems().begin() + 6);
  run_suite({fast_model("stub/a")}, half, cfg, [&](const ModelSpec&) { return stub; });
  EXPECT_EQ(count_lines(cfg.store_path), 12u);

  // Simulate an interrupted write.
  {
    std::ofstream out(cfg.store_path, std::ios::app);
    out << R"({"model":"stub/a","problem_id":)";
  }
  const int before = stub->calls();
  const auto summary = run_suite({fast_model("stub/a")}, problems(), cfg, [&](const ModelSpec&) { return stub; });
  EXPECT_EQ(summary.skipped, 12u);
  EXPECT_EQ(summary.sent, 12u);
  EXPECT_EQ(stub->calls() - before, 12);

  const auto records = read_run_records(cfg.store_path);
  EXPECT_EQ(records.size(), 24u);
  std::set<std::string> keys;
  for (const auto& r : records) keys.insert(r.key());
  EXPECT_EQ(keys.size(), 24u);

  const auto again = run_suite({fast_model("stub/a")}, problems(), cfg, [&](const ModelSpec&) { return stub; });
  EXPECT_EQ(again.sent, 0u);
  EXPECT_EQ(read_run_records(cfg.store_path).size(), 24u);
}

TEST(RunSuite, TransportRetries) {
  TempDir dir;
  const std::vector<Problem> one(problems().begin(), problems().begin() + 1);
  auto stub = fallacious_stub(one);
  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  cfg.reversed = false;
  cfg.in_flight = 1;
  stub->fail_next(2);
  run_suite({fast_model("stub/a")}, one, cfg, [&](const ModelSpec&) { return stub; });
  auto records = read_run_records(cfg.store_path);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].status, "ok");
  EXPECT_EQ(records[0].attempts, 3);
  EXPECT_TRUE(records[0].judged());

  stub->fail_next(3);
  run_suite({fast_model("stub/b")}, one, cfg, [&](const ModelSpec&) { return stub; });
  records = read_run_records(cfg.store_path);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].status, "transport-error");
  EXPECT_FALSE(records[1].answered());
  EXPECT_FALSE(records[1].error.empty());
}

TEST(RunSuite, TranslatorRescuesFreeformReplies) {
  TempDir dir;
  const std::vector<Problem> one(problems().begin(), problems().begin() + 1);
  const Problem& p = one[0];
  const ThemeMapping m = assign_theme(p);
  const std::string freeform = "Thinking it over, the answer must be the obvious one.";
  auto model = std::make_shared<ScriptedEndpoint>(freeform);
  auto translator = std::make_shared<ScriptedEndpoint>();
  translator->script(translator_instructions() + freeform, predicted_reply(p, m));

  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  cfg.reversed = false;
  cfg.translator = translator;
  run_suite({fast_model("stub/a")}, one, cfg, [&](const ModelSpec&) { return model; });
  const auto records = read_run_records(cfg.store_path);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].raw_reply, freeform);
  EXPECT_EQ(records[0].translated, predicted_reply(p, m));
  EXPECT_EQ(records[0].translator_version, translator_prompt_version);
  ASSERT_TRUE(records[0].judged());
  EXPECT_TRUE(records[0].verdict->human_like_fallacy);
}

TEST(RunSuite, OverHttp) {
  TempDir dir;
  const std::vector<Problem> few(problems().begin(), problems().begin() + 3);
  auto stub = fallacious_stub(few);
  httplib::Server server;
  mount_stub(server, *stub);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  const std::string base = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  stub->fail_next(1);
  const auto summary = run_suite({fast_model("stub/a")}, few, cfg, [&](const ModelSpec&) {
    return std::make_shared<HttpChatClient>(base, "");
  });
  server.stop();
  t.join();
  EXPECT_EQ(summary.sent, 6u);
  EXPECT_EQ(summary.transport_errors, 0u);
  const auto records = read_run_records(cfg.store_path);
  EXPECT_EQ(records.size(), 6u);
  for (const auto& r : records) EXPECT_TRUE(r.judged()) << r.key();
  EXPECT_DOUBLE_EQ(fallacy_rate(records), 1.0);
}

TEST(PromptHash, DetectsDrift) {
  TempDir dir;
  auto stub = fallacious_stub(problems());
  SuiteConfig cfg;
  cfg.store_path = dir.file("run.jsonl");
  run_suite({fast_model("stub/a")}, problems(), cfg, [&](const ModelSpec&) { return stub; });
  auto records = read_run_records(cfg.store_path);
  EXPECT_TRUE(prompt_hash_mismatches(records, problems()).empty());
  records[3].prompt_hash = "0000000000000000";
  const auto bad = prompt_hash_mismatches(records, problems());
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0], records[3].key());
}

TEST(Exclusion, ThresholdOnParseErrors) {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(record("heavy", i, i >= 21));
  for (int i = 0; i < 100; ++i) rs.push_back(record("light", i, i >= 5));
  for (int i = 0; i < 100; ++i) rs.push_back(record("edge", i, i >= 20));
  RunRecord lost = record("light", 500, false);
  lost.status = "transport-error";
  rs.push_back(lost);

  const ExclusionManifest m = exclusion_report(rs);
  EXPECT_TRUE(m.model_excluded("heavy"));
  EXPECT_FALSE(m.model_excluded("light"));
  EXPECT_FALSE(m.model_excluded("edge"));
  for (const auto& e : m.models)
    if (e.model == "light") {
      EXPECT_EQ(e.transport_errors, 1u);
      EXPECT_EQ(e.answered, 100u);
      EXPECT_DOUBLE_EQ(e.parse_error_rate, 0.05);
    }
  EXPECT_EQ(m.excluded_responses.size(), 25u);

  const auto kept = analyzable(rs, m);
  EXPECT_EQ(kept.size(), 95u + 80u);
  for (const auto& r : kept) EXPECT_NE(r.model, "heavy");
  const auto j = to_json(m);
  EXPECT_EQ(j["models"].size(), 3u);
}
