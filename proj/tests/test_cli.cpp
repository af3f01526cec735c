#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "etr/harness.hpp"
#include "etr/stub_endpoint.hpp"

using namespace etr;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

CliRun etr_cli(const std::vector<std::string>& args) {
  std::string cmd = quote(ETR_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("etr_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) n += !l.empty();
  return n;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(etr_cli({}).status, 2);
  EXPECT_EQ(etr_cli({"frobnicate"}).status, 2);
  EXPECT_EQ(etr_cli({"render", "--problems", file("missing.jsonl")}).status, 2);
  EXPECT_EQ(etr_cli({"generate", "--n", "0"}).status, 2);
  EXPECT_EQ(etr_cli({"judge", "--problems", file("missing.jsonl")}).status, 2);
  EXPECT_EQ(etr_cli({"predict"}).status, 2);
  EXPECT_EQ(etr_cli({"--help"}).status, 0);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  EXPECT_EQ(etr_cli({"predict", "{P(a()"}).status, 1);
  std::ofstream(file("bad.conf")) << "model = a/b\ncolour = red\n";
  std::ofstream(file("empty.jsonl")) << "";
  EXPECT_EQ(etr_cli({"eval", "--config", file("bad.conf"), "--problems", file("empty.jsonl"), "--store",
                     file("s.jsonl")})
                .status,
            1);
}

TEST_F(CliTest, Conformance) {
  const CliRun r = etr_cli({"conformance"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("PASS card-transcript"), std::string::npos);
  EXPECT_NE(r.out.find("PASS planets-prediction"), std::string::npos);
  EXPECT_NE(r.out.find("PASS psychic-original-order"), std::string::npos);
  EXPECT_NE(r.out.find("PASS biotech-reversed-order"), std::string::npos);
}

TEST_F(CliTest, Predict) {
  const CliRun r = etr_cli({"predict", "{R(x())}^{Q(x())}", "{Q(x())}"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "{Q(x())R(x())}");
  EXPECT_NE(r.out.find("update["), std::string::npos);
  EXPECT_EQ(etr_cli({"predict", "--no-trace", "{P(a())}", "{Q(a())}"}).out, "{P(a())Q(a())}\n");
}

TEST_F(CliTest, GenerateRenderJudge) {
  ASSERT_EQ(etr_cli({"generate", "--n", "6", "--seed", "3", "--out", file("a.jsonl")}).status, 0);
  ASSERT_EQ(etr_cli({"generate", "--n", "6", "--seed", "3", "--out", file("b.jsonl")}).status, 0);
  EXPECT_EQ(line_count(file("a.jsonl")), 6u);
  EXPECT_EQ(slurp(file("a.jsonl")), slurp(file("b.jsonl")));

  const auto problems = read_problems(file("a.jsonl"));
  const Problem& p = problems.front();
  const ThemeMapping m = assign_theme(p);
  const CliRun one = etr_cli({"render", "--problems", file("a.jsonl"), "--id", p.id});
  EXPECT_EQ(one.status, 0);
  EXPECT_EQ(one.out, render_prompt(p, m) + "\n");
  const CliRun all = etr_cli({"render", "--problems", file("a.jsonl"), "--reversed"});
  EXPECT_EQ(all.status, 0);
  EXPECT_EQ(std::count(all.out.begin(), all.out.end(), '\n'), 6);

  const std::string fallacy = "Answer: From the premises, we can conclude that " + render_clause(p.predicted, m) + ".";
  const CliRun judged = etr_cli({"judge", "--problems", file("a.jsonl"), "--id", p.id, "--answer", fallacy});
  EXPECT_EQ(judged.status, 0);
  const auto j = nlohmann::json::parse(judged.out);
  EXPECT_TRUE(j["verdict"]["human_like_fallacy"].get<bool>());
  const CliRun nothing = etr_cli({"judge", "--problems", file("a.jsonl"), "--id", p.id, "--answer", "Answer: nothing follows"});
  EXPECT_EQ(nlohmann::json::parse(nothing.out)["answer"], "nothing-follows");
  EXPECT_EQ(etr_cli({"judge", "--problems", file("a.jsonl"), "--id", p.id, "--answer", "Answer: cheese"}).status, 1);
  EXPECT_EQ(etr_cli({"judge", "--problems", file("a.jsonl"), "--id", "nope", "--answer", "x"}).status, 1);
}

TEST_F(CliTest, Analyze) {
  const auto problems = generate_problems(GenConfig{}, 8);
  {
    std::ofstream out(file("p.jsonl"));
    write_problems(out, problems);
  }
  auto stub = std::make_shared<ScriptedEndpoint>();
  for (const auto& p : problems) {
    const ThemeMapping m = assign_theme(p);
    stub->script(render_prompt(p, m),
                 "Answer: From the premises, we can conclude that " + render_clause(p.predicted, m) + ".");
  }
  SuiteConfig cfg;
  cfg.store_path = file("run.jsonl");
  ModelSpec spec = ModelSpec::parse("stub/a");
  run_suite({spec}, problems, cfg, [&](const ModelSpec&) { return stub; });

  std::ofstream(file("caps.csv")) << "model_id,metric,value\na,elo,1200\n";
  const CliRun r = etr_cli({"analyze", "--store", file("run.jsonl"), "--problems", file("p.jsonl"), "--capabilities",
                         file("caps.csv"), "--out", file("report")});
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(fs::exists(file("report/summary.csv")));
  EXPECT_TRUE(fs::exists(file("report/exclusions.json")));
  const auto results = nlohmann::json::parse(slurp(file("report/results.json")));
  EXPECT_EQ(results["models"][0]["fallacy_rate"], 1.0);
  EXPECT_EQ(results["reversal"][0]["blocked_fraction"], 1.0);
  EXPECT_TRUE(results["prompt_hash_mismatches"].empty());
  EXPECT_EQ(etr_cli({"analyze", "--store", file("none.jsonl")}).status, 2);
}
