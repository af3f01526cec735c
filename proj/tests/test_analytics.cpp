#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "etr/analytics.hpp"

using namespace etr;

namespace {

RunRecord judged(const std::string& model, const std::string& id, Order order, bool correct, bool predicted) {
  RunRecord r;
  r.model = model;
  r.problem_id = id;
  r.order = order;
  r.answer = AnswerStatus::parsed;
  r.verdict = Verdict{correct, predicted, predicted && !correct, JudgeMode::endorsement};
  return r;
}

RunRecord unparsed(const std::string& model, const std::string& id, Order order) {
  RunRecord r;
  r.model = model;
  r.problem_id = id;
  r.order = order;
  r.answer = AnswerStatus::parse_error;
  return r;
}

// Ten problems: fallacies on p0..p5 in original order, p0..p3 blocked when reversed.
std::vector<RunRecord> reversal_fixture() {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "p" + std::to_string(i);
    rs.push_back(judged("m", id, Order::original, i >= 6, i < 6));
    rs.push_back(judged("m", id, Order::reversed, i < 4 || i >= 6, i == 4 || i == 5));
  }
  return rs;
}

}  // namespace

TEST(FallacyRate, CountsOverIncorrectAnswers) {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 4; ++i) rs.push_back(judged("m", "c" + std::to_string(i), Order::original, true, i % 2 == 0));
  for (int i = 0; i < 6; ++i) rs.push_back(judged("m", "w" + std::to_string(i), Order::original, false, i < 3));
  rs.push_back(unparsed("m", "u", Order::original));
  EXPECT_DOUBLE_EQ(fallacy_rate(rs), 0.5);

  std::vector<RunRecord> all_correct = {judged("m", "a", Order::original, true, true)};
  EXPECT_THROW(fallacy_rate(all_correct), UndefinedRate);
  EXPECT_THROW(fallacy_rate({}), UndefinedRate);

  RunRecord broken = judged("m", "b", Order::original, false, true);
  broken.verdict->human_like_fallacy = false;
  EXPECT_THROW(fallacy_rate({broken}), StatsError);
}

TEST(ModelStats, PerModelAndOrder) {
  std::vector<RunRecord> rs = reversal_fixture();
  rs.push_back(judged("other", "p0", Order::original, true, false));
  const auto stats = model_stats(rs);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].model, "m");
  EXPECT_EQ(stats[0].n_answered, 10u);
  EXPECT_EQ(stats[0].n_incorrect, 6u);
  EXPECT_EQ(stats[0].n_fallacy, 6u);
  EXPECT_DOUBLE_EQ(*stats[0].fallacy_rate, 1.0);
  EXPECT_DOUBLE_EQ(stats[0].correctness_rate, 0.4);
  EXPECT_FALSE(stats[1].fallacy_rate.has_value());

  const auto rev = model_stats(rs, Order::reversed);
  ASSERT_EQ(rev.size(), 1u);
  EXPECT_EQ(rev[0].n_fallacy, 2u);
}

TEST(Reversal, BlockedFractionAndTest) {
  const auto rows = reversal_effect(reversal_fixture());
  ASSERT_EQ(rows.size(), 1u);
  const ReversalRow& r = rows[0];
  EXPECT_EQ(r.original_fallacies, 6u);
  EXPECT_EQ(r.blocked, 4u);
  EXPECT_DOUBLE_EQ(r.blocked_fraction, 4.0 / 6.0);
  EXPECT_EQ(r.fallacies_original, 6u);
  EXPECT_EQ(r.fallacies_reversed, 2u);
  const ZTest z = two_proportion_z(6, 10, 2, 10);
  EXPECT_DOUBLE_EQ(r.test.z, z.z);
  EXPECT_DOUBLE_EQ(r.test.p, z.p);
  EXPECT_NEAR(r.test.z, 1.8257, 1e-4);

  const auto one = reversal_effect(reversal_fixture(), false);
  EXPECT_NEAR(one[0].test.p, z.p / 2.0, 1e-12);
}

TEST(Reversal, UnpairedModelsAreSkipped) {
  std::vector<RunRecord> rs = {judged("solo", "p0", Order::original, false, true)};
  EXPECT_TRUE(reversal_effect(rs).empty());
}

TEST(AnalyticsProperty, PermutationInvariant) {
  std::vector<RunRecord> rs = reversal_fixture();
  for (int i = 0; i < 12; ++i)
    rs.push_back(judged("n", "q" + std::to_string(i), i % 2 ? Order::original : Order::reversed, i % 3 == 0, i % 4 < 2));
  const double rate = fallacy_rate(rs);
  const auto rows = reversal_effect(rs);
  Rng rng(17);
  for (int round = 0; round < 50; ++round) {
    rng.shuffle(rs);
    EXPECT_DOUBLE_EQ(fallacy_rate(rs), rate);
    const auto again = reversal_effect(rs);
    ASSERT_EQ(again.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(again[i].blocked, rows[i].blocked);
      EXPECT_DOUBLE_EQ(again[i].test.z, rows[i].test.z);
    }
  }
}

TEST(CapabilityTable, ParsesAndLooksUp) {
  std::istringstream in(
      "model_id,metric,value\n# comment\nclaude-3-opus,elo,1247\nclaude-3-opus,blocked_pct,33.3\n\nphi,elo,1000\n");
  const CapabilityTable t = CapabilityTable::parse(in);
  EXPECT_EQ(t.models(), (std::vector<std::string>{"claude-3-opus", "phi"}));
  EXPECT_DOUBLE_EQ(*t.value("anthropic/claude-3-opus", "elo"), 1247.0);
  EXPECT_DOUBLE_EQ(*t.value("claude-3-opus", "blocked_pct"), 33.3);
  EXPECT_FALSE(t.value("phi", "blocked_pct").has_value());

  std::istringstream bad("a,b\n");
  EXPECT_THROW(CapabilityTable::parse(bad), std::invalid_argument);
  std::istringstream nan("a,elo,high\n");
  EXPECT_THROW(CapabilityTable::parse(nan), std::invalid_argument);
  std::istringstream dup("a,elo,1\na,elo,2\n");
  EXPECT_THROW(CapabilityTable::parse(dup), std::invalid_argument);
}

// Reference values computed independently with scipy.stats on the same file.
TEST(Correlate, CapabilityFixture) {
  const CapabilityTable t = CapabilityTable::load(std::string(ETR_TEST_DATA) + "/table3_capabilities.csv");
  const CorrelationReport c = correlate_metrics(t, "elo", "blocked_pct");
  EXPECT_EQ(c.xs.size(), 38u);
  EXPECT_NEAR(c.spearman_rho.r, -0.0895212040, 1e-9);
  EXPECT_NEAR(c.spearman_rho.p, 0.5930050201, 1e-8);
  EXPECT_NEAR(c.pearson_r.r, -0.1336808362, 1e-9);
  EXPECT_NEAR(c.pearson_r.p, 0.4236314539, 1e-8);
  ASSERT_TRUE(c.fit.has_value());
  const auto j = to_json(c);
  EXPECT_EQ(j["points"].size(), 38u);
}

TEST(Correlate, FallacyRateAgainstMetric) {
  CapabilityTable t;
  std::vector<ModelStats> stats;
  for (int i = 0; i < 5; ++i) {
    ModelStats s;
    s.model = "prov/m" + std::to_string(i);
    s.fallacy_rate = 0.1 * (i + 1);
    stats.push_back(s);
    t.add("m" + std::to_string(i), "elo", 1000 + 50 * i);
  }
  stats.push_back(ModelStats{"prov/none"});
  const CorrelationReport c = correlate_fallacy_rate(stats, t, "elo");
  EXPECT_EQ(c.models.size(), 5u);
  EXPECT_NEAR(c.pearson_r.r, 1.0, 1e-12);
  EXPECT_NEAR(c.spearman_rho.r, 1.0, 1e-12);
}

TEST(Outputs, CsvJsonAndSvg) {
  const auto rs = reversal_fixture();
  const auto stats = model_stats(rs);
  const auto rows = reversal_effect(rs);
  std::ostringstream csv;
  write_summary_csv(csv, stats, rows);
  EXPECT_EQ(csv.str(),
            "model,n_answered,n_incorrect,n_fallacy,fallacy_rate,correctness_rate,blocked_fraction,z,p\n"
            "m,10,6,6,1,0.4,0.666667," +
                format_double(rows[0].test.z) + "," + format_double(rows[0].test.p) + "\n");

  const auto j = results_json(stats, rows, exclusion_report(rs));
  EXPECT_EQ(j["models"][0]["n_fallacy"], 6);
  EXPECT_EQ(j["reversal"][0]["blocked"], 4);
  EXPECT_EQ(j["exclusions"]["threshold"], 0.2);

  const CorrelationReport c = correlate("elo", "rate", {"a<b", "c&d", "e"}, {1, 2, 3}, {0.1, 0.4, 0.2});
  const std::string svg = scatter_svg(c, "Rate vs \"elo\"");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("c&amp;d"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  std::size_t circles = 0;
  for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  EXPECT_EQ(circles, 3u);
}
