#include <gtest/gtest.h>

#include "etr/judge.hpp"
#include "etr/stub_endpoint.hpp"
#include "etr/translate.hpp"

using namespace etr;

namespace {

struct Example {
  std::vector<View> premises;
  View predicted;
  ThemeMapping mapping;
};

Example planets() {
  Example e;
  e.premises = {parse_view("{~visibleToTheNakedEye(moon2()),visibleToTheNakedEye(moon2())}"),
                parse_view("{visibleToTheNakedEye(asteroidB()),visibleToTheNakedEye(moon2())}")};
  e.predicted = parse_view("{visibleToTheNakedEye(moon2())}");
  e.mapping = mapping_by_name(e.premises, find_theme("Planets"));
  return e;
}

Example materials() {
  Example e;
  e.premises = {parse_view("{~radioactive(darkonium()),radioactive(darkonium())}"),
                parse_view("{electricallyInsulating(voidite()),~radioactive(darkonium())~selfRepairing(voidite())}"),
                parse_view("∃x {selfRepairing(x)}"),
                parse_view("{selfRepairing(voidite())~radioactive(voidite())}"),
                parse_view("{~electricallyInsulating(voidite()),corrosive(voidite())electricallyInsulating(voidite())}")};
  e.predicted = parse_view("{~radioactive(darkonium())electricallyInsulating(voidite())corrosive(voidite())}");
  e.mapping = mapping_by_name(e.premises, find_theme("Elements"));
  return e;
}

Example biotech_reversed() {
  Example e;
  e.premises = {parse_view("{swarmForming(nanohive()),~swarmForming(nanohive())}"),
                parse_view("{swarmForming(nanohive()),quantumComputing(chronoplast())}")};
  e.predicted = parse_view("{swarmForming(nanohive())}");
  e.mapping = mapping_by_name(e.premises, find_theme("Biotech organisms"));
  return e;
}

const std::vector<Problem>& corpus() {
  static const std::vector<Problem> problems = generate_problems(GenConfig{}, 120);
  return problems;
}

}  // namespace

TEST(ParseAnswer, PlanetsFallacyIsJudgedHumanLike) {
  const Example e = planets();
  const ParsedAnswer a =
      parse_answer("Answer: From the premises, we can conclude that moon 2 is visible to the naked eye.", e.mapping);
  ASSERT_EQ(a.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*a.conclusion, e.predicted));
  for (JudgeMode mode : {JudgeMode::endorsement, JudgeMode::exact, JudgeMode::equivalence}) {
    const Verdict v = judge_response(e.premises, e.predicted, a, mode);
    EXPECT_FALSE(v.logically_correct);
    EXPECT_TRUE(v.etr_predicted) << to_string(mode);
    EXPECT_TRUE(v.human_like_fallacy) << to_string(mode);
  }
}

TEST(ParseAnswer, MaterialsAnswerIsInvalid) {
  const Example e = materials();
  const ParsedAnswer a = parse_answer(
      "Answer: From the premises, we can conclude that darkonium is not radioactive.\nExplanation:\n1. From the third "
      "premise, we know there exists some X that is self-repairing.",
      e.mapping);
  ASSERT_EQ(a.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*a.conclusion, parse_view("{~radioactive(darkonium())}")));
  const Verdict exact = judge_response(e.premises, e.predicted, a, JudgeMode::exact);
  EXPECT_FALSE(exact.logically_correct);
  EXPECT_FALSE(exact.etr_predicted);
}

TEST(ParseAnswer, ReversedOrderNothingFollows) {
  const Example e = biotech_reversed();
  const ParsedAnswer a = parse_answer(
      "Answer: From the premises, we cannot definitively conclude anything about whether nanohive is swarm-forming "
      "or not.",
      e.mapping);
  EXPECT_EQ(a.status, AnswerStatus::nothing_follows);
  EXPECT_TRUE(a.effective().is_verum());
  const Verdict v = judge_response(e.premises, e.predicted, a);
  EXPECT_TRUE(v.logically_correct);
  EXPECT_FALSE(v.etr_predicted);
  EXPECT_FALSE(v.human_like_fallacy);
}

TEST(ParseAnswer, Variants) {
  const Example e = planets();
  EXPECT_EQ(parse_answer("Answer: From the premises, nothing follows.", e.mapping).status,
            AnswerStatus::nothing_follows);
  EXPECT_EQ(parse_answer("answer: nothing follows", e.mapping).status, AnswerStatus::nothing_follows);
  EXPECT_EQ(parse_answer("", e.mapping).status, AnswerStatus::parse_error);
  EXPECT_EQ(parse_answer("Answer: From the premises, we can conclude that the moon is made of cheese.", e.mapping).status,
            AnswerStatus::parse_error);
  const ParsedAnswer bare = parse_answer("Moon 2 is visible to the naked eye", e.mapping);
  ASSERT_EQ(bare.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*bare.conclusion, e.predicted));
  const ParsedAnswer either = parse_answer(
      "Answer: From the premises, we can conclude that either asteroid B is visible to the naked eye, or moon 2 is "
      "visible to the naked eye.",
      e.mapping);
  ASSERT_EQ(either.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*either.conclusion, e.premises[1]));
}

TEST(ParseAnswer, ExistentialAnswer) {
  const Example e = materials();
  const ParsedAnswer a =
      parse_answer("Answer: From the premises, we can conclude that there is some X such that X is self-repairing.",
                   e.mapping);
  ASSERT_EQ(a.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*a.conclusion, e.premises[2]));
}

TEST(JudgeResponse, RejectsParseErrors) {
  const Example e = planets();
  ParsedAnswer a;
  EXPECT_THROW(judge_response(e.premises, e.predicted, a), std::invalid_argument);
}

TEST(JudgeResponse, PremiseRestatedIsCorrect) {
  for (const auto& p : corpus()) {
    const ThemeMapping m = assign_theme(p);
    const ParsedAnswer a = parse_answer("Answer: From the premises, we can conclude that " +
                                            render_clause(p.premises.front(), m) + ".",
                                        m);
    ASSERT_EQ(a.status, AnswerStatus::parsed) << a.error;
    const Verdict v = judge_response(p, a, JudgeMode::equivalence);
    EXPECT_TRUE(v.logically_correct) << p.id;
    EXPECT_FALSE(v.human_like_fallacy) << p.id;
  }
}

// Answering with the predicted conclusion is a human-like fallacy in every mode.
TEST(JudgeProperty, PredictedAnswerAcrossModes) {
  for (const auto& p : corpus()) {
    const ThemeMapping m = assign_theme(p);
    const ParsedAnswer a = parse_answer("Answer: From the premises, we can conclude that " +
                                            render_clause(p.predicted, m) + ".",
                                        m);
    ASSERT_EQ(a.status, AnswerStatus::parsed) << a.error;
    const Verdict ex = judge_response(p, a, JudgeMode::exact);
    const Verdict eq = judge_response(p, a, JudgeMode::equivalence);
    const Verdict en = judge_response(p, a, JudgeMode::endorsement);
    EXPECT_TRUE(ex.etr_predicted) << p.id;
    EXPECT_TRUE(eq.etr_predicted) << p.id;
    EXPECT_TRUE(en.etr_predicted) << p.id;
    EXPECT_FALSE(ex.logically_correct) << p.id;
    EXPECT_TRUE(ex.human_like_fallacy && eq.human_like_fallacy && en.human_like_fallacy) << p.id;
  }
}

// Exact matching implies equivalence; both only ever agree on logical correctness.
TEST(JudgeProperty, ExactImpliesEquivalence) {
  const auto& ps = corpus();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Problem& p = ps[i];
    const Problem& other = ps[(i + 1) % ps.size()];
    for (const View& c : {p.predicted, other.predicted, p.premises.back()}) {
      ParsedAnswer a;
      a.status = AnswerStatus::parsed;
      a.conclusion = c;
      const Verdict ex = judge_response(p, a, JudgeMode::exact);
      const Verdict eq = judge_response(p, a, JudgeMode::equivalence);
      if (ex.etr_predicted) EXPECT_TRUE(eq.etr_predicted) << p.id;
      EXPECT_EQ(ex.logically_correct, eq.logically_correct);
    }
  }
}

TEST(Translate, ConstrainedAnswersPassThrough) {
  ScriptedEndpoint stub;
  const Translation t = translate_freeform("Answer: From the premises, nothing follows.", stub, {});
  EXPECT_TRUE(t.ok);
  EXPECT_TRUE(t.passthrough);
  EXPECT_EQ(stub.calls(), 0);
}

TEST(Translate, FreeformIsRewrittenWithoutPremises) {
  const Example e = planets();
  const std::string freeform = "Well, looking at this, I'd say moon 2 must be visible to the naked eye.";
  ScriptedEndpoint stub;
  stub.script(translator_instructions() + freeform,
              "Answer: From the premises, we can conclude that moon 2 is visible to the naked eye.");
  TranslationConfig cfg;
  cfg.model = "translator";
  const Translation t = translate_freeform(freeform, stub, cfg);
  ASSERT_TRUE(t.ok);
  EXPECT_FALSE(t.passthrough);
  EXPECT_EQ(stub.calls(), 1);
  const ParsedAnswer a = parse_answer(t.text, e.mapping);
  ASSERT_EQ(a.status, AnswerStatus::parsed);
  EXPECT_TRUE(alpha_equal(*a.conclusion, e.predicted));
  EXPECT_EQ(translator_instructions().find("asteroid"), std::string::npos);
}

TEST(Translate, FailuresAreReported) {
  ScriptedEndpoint stub("");
  EXPECT_FALSE(translate_freeform("", stub, {}).ok);
  const Translation empty = translate_freeform("free text", stub, {});
  EXPECT_FALSE(empty.ok);
  EXPECT_FALSE(empty.error.empty());

  ScriptedEndpoint flaky("Answer: From the premises, nothing follows.");
  flaky.fail_next(2);
  const Translation t = translate_freeform("free text", flaky, {});
  EXPECT_TRUE(t.ok);
  EXPECT_EQ(t.attempts, 3);
  flaky.fail_next(5);
  EXPECT_FALSE(translate_freeform("free text", flaky, {}).ok);
}
