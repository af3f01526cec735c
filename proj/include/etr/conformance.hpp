// Gold vectors for the engine and oracle: the card transcript, the seed-bank
// rows and the worked model-trace examples.
#pragma once

#include <string>
#include <vector>

#include "etr/engine.hpp"
#include "etr/oracle.hpp"
#include "etr/problem.hpp"

namespace etr {

struct ConformanceResult {
  std::string name;
  bool pass = false;
  bool extended = false;  // reported, but not a hard requirement
  std::string detail;
};

namespace detail {

inline std::vector<View> parse_all(const std::vector<std::string>& texts) {
  std::vector<View> out;
  for (const auto& t : texts) out.push_back(parse_view(t));
  return out;
}

inline ConformanceResult prediction_vector(std::string name, const std::vector<std::string>& premises,
                                           const std::string& expected, bool extended = false) {
  ConformanceResult r;
  r.name = std::move(name);
  r.extended = extended;
  InferenceTrace trace;
  const View got = what_follows(parse_all(premises), &trace);
  r.pass = alpha_equal(got, parse_view(expected)) && replay(trace);
  r.detail = "expected " + expected + ", got " + print_view(got);
  if (!r.pass) r.detail += "\n" + format_trace(trace);
  return r;
}

}  // namespace detail

inline ConformanceResult card_conformance() {
  const View p1 = parse_view("∃a ∃b ∃c ∃d ∃e ∃f {Ace(a*)Has(Mary(),a)Has(c,b)King(b*),Has(John(),d)Has(f,e)Jack(e)Queen(d)}");
  const View p2 = parse_view("∃g {King(g*)Has(Sally(),g)}");
  const View q = parse_view("∃h {Ace(h*)Has(Mary(),h)}");
  const View expected = parse_view("∃g ∃l ∃m {Ace(l*)Has(Mary(),l)Has(Sally(),g)Has(m,g)King(g*)}");
  ConformanceResult r;
  r.name = "card-transcript";
  const View u = update(p1, p2);
  const bool merged = alpha_equal(u, expected);
  const bool queried = alpha_equal(query(u, q), q);
  const bool follows = does_it_follow({p1, p2}, q);
  r.pass = merged && queried && follows;
  r.detail = "update " + print_view(u) + (merged ? "" : " (mismatch)") + "; query " + (queried ? "ok" : "mismatch") +
             "; does_it_follow " + (follows ? "true" : "false");
  return r;
}

/// Seed-bank rows: the valid templates must be entailed, the disjunction
/// fallacy must be ETR-endorsed yet invalid.
inline std::vector<ConformanceResult> seed_bank_conformance(const OracleConfig& cfg = {}) {
  std::vector<ConformanceResult> out;
  for (const auto& t : seed_bank()) {
    ConformanceResult r;
    r.name = "seed-" + t.name;
    const bool valid = entails(t.premises, t.conclusion, cfg);
    const bool endorsed = does_it_follow(t.premises, t.conclusion);
    const bool fallacy = t.name == "disjunction-fallacy";
    r.pass = fallacy ? (!valid && endorsed) : valid;
    r.detail = std::string("entailed ") + (valid ? "true" : "false") + ", endorsed " + (endorsed ? "true" : "false");
    out.push_back(r);
  }
  return out;
}

inline std::vector<ConformanceResult> prediction_conformance() {
  return {
      detail::prediction_vector("planets-prediction",
                                {"{~visibleToTheNakedEye(moon2()),visibleToTheNakedEye(moon2())}",
                                 "{visibleToTheNakedEye(asteroidB()),visibleToTheNakedEye(moon2())}"},
                                "{visibleToTheNakedEye(moon2())}"),
      detail::prediction_vector("psychic-original-order",
                                {"{matterMoving(realityWarping()),spaceBending(precognition())}",
                                 "{matterMoving(realityWarping()),~matterMoving(realityWarping())}"},
                                "{matterMoving(realityWarping())}"),
      detail::prediction_vector("biotech-reversed-order",
                                {"{swarmForming(nanohive()),~swarmForming(nanohive())}",
                                 "{swarmForming(nanohive()),quantumComputing(chronoplast())}"},
                                "{swarmForming(nanohive())}"),
      detail::prediction_vector(
          "materials-five-premises",
          {"{~radioactive(darkonium()),radioactive(darkonium())}",
           "{electricallyInsulating(voidite()),~radioactive(darkonium())~selfRepairing(voidite())}",
           "∃x {selfRepairing(x)}", "{selfRepairing(voidite())~radioactive(voidite())}",
           "{~electricallyInsulating(voidite()),corrosive(voidite())electricallyInsulating(voidite())}"},
          "{~radioactive(darkonium())electricallyInsulating(voidite())corrosive(voidite())}", true),
  };
}

inline std::vector<ConformanceResult> run_conformance(const OracleConfig& cfg = {}) {
  std::vector<ConformanceResult> out = {card_conformance()};
  for (auto& r : prediction_conformance()) out.push_back(std::move(r));
  for (auto& r : seed_bank_conformance(cfg)) out.push_back(std::move(r));
  return out;
}

}  // namespace etr
