// Reference entailment by exhaustive model enumeration, sharing no code with
// the SAT-based oracle. A monadic model can be collapsed so that no two
// elements agree on every predicate without changing the truth of any
// formula, so it suffices to enumerate every nonempty set of predicate
// combinations (one element each, at most 2^k of them) together with every
// placement of the constants.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "etr/formula.hpp"

namespace reference {

using etr::Formula;
using etr::FormulaKind;
using etr::Term;

struct Model {
  std::vector<unsigned> types;  // element -> bitmask over predicate index
  std::map<std::string, std::size_t> constants;
  const std::vector<std::string>* preds = nullptr;
};

inline bool holds(const Formula& f, const Model& m, std::map<std::string, std::size_t>& env) {
  switch (f.kind) {
    case FormulaKind::truth: return true;
    case FormulaKind::falsity: return false;
    case FormulaKind::atom: {
      const Term& t = f.args.at(0);
      const std::size_t e = t.constant ? m.constants.at(t.name) : env.at(t.name);
      std::size_t bit = 0;
      while ((*m.preds)[bit] != f.name) ++bit;
      return (m.types[e] >> bit) & 1U;
    }
    case FormulaKind::negation: return !holds(f.children[0], m, env);
    case FormulaKind::conjunction: {
      bool all = true;
      for (const auto& c : f.children) all = all && holds(c, m, env);
      return all;
    }
    case FormulaKind::disjunction: {
      bool any = false;
      for (const auto& c : f.children) any = any || holds(c, m, env);
      return any;
    }
    case FormulaKind::implication: return !holds(f.children[0], m, env) || holds(f.children[1], m, env);
    case FormulaKind::forall:
    case FormulaKind::exists: {
      const bool universal = f.kind == FormulaKind::forall;
      const auto saved = env.find(f.name) == env.end() ? std::optional<std::size_t>{} : env[f.name];
      bool result = universal;
      for (std::size_t e = 0; e < m.types.size(); ++e) {
        env[f.name] = e;
        if (holds(f.children[0], m, env) != universal) {
          result = !universal;
          break;
        }
      }
      if (saved)
        env[f.name] = *saved;
      else
        env.erase(f.name);
      return result;
    }
  }
  return false;
}

inline void symbols(const Formula& f, std::set<std::string>& preds, std::set<std::string>& consts) {
  if (f.kind == FormulaKind::atom) {
    preds.insert(f.name);
    for (const auto& t : f.args)
      if (t.constant) consts.insert(t.name);
  }
  for (const auto& c : f.children) symbols(c, preds, consts);
}

inline bool satisfiable_by_enumeration(const std::vector<Formula>& fs) {
  std::set<std::string> ps, cs;
  for (const auto& f : fs) symbols(f, ps, cs);
  const std::vector<std::string> preds(ps.begin(), ps.end());
  const std::vector<std::string> consts(cs.begin(), cs.end());
  const unsigned ntypes = 1U << preds.size();
  for (unsigned long set = 1; set < (1UL << ntypes); ++set) {
    Model m;
    m.preds = &preds;
    for (unsigned t = 0; t < ntypes; ++t)
      if ((set >> t) & 1UL) m.types.push_back(t);
    const std::size_t n = m.types.size();
    std::size_t placements = 1;
    for (std::size_t i = 0; i < consts.size(); ++i) placements *= n;
    for (std::size_t code = 0; code < placements; ++code) {
      std::size_t rest = code;
      for (const auto& c : consts) {
        m.constants[c] = rest % n;
        rest /= n;
      }
      bool all = true;
      for (const auto& f : fs) {
        std::map<std::string, std::size_t> env;
        if (!holds(f, m, env)) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
  }
  return false;
}

inline bool entails_by_enumeration(const std::vector<Formula>& premises, const Formula& conclusion) {
  std::vector<Formula> all = premises;
  all.push_back(Formula::negation(conclusion));
  return !satisfiable_by_enumeration(all);
}

struct Instance {
  std::vector<Formula> premises;
  Formula conclusion;
};

/// Random closed monadic formula over at most 3 predicates, 2 constants and
/// 2 quantified variables.
inline Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& preds, int depth,
                              std::vector<std::string> bound) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int r = depth <= 0 ? 0 : pick(rng);
  if (r <= 2) {
    std::vector<Term> terms = {Term::make_constant("a"), Term::make_constant("b")};
    for (const auto& v : bound) {
      terms.push_back(Term::make_variable(v));
      terms.push_back(Term::make_variable(v));
    }
    return Formula::atom(preds[rng() % preds.size()], {terms[rng() % terms.size()]});
  }
  if (r == 3) return Formula::negation(random_formula(rng, preds, depth - 1, bound));
  if (r == 4 || r == 5) {
    auto a = random_formula(rng, preds, depth - 1, bound);
    auto b = random_formula(rng, preds, depth - 1, bound);
    return r == 4 ? Formula::conjunction({a, b}) : Formula::disjunction({a, b});
  }
  if (r == 6)
    return Formula::implication(random_formula(rng, preds, depth - 1, bound),
                                random_formula(rng, preds, depth - 1, bound));
  std::vector<std::string> free_vars;
  for (const char* v : {"x", "y"})
    if (std::find(bound.begin(), bound.end(), v) == bound.end()) free_vars.push_back(v);
  if (free_vars.empty()) return Formula::negation(random_formula(rng, preds, depth - 1, bound));
  const std::string v = free_vars[rng() % free_vars.size()];
  bound.push_back(v);
  auto body = random_formula(rng, preds, depth - 1, bound);
  return r <= 7 ? Formula::forall(v, body) : Formula::exists(v, body);
}

inline Instance random_instance(std::mt19937_64& rng) {
  const std::vector<std::string> all = {"P", "Q", "R"};
  std::vector<std::string> preds(all.begin(), all.begin() + 1 + rng() % 3);
  Instance inst;
  const int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) inst.premises.push_back(random_formula(rng, preds, 3, {}));
  switch (rng() % 4) {
    case 0:  // weaken a premise
      inst.conclusion = Formula::disjunction({inst.premises[0], random_formula(rng, preds, 2, {})});
      break;
    case 1:
      inst.conclusion = Formula::negation(Formula::negation(inst.premises.back()));
      break;
    default:
      inst.conclusion = random_formula(rng, preds, 3, {});
  }
  return inst;
}

inline std::string describe(const Instance& inst) {
  std::string out;
  for (const auto& p : inst.premises) out += p.str() + " ; ";
  return out + "|= " + inst.conclusion.str();
}

}  // namespace reference
