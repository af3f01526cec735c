// Classical first-order formulas and the translation of views into them.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "etr/view.hpp"

namespace etr {

enum class FormulaKind { truth, falsity, atom, negation, conjunction, disjunction, implication, forall, exists };

struct Formula {
  FormulaKind kind = FormulaKind::truth;
  std::string name;  // predicate for atoms, bound variable for quantifiers
  std::vector<Term> args;
  std::vector<Formula> children;

  static Formula top() { return {}; }
  static Formula bottom() { return {FormulaKind::falsity, {}, {}, {}}; }
  static Formula atom(std::string predicate, std::vector<Term> args) {
    return {FormulaKind::atom, std::move(predicate), std::move(args), {}};
  }
  static Formula negation(Formula f) { return {FormulaKind::negation, {}, {}, {std::move(f)}}; }
  static Formula conjunction(std::vector<Formula> fs) {
    if (fs.empty()) return top();
    if (fs.size() == 1) return std::move(fs.front());
    return {FormulaKind::conjunction, {}, {}, std::move(fs)};
  }
  static Formula disjunction(std::vector<Formula> fs) {
    if (fs.empty()) return bottom();
    if (fs.size() == 1) return std::move(fs.front());
    return {FormulaKind::disjunction, {}, {}, std::move(fs)};
  }
  static Formula implication(Formula a, Formula b) {
    return {FormulaKind::implication, {}, {}, {std::move(a), std::move(b)}};
  }
  static Formula forall(std::string var, Formula body) {
    return {FormulaKind::forall, std::move(var), {}, {std::move(body)}};
  }
  static Formula exists(std::string var, Formula body) {
    return {FormulaKind::exists, std::move(var), {}, {std::move(body)}};
  }

  std::string str() const {
    auto join = [&](const char* op) {
      std::string out = "(";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += op;
        out += children[i].str();
      }
      return out + ")";
    };
    switch (kind) {
      case FormulaKind::truth: return "⊤";
      case FormulaKind::falsity: return "⊥";
      case FormulaKind::atom: {
        std::string out = name + "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) out += ",";
          out += args[i].str();
        }
        return out + ")";
      }
      case FormulaKind::negation: return "¬" + children[0].str();
      case FormulaKind::conjunction: return join(" ∧ ");
      case FormulaKind::disjunction: return join(" ∨ ");
      case FormulaKind::implication: return "(" + children[0].str() + " → " + children[1].str() + ")";
      case FormulaKind::forall: return "∀" + name + " " + children[0].str();
      case FormulaKind::exists: return "∃" + name + " " + children[0].str();
    }
    return "";
  }
};

namespace detail {

inline Formula states_formula(const std::vector<State>& states) {
  std::vector<Formula> disjuncts;
  for (const auto& s : states) {
    std::vector<Formula> conj;
    for (const auto& l : s) {
      Formula a = Formula::atom(l.predicate, l.args);
      conj.push_back(l.negated ? Formula::negation(std::move(a)) : std::move(a));
    }
    disjuncts.push_back(Formula::conjunction(std::move(conj)));
  }
  return Formula::disjunction(std::move(disjuncts));
}

}  // namespace detail

/// Classical reading of a view: prefix (supposition -> stage). Issue flags
/// carry no logical content and are dropped.
inline Formula to_classical(const View& v) {
  Formula body = detail::states_formula(v.stage());
  if (!v.has_verum_supposition()) body = Formula::implication(detail::states_formula(v.supposition()), std::move(body));
  for (auto it = v.prefix().rbegin(); it != v.prefix().rend(); ++it)
    body = it->quantifier == Quantifier::universal ? Formula::forall(it->name, std::move(body))
                                                   : Formula::exists(it->name, std::move(body));
  return body;
}

inline std::vector<Formula> to_classical(const std::vector<View>& views) {
  std::vector<Formula> out;
  for (const auto& v : views) out.push_back(to_classical(v));
  return out;
}

}  // namespace etr
