// Entailment for the monadic, equality-free fragment.
//
// Quantifiers are pushed inward until every quantified subformula has the
// shape Ex(conjunction of literals over x). Such a formula only asks whether
// some element has a given combination of predicates, so satisfiability
// reduces to choosing which predicate combinations ("types") are realized
// and how the constants are typed. That choice is a propositional problem
// handed to the SAT solver; a satisfying assignment reads back as a model
// with one element per realized type.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/formula.hpp"
#include "etr/sat.hpp"

namespace etr {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the monadic fragment (or not closed).
class FragmentError : public OracleError {
 public:
  using OracleError::OracleError;
};

/// The configured domain cap is below the fragment's model-size bound.
class BoundExceeded : public OracleError {
 public:
  BoundExceeded(std::size_t bound, std::size_t cap)
      : OracleError("domain bound " + std::to_string(bound) + " exceeds cap " + std::to_string(cap)),
        bound(bound),
        cap(cap) {}
  std::size_t bound;
  std::size_t cap;
};

struct OracleConfig {
  std::size_t max_domain = 64;
};

struct FiniteModel {
  std::size_t domain_size = 0;
  std::map<std::string, std::set<std::size_t>> predicates;  // unary extensions
  std::map<std::string, bool> propositions;                 // nullary atoms
  std::map<std::string, std::size_t> constants;
};

/// Direct evaluation in a finite model; variables are looked up in `env`.
inline bool evaluate(const Formula& f, const FiniteModel& m, std::map<std::string, std::size_t> env = {}) {
  auto element = [&](const Term& t) -> std::size_t {
    if (t.constant) {
      auto it = m.constants.find(t.name);
      if (it == m.constants.end()) throw OracleError("constant not interpreted: " + t.name);
      return it->second;
    }
    auto it = env.find(t.name);
    if (it == env.end()) throw FragmentError("free variable: " + t.name);
    return it->second;
  };
  switch (f.kind) {
    case FormulaKind::truth: return true;
    case FormulaKind::falsity: return false;
    case FormulaKind::atom: {
      if (f.args.empty()) {
        auto it = m.propositions.find(f.name);
        return it != m.propositions.end() && it->second;
      }
      auto it = m.predicates.find(f.name);
      return it != m.predicates.end() && it->second.count(element(f.args[0]));
    }
    case FormulaKind::negation: return !evaluate(f.children[0], m, env);
    case FormulaKind::conjunction:
      for (const auto& c : f.children)
        if (!evaluate(c, m, env)) return false;
      return true;
    case FormulaKind::disjunction:
      for (const auto& c : f.children)
        if (evaluate(c, m, env)) return true;
      return false;
    case FormulaKind::implication: return !evaluate(f.children[0], m, env) || evaluate(f.children[1], m, env);
    case FormulaKind::forall:
    case FormulaKind::exists: {
      const bool universal = f.kind == FormulaKind::forall;
      for (std::size_t e = 0; e < m.domain_size; ++e) {
        env[f.name] = e;
        if (evaluate(f.children[0], m, env) != universal) return !universal;
      }
      return universal;
    }
  }
  return false;
}

namespace detail {

// Boolean skeleton over "items": ground atoms, atoms over a still-bound
// variable, and closed basic formulas Ex(conjunction of literals over x).
struct Item {
  enum Kind { atom, basic } kind = atom;
  std::string predicate;                            // atom
  std::optional<Term> arg;                          // atom (absent for nullary)
  std::vector<std::pair<std::string, bool>> lits;   // basic: (predicate, positive)
};

struct Skeleton {
  enum Kind { truth, falsity, item, negation, conjunction, disjunction } kind = truth;
  int id = -1;
  std::vector<Skeleton> children;
};

struct SkLit {
  int id;
  bool positive;
  friend bool operator<(const SkLit& a, const SkLit& b) {
    return a.id != b.id ? a.id < b.id : a.positive < b.positive;
  }
  friend bool operator==(const SkLit&, const SkLit&) = default;
};
using Conj = std::vector<SkLit>;  // sorted, consistent

class Reducer {
 public:
  std::vector<Item> items;

  int intern(const Item& it) {
    std::string key;
    if (it.kind == Item::atom) {
      key = "a:" + it.predicate + (it.arg ? "(" + it.arg->str() + ")" : "");
    } else {
      key = "b:";
      for (const auto& [p, pos] : it.lits) key += (pos ? "+" : "-") + p + ",";
    }
    auto [pos, fresh] = index_.emplace(key, static_cast<int>(items.size()));
    if (fresh) items.push_back(it);
    return pos->second;
  }

  Skeleton reduce(const Formula& f) {
    switch (f.kind) {
      case FormulaKind::truth: return {Skeleton::truth, -1, {}};
      case FormulaKind::falsity: return {Skeleton::falsity, -1, {}};
      case FormulaKind::atom: {
        if (f.args.size() > 1) throw FragmentError("predicate " + f.name + " is not unary");
        Item it;
        it.predicate = f.name;
        if (!f.args.empty()) it.arg = f.args[0];
        return {Skeleton::item, intern(it), {}};
      }
      case FormulaKind::negation: return {Skeleton::negation, -1, {reduce(f.children[0])}};
      case FormulaKind::conjunction:
      case FormulaKind::disjunction: {
        Skeleton s{f.kind == FormulaKind::conjunction ? Skeleton::conjunction : Skeleton::disjunction, -1, {}};
        for (const auto& c : f.children) s.children.push_back(reduce(c));
        return s;
      }
      case FormulaKind::implication:
        return {Skeleton::disjunction,
                -1,
                {{Skeleton::negation, -1, {reduce(f.children[0])}}, reduce(f.children[1])}};
      case FormulaKind::exists: return quantify(f.name, reduce(f.children[0]));
      case FormulaKind::forall: {
        Skeleton inner{Skeleton::negation, -1, {reduce(f.children[0])}};
        return {Skeleton::negation, -1, {quantify(f.name, std::move(inner))}};
      }
    }
    return {};
  }

 private:
  std::map<std::string, int> index_;

  // Disjunctive normal form of s (negated when `neg`), contradictory
  // disjuncts removed.
  std::vector<Conj> dnf(const Skeleton& s, bool neg) {
    switch (s.kind) {
      case Skeleton::truth: return neg ? std::vector<Conj>{} : std::vector<Conj>{Conj{}};
      case Skeleton::falsity: return neg ? std::vector<Conj>{Conj{}} : std::vector<Conj>{};
      case Skeleton::item: return {Conj{{s.id, !neg}}};
      case Skeleton::negation: return dnf(s.children[0], !neg);
      case Skeleton::conjunction:
      case Skeleton::disjunction: {
        const bool product = (s.kind == Skeleton::conjunction) != neg;
        if (!product) {
          std::vector<Conj> out;
          for (const auto& c : s.children) {
            auto d = dnf(c, neg);
            out.insert(out.end(), d.begin(), d.end());
          }
          return dedup(std::move(out));
        }
        std::vector<Conj> acc{Conj{}};
        for (const auto& c : s.children) {
          auto d = dnf(c, neg);
          std::vector<Conj> next;
          for (const auto& a : acc)
            for (const auto& b : d)
              if (auto m = merge(a, b)) next.push_back(std::move(*m));
          acc = dedup(std::move(next));
          if (acc.empty()) break;
        }
        return acc;
      }
    }
    return {};
  }

  static std::optional<Conj> merge(const Conj& a, const Conj& b) {
    Conj out = a;
    for (const auto& l : b) {
      bool present = false;
      for (const auto& o : out) {
        if (o.id == l.id && o.positive != l.positive) return std::nullopt;
        if (o == l) present = true;
      }
      if (!present) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  static std::vector<Conj> dedup(std::vector<Conj> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  // Ex body, with body already reduced: every disjunct splits into the
  // literals over x (which become one basic item) and the rest.
  Skeleton quantify(const std::string& var, const Skeleton& body) {
    Skeleton result{Skeleton::disjunction, -1, {}};
    for (const auto& conj : dnf(body, false)) {
      std::vector<std::pair<std::string, bool>> over_x;
      Skeleton rest{Skeleton::conjunction, -1, {}};
      for (const auto& l : conj) {
        const Item& it = items[l.id];
        if (it.kind == Item::atom && it.arg && it.arg->is_variable() && it.arg->name == var) {
          over_x.emplace_back(it.predicate, l.positive);
        } else {
          Skeleton leaf{Skeleton::item, l.id, {}};
          rest.children.push_back(l.positive ? leaf : Skeleton{Skeleton::negation, -1, {leaf}});
        }
      }
      if (!over_x.empty()) {
        std::sort(over_x.begin(), over_x.end());
        Item basic;
        basic.kind = Item::basic;
        basic.lits = over_x;
        rest.children.push_back({Skeleton::item, intern(basic), {}});
      }
      result.children.push_back(std::move(rest));
    }
    return result;
  }
};

struct Encoding {
  SatSolver solver;
  std::vector<std::string> unary;        // predicates, index = bit in a type
  std::vector<std::string> constants;
  std::vector<int> type_var;             // r_t
  std::map<std::pair<std::string, std::string>, int> ground;  // (constant, predicate) -> var
  std::map<std::string, int> nullary;
  std::size_t bound = 1;
};

inline void collect(const Formula& f, std::set<std::string>& unary, std::set<std::string>& constants) {
  if (f.kind == FormulaKind::atom) {
    if (f.args.size() > 1) throw FragmentError("predicate " + f.name + " is not unary");
    if (f.args.size() == 1) {
      unary.insert(f.name);
      if (f.args[0].constant) constants.insert(f.args[0].name);
    }
  }
  for (const auto& c : f.children) collect(c, unary, constants);
}

inline int tseitin(Encoding& e, const Reducer& r, const Skeleton& s, std::map<int, int>& item_lits) {
  SatSolver& sat = e.solver;
  switch (s.kind) {
    case Skeleton::truth:
    case Skeleton::falsity: {
      int v = sat.new_var();
      sat.add_clause({s.kind == Skeleton::truth ? v : -v});
      return v;
    }
    case Skeleton::item: {
      if (auto it = item_lits.find(s.id); it != item_lits.end()) return it->second;
      const Item& item = r.items[s.id];
      int lit = 0;
      if (item.kind == Item::atom) {
        if (!item.arg) {
          lit = e.nullary.at(item.predicate);
        } else if (!item.arg->constant) {
          throw FragmentError("free variable: " + item.arg->name);
        } else {
          lit = e.ground.at({item.arg->name, item.predicate});
        }
      } else {
        lit = sat.new_var();
        std::vector<int> some{-lit};
        for (std::size_t t = 0; t < e.type_var.size(); ++t) {
          bool fits = true;
          for (const auto& [p, pos] : item.lits) {
            const auto bit = std::find(e.unary.begin(), e.unary.end(), p) - e.unary.begin();
            if (((t >> bit) & 1U) != (pos ? 1U : 0U)) fits = false;
          }
          if (!fits) continue;
          some.push_back(e.type_var[t]);
          sat.add_clause({-e.type_var[t], lit});
        }
        sat.add_clause(some);
      }
      item_lits[s.id] = lit;
      return lit;
    }
    case Skeleton::negation: return -tseitin(e, r, s.children[0], item_lits);
    case Skeleton::conjunction:
    case Skeleton::disjunction: {
      std::vector<int> kids;
      for (const auto& c : s.children) kids.push_back(tseitin(e, r, c, item_lits));
      const bool conj = s.kind == Skeleton::conjunction;
      int g = sat.new_var();
      std::vector<int> big{conj ? g : -g};
      for (int k : kids) {
        sat.add_clause(conj ? std::vector<int>{-g, k} : std::vector<int>{g, -k});
        big.push_back(conj ? -k : k);
      }
      sat.add_clause(big);
      return g;
    }
  }
  return 0;
}

inline Encoding encode(const std::vector<Formula>& formulas, const OracleConfig& cfg) {
  std::set<std::string> unary, constants;
  for (const auto& f : formulas) collect(f, unary, constants);
  Reducer reducer;
  std::vector<Skeleton> skeletons;
  for (const auto& f : formulas) skeletons.push_back(reducer.reduce(f));

  Encoding e;
  e.unary.assign(unary.begin(), unary.end());
  e.constants.assign(constants.begin(), constants.end());
  if (e.unary.size() >= 20) throw BoundExceeded(std::size_t{1} << 20, cfg.max_domain);
  e.bound = std::size_t{1} << e.unary.size();
  if (e.bound > cfg.max_domain) throw BoundExceeded(e.bound, cfg.max_domain);

  SatSolver& sat = e.solver;
  for (std::size_t t = 0; t < e.bound; ++t) e.type_var.push_back(sat.new_var());
  for (const auto& c : e.constants)
    for (const auto& p : e.unary) e.ground[{c, p}] = sat.new_var();
  for (const auto& it : reducer.items)
    if (it.kind == Item::atom && !it.arg && !e.nullary.count(it.predicate)) e.nullary[it.predicate] = sat.new_var();

  // the domain is nonempty, and each constant's type is realized
  sat.add_clause(e.type_var);
  for (const auto& c : e.constants)
    for (std::size_t t = 0; t < e.bound; ++t) {
      std::vector<int> clause{e.type_var[t]};
      for (std::size_t b = 0; b < e.unary.size(); ++b) {
        const int g = e.ground.at({c, e.unary[b]});
        clause.push_back(((t >> b) & 1U) ? -g : g);
      }
      sat.add_clause(clause);
    }

  std::map<int, int> item_lits;
  for (const auto& s : skeletons) sat.add_clause({tseitin(e, reducer, s, item_lits)});
  return e;
}

// Sequential-counter encoding of "at most k of vars are true".
inline void at_most(SatSolver& sat, const std::vector<int>& vars, std::size_t k) {
  const std::size_t n = vars.size();
  if (k >= n) return;
  if (k == 0) {
    for (int v : vars) sat.add_clause({-v});
    return;
  }
  std::vector<std::vector<int>> s(n, std::vector<int>(k));
  for (auto& row : s)
    for (auto& v : row) v = sat.new_var();
  sat.add_clause({-vars[0], s[0][0]});
  for (std::size_t j = 1; j < k; ++j) sat.add_clause({-s[0][j]});
  for (std::size_t i = 1; i < n; ++i) {
    sat.add_clause({-vars[i], s[i][0]});
    sat.add_clause({-s[i - 1][0], s[i][0]});
    for (std::size_t j = 1; j < k; ++j) {
      sat.add_clause({-vars[i], -s[i - 1][j - 1], s[i][j]});
      sat.add_clause({-s[i - 1][j], s[i][j]});
    }
    sat.add_clause({-vars[i], -s[i - 1][k - 1]});
  }
}

inline FiniteModel read_model(const Encoding& e) {
  FiniteModel m;
  std::vector<std::size_t> element_of(e.bound, 0);
  std::vector<std::size_t> types;
  for (std::size_t t = 0; t < e.bound; ++t)
    if (e.solver.model_value(e.type_var[t])) {
      element_of[t] = types.size();
      types.push_back(t);
    }
  m.domain_size = types.size();
  for (std::size_t b = 0; b < e.unary.size(); ++b) {
    auto& ext = m.predicates[e.unary[b]];
    for (std::size_t i = 0; i < types.size(); ++i)
      if ((types[i] >> b) & 1U) ext.insert(i);
  }
  for (const auto& c : e.constants) {
    std::size_t t = 0;
    for (std::size_t b = 0; b < e.unary.size(); ++b)
      if (e.solver.model_value(e.ground.at({c, e.unary[b]}))) t |= std::size_t{1} << b;
    m.constants[c] = element_of[t];
  }
  for (const auto& [p, v] : e.nullary) m.propositions[p] = e.solver.model_value(v);
  return m;
}

}  // namespace detail

/// Model-size bound for a set of formulas: 2^k for k unary predicates.
inline std::size_t domain_bound(const std::vector<Formula>& formulas) {
  std::set<std::string> unary, constants;
  for (const auto& f : formulas) detail::collect(f, unary, constants);
  return std::size_t{1} << std::min<std::size_t>(unary.size(), 63);
}

inline bool satisfiable(const std::vector<Formula>& formulas, const OracleConfig& cfg = {}) {
  auto e = detail::encode(formulas, cfg);
  return e.solver.solve();
}

/// Smallest model of the formulas with at most `max_domain` elements.
inline std::optional<FiniteModel> find_model(const std::vector<Formula>& formulas, std::size_t max_domain,
                                             const OracleConfig& cfg = {}) {
  OracleConfig wide = cfg;
  wide.max_domain = std::max(cfg.max_domain, domain_bound(formulas));
  if (!satisfiable(formulas, wide)) return std::nullopt;
  const std::size_t bound = domain_bound(formulas);
  for (std::size_t n = 1; n <= std::min(max_domain, bound); ++n) {
    auto e = detail::encode(formulas, wide);
    detail::at_most(e.solver, e.type_var, n);
    if (e.solver.solve()) return detail::read_model(e);
  }
  return std::nullopt;
}

/// premises |= conclusion, decided as unsatisfiability of premises and the
/// negated conclusion.
inline bool entails(const std::vector<Formula>& premises, const Formula& conclusion, const OracleConfig& cfg = {}) {
  std::vector<Formula> all = premises;
  all.push_back(Formula::negation(conclusion));
  return !satisfiable(all, cfg);
}

inline bool entails(const std::vector<View>& premises, const View& conclusion, const OracleConfig& cfg = {}) {
  return entails(to_classical(premises), to_classical(conclusion), cfg);
}

inline bool equivalent(const Formula& f, const Formula& g, const OracleConfig& cfg = {}) {
  return entails({f}, g, cfg) && entails({g}, f, cfg);
}

inline bool equivalent(const View& f, const View& g, const OracleConfig& cfg = {}) {
  return equivalent(to_classical(f), to_classical(g), cfg);
}

}  // namespace etr
