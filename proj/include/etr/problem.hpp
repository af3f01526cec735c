// Reasoning-problem generation: the seed bank, the seven view mutations, the
// generation loop with its stopping conditions, premise reversal and
// validation, plus the line-delimited problem file format.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etr/config.hpp"
#include "etr/engine.hpp"
#include "etr/hash.hpp"
#include "etr/oracle.hpp"
#include "etr/rng.hpp"
#include "json.hpp"

namespace etr {

struct SeedTemplate {
  std::string name;
  std::vector<View> premises;
  View conclusion;
};

/// The four original problems. Unprefixed template variables are constants.
inline const std::vector<SeedTemplate>& seed_bank() {
  static const std::vector<SeedTemplate> bank = {
      {"modus-ponens", {parse_view("{R(x())}^{Q(x())}"), parse_view("{Q(x())}")}, parse_view("{R(x())}")},
      {"modus-tollens", {parse_view("{R(x())}^{Q(x())}"), parse_view("{~R(x())}")}, parse_view("{~Q(x())}")},
      {"quantified-modus-ponens",
       {parse_view("∀x {R(x)}^{Q(x)}"), parse_view("∀x {Q(x)}^{P(x)}")},
       parse_view("∀x {R(x)}^{P(x)}")},
      {"disjunction-fallacy", {parse_view("{Q(x())R(x()),S(x())T(x())}"), parse_view("{Q(x())}")}, parse_view("{R(x())}")},
  };
  return bank;
}

enum class MutationKind {
  predicate_addition,
  constant_addition,
  variable_addition,
  constant_to_variable,
  conjunctive_insertion,
  disjunctive_state_addition,
  atom_negation,
};

inline constexpr std::array<MutationKind, 7> all_mutation_kinds = {
    MutationKind::predicate_addition,    MutationKind::constant_addition,      MutationKind::variable_addition,
    MutationKind::constant_to_variable,  MutationKind::conjunctive_insertion,  MutationKind::disjunctive_state_addition,
    MutationKind::atom_negation};

inline std::string to_string(MutationKind k) {
  switch (k) {
    case MutationKind::predicate_addition: return "predicate-addition";
    case MutationKind::constant_addition: return "constant-addition";
    case MutationKind::variable_addition: return "variable-addition";
    case MutationKind::constant_to_variable: return "constant-to-variable-substitution";
    case MutationKind::conjunctive_insertion: return "conjunctive-atom-insertion";
    case MutationKind::disjunctive_state_addition: return "disjunctive-state-addition";
    case MutationKind::atom_negation: return "atom-negation";
  }
  return "";
}

class InapplicableMutation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SymbolPools {
  std::vector<std::string> predicates = {"P", "Q", "R", "S", "T", "U"};
  std::vector<std::string> constants = {"x", "a", "b", "c", "d"};
  std::vector<std::string> variables = {"x", "y", "z", "w"};
};

namespace detail {

struct Occurrence {
  bool in_stage;
  std::size_t state, literal;
};

inline std::vector<Occurrence> occurrences(const View& v) {
  std::vector<Occurrence> out;
  for (std::size_t s = 0; s < v.stage().size(); ++s)
    for (std::size_t l = 0; l < v.stage()[s].size(); ++l) out.push_back({true, s, l});
  if (!v.has_verum_supposition())
    for (std::size_t s = 0; s < v.supposition().size(); ++s)
      for (std::size_t l = 0; l < v.supposition()[s].size(); ++l) out.push_back({false, s, l});
  return out;
}

inline std::vector<std::vector<Literal>> unpack(const std::vector<State>& states) {
  std::vector<std::vector<Literal>> out;
  for (const auto& s : states) out.emplace_back(s.begin(), s.end());
  return out;
}

inline std::vector<State> pack(const std::vector<std::vector<Literal>>& lits) {
  std::vector<State> out;
  for (const auto& l : lits) out.emplace_back(l);
  return out;
}

inline std::vector<std::string> fresh(const std::vector<std::string>& pool, const std::set<std::string>& used) {
  std::vector<std::string> out;
  for (const auto& p : pool)
    if (!used.count(p)) out.push_back(p);
  return out;
}

inline std::set<std::string> keys(const std::map<std::string, std::size_t>& m) {
  std::set<std::string> out;
  for (const auto& [k, _] : m) out.insert(k);
  return out;
}

inline Literal random_literal(Rng& rng, const std::string& predicate, const std::vector<Term>& terms) {
  Literal l;
  l.predicate = predicate;
  l.args = {rng.pick(terms)};
  l.issues = {false};
  l.negated = rng.coin();
  return l;
}

inline std::vector<Term> terms_of(const View& v) {
  std::vector<Term> out;
  for (const auto& c : v.constants()) out.push_back(Term::make_constant(c));
  for (const auto& q : v.prefix()) out.push_back(Term::make_variable(q.name));
  return out;
}

}  // namespace detail

/// Apply one structural edit of the given kind. Throws InapplicableMutation
/// when the edit is impossible or would leave the view unchanged.
inline View mutate(const View& v, MutationKind kind, Rng& rng, const SymbolPools& pools = {}) {
  auto stage = detail::unpack(v.stage());
  auto sup = detail::unpack(v.has_verum_supposition() ? std::vector<State>{} : v.supposition());
  auto prefix = v.prefix();
  const auto occ = detail::occurrences(v);
  auto at = [&](const detail::Occurrence& o) -> Literal& {
    return o.in_stage ? stage[o.state][o.literal] : sup[o.state][o.literal];
  };
  std::set<std::string> names = v.constants();
  for (const auto& q : v.prefix()) names.insert(q.name);

  switch (kind) {
    case MutationKind::predicate_addition: {
      auto preds = detail::fresh(pools.predicates, detail::keys(v.predicates()));
      if (occ.empty() || preds.empty()) throw InapplicableMutation("no literal or no fresh predicate");
      at(rng.pick(occ)).predicate = rng.pick(preds);
      break;
    }
    case MutationKind::constant_addition: {
      std::vector<std::pair<detail::Occurrence, std::size_t>> slots;
      for (const auto& o : occ)
        for (std::size_t i = 0; i < at(o).args.size(); ++i)
          if (at(o).args[i].constant) slots.push_back({o, i});
      auto consts = detail::fresh(pools.constants, names);
      if (slots.empty() || consts.empty()) throw InapplicableMutation("no constant occurrence or pool exhausted");
      const auto& [o, i] = rng.pick(slots);
      at(o).args[i] = Term::make_constant(rng.pick(consts));
      break;
    }
    case MutationKind::variable_addition: {
      auto vars = detail::fresh(pools.variables, names);
      if (vars.empty() || stage.empty()) throw InapplicableMutation("no fresh variable");
      const std::string var = rng.pick(vars);
      std::vector<std::string> preds(pools.predicates);
      for (const auto& [p, _] : v.predicates()) preds.push_back(p);
      auto& state = stage[rng.below(stage.size())];
      state.push_back(detail::random_literal(rng, rng.pick(preds), {Term::make_variable(var)}));
      prefix.push_back({var, rng.coin() ? Quantifier::universal : Quantifier::existential});
      break;
    }
    case MutationKind::constant_to_variable: {
      auto vars = detail::fresh(pools.variables, names);
      const auto consts = v.constants();
      if (consts.empty() || vars.empty()) throw InapplicableMutation("no constant or no fresh variable");
      const std::string c = rng.pick(std::vector<std::string>(consts.begin(), consts.end()));
      const std::string var = rng.pick(vars);
      for (auto* region : {&stage, &sup})
        for (auto& s : *region)
          for (auto& l : s)
            for (auto& t : l.args)
              if (t.constant && t.name == c) t = Term::make_variable(var);
      prefix.push_back({var, rng.coin() ? Quantifier::universal : Quantifier::existential});
      break;
    }
    case MutationKind::conjunctive_insertion: {
      const auto terms = detail::terms_of(v);
      if (stage.empty() || terms.empty()) throw InapplicableMutation("no state or no term");
      std::vector<std::string> preds(pools.predicates);
      auto& state = stage[rng.below(stage.size())];
      state.push_back(detail::random_literal(rng, rng.pick(preds), terms));
      break;
    }
    case MutationKind::disjunctive_state_addition: {
      const auto terms = detail::terms_of(v);
      if (terms.empty()) throw InapplicableMutation("no term");
      auto preds = detail::fresh(pools.predicates, detail::keys(v.predicates()));
      if (preds.empty()) preds = pools.predicates;
      stage.push_back({detail::random_literal(rng, rng.pick(preds), terms)});
      break;
    }
    case MutationKind::atom_negation: {
      if (occ.empty()) throw InapplicableMutation("no literal");
      auto& l = at(rng.pick(occ));
      l.negated = !l.negated;
      break;
    }
  }
  View out(prefix, detail::pack(stage), sup.empty() ? verum_states() : detail::pack(sup));
  out = out.without_unused_variables();
  if (out == v) throw InapplicableMutation("mutation left the view unchanged");
  for (const auto* region : {&out.stage(), &out.supposition()})
    for (const auto& s : *region)
      if (s.self_contradictory()) throw InapplicableMutation("mutation produced a contradictory state");
  return out;
}

struct GenConfig {
  std::size_t max_premises = 5;
  int min_mutations = 1;
  int max_mutations = 3;
  std::size_t min_atoms = 4;
  std::size_t max_atoms = 11;
  std::size_t predicate_pool = 6;
  std::size_t constant_pool = 5;
  std::size_t variable_pool = 4;
  std::size_t max_attempts = 2000;
  std::size_t backtrack_limit = 3;
  std::size_t draws_per_attempt = 40;
  std::size_t max_domain = 64;
  std::uint64_t seed = 7;

  SymbolPools pools() const {
    SymbolPools p;
    auto cut = [](std::vector<std::string>& v, std::size_t n) { v.resize(std::min(v.size(), n)); };
    cut(p.predicates, predicate_pool);
    cut(p.constants, constant_pool);
    cut(p.variables, variable_pool);
    return p;
  }

  void validate() const {
    if (max_premises == 0 || min_mutations < 1 || max_mutations < min_mutations || min_atoms == 0 ||
        max_atoms < min_atoms || predicate_pool == 0 || constant_pool == 0 || variable_pool == 0 ||
        max_attempts == 0 || draws_per_attempt == 0 || max_domain == 0)
      throw std::invalid_argument("invalid generator configuration");
    if (predicate_pool > 6 || constant_pool > 5 || variable_pool > 4)
      throw std::invalid_argument("symbol pools hold at most 6 predicates, 5 constants, 4 variables");
  }

  KeyValues to_key_values() const {
    return {{"max_premises", std::to_string(max_premises)},
            {"min_mutations", std::to_string(min_mutations)},
            {"max_mutations", std::to_string(max_mutations)},
            {"min_atoms", std::to_string(min_atoms)},
            {"max_atoms", std::to_string(max_atoms)},
            {"predicate_pool", std::to_string(predicate_pool)},
            {"constant_pool", std::to_string(constant_pool)},
            {"variable_pool", std::to_string(variable_pool)},
            {"max_attempts", std::to_string(max_attempts)},
            {"backtrack_limit", std::to_string(backtrack_limit)},
            {"draws_per_attempt", std::to_string(draws_per_attempt)},
            {"max_domain", std::to_string(max_domain)},
            {"seed", std::to_string(seed)}};
  }

  static GenConfig from_key_values(const KeyValues& kv) {
    GenConfig c;
    for (const auto& [k, v] : kv) {
      const auto n = std::stoull(v);
      if (k == "max_premises") c.max_premises = n;
      else if (k == "min_mutations") c.min_mutations = static_cast<int>(n);
      else if (k == "max_mutations") c.max_mutations = static_cast<int>(n);
      else if (k == "min_atoms") c.min_atoms = n;
      else if (k == "max_atoms") c.max_atoms = n;
      else if (k == "predicate_pool") c.predicate_pool = n;
      else if (k == "constant_pool") c.constant_pool = n;
      else if (k == "variable_pool") c.variable_pool = n;
      else if (k == "max_attempts") c.max_attempts = n;
      else if (k == "backtrack_limit") c.backtrack_limit = n;
      else if (k == "draws_per_attempt") c.draws_per_attempt = n;
      else if (k == "max_domain") c.max_domain = n;
      else if (k == "seed") c.seed = n;
      else throw std::invalid_argument("unknown generator option: " + k);
    }
    c.validate();
    return c;
  }
};

struct PremiseLineage {
  std::string seed;  // seed template name
  std::vector<std::string> mutations;
};

struct FallacyCertificate {
  bool entailed = false;
  std::size_t oracle_bound_used = 0;
};

struct Problem {
  std::string id;
  std::vector<View> premises;
  View predicted;
  FallacyCertificate certificate;
  std::vector<PremiseLineage> lineage;
  std::uint64_t rng_seed = 0;
  std::string reversed_of;  // empty unless this is a reversed twin
};

inline std::string problem_id(const std::vector<View>& premises) {
  std::string canon;
  for (const auto& p : premises) canon += print_view(p) + "\n";
  return content_hash(canon);
}

class GenerationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A prediction worth keeping: not empty, not verum, free of contradictory
/// states, and not merely a copy of some single-state categorical premise.
inline bool nontrivial(const View& predicted, const std::vector<View>& premises) {
  if (predicted.is_absurd() || predicted.is_verum()) return false;
  for (const auto& s : predicted.stage())
    if (s.self_contradictory()) return false;
  for (const auto& p : premises) {
    if (!p.is_categorical()) continue;
    bool novel = false;
    for (const auto& s : predicted.stage())
      for (const auto& l : s)
        if (!p.stage()[0].contains(l)) novel = true;
    if (!novel) return false;
  }
  return true;
}

inline FallacyCertificate certify(const std::vector<View>& premises, const View& predicted, std::size_t max_domain) {
  FallacyCertificate c;
  const OracleConfig cfg{max_domain};
  std::vector<Formula> all = to_classical(premises);
  all.push_back(to_classical(predicted));
  c.oracle_bound_used = domain_bound(all);
  c.entailed = entails(premises, predicted, cfg);
  return c;
}

/// Build one problem from `rng`. Premises are drawn from the seed bank,
/// mutated, and kept while the running prediction stays non-trivial; the
/// most recent premise is dropped when the atom budget overflows.
inline Problem generate_problem(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const SymbolPools pools = cfg.pools();
  std::vector<std::pair<std::string, View>> sources;
  for (const auto& t : seed_bank())
    for (const auto& p : t.premises) sources.push_back({t.name, p});

  for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    std::vector<View> premises;
    std::vector<PremiseLineage> lineage;
    std::size_t backtracks = 0;
    for (std::size_t draw = 0; draw < cfg.draws_per_attempt; ++draw) {
      const auto& [seed_name, seed_view] = rng.pick(sources);
      View v = seed_view;
      PremiseLineage lin{seed_name, {}};
      const int target = rng.between(cfg.min_mutations, cfg.max_mutations);
      for (int tries = 0; static_cast<int>(lin.mutations.size()) < target && tries < 20; ++tries) {
        const MutationKind k = all_mutation_kinds[rng.below(all_mutation_kinds.size())];
        try {
          v = mutate(v, k, rng, pools);
          lin.mutations.push_back(to_string(k));
        } catch (const InapplicableMutation&) {
        } catch (const ViewError&) {
        }
      }

      auto candidate = premises;
      candidate.push_back(v);
      if (atom_count(candidate) > cfg.max_atoms) {
        if (premises.empty() || backtracks >= cfg.backtrack_limit) break;
        premises.pop_back();
        lineage.pop_back();
        ++backtracks;
        continue;
      }
      View predicted = what_follows(candidate);
      if (!nontrivial(predicted, candidate)) continue;
      premises = std::move(candidate);
      lineage.push_back(std::move(lin));

      const std::size_t atoms = atom_count(premises);
      if (premises.size() >= 2 && atoms >= cfg.min_atoms && predicted.is_categorical()) {
        FallacyCertificate cert;
        try {
          cert = certify(premises, predicted, cfg.max_domain);
        } catch (const OracleError&) {
          cert.entailed = true;
        }
        if (!cert.entailed) {
          Problem p;
          p.premises = premises;
          p.predicted = predicted;
          p.certificate = cert;
          p.lineage = lineage;
          p.rng_seed = rng.seed();
          p.id = problem_id(p.premises);
          return p;
        }
      }
      if (premises.size() >= cfg.max_premises) {
        if (backtracks >= cfg.backtrack_limit) break;
        premises.pop_back();
        lineage.pop_back();
        ++backtracks;
      }
    }
  }
  throw GenerationExhausted("no problem found after " + std::to_string(cfg.max_attempts) + " attempts");
}

/// `n` distinct problems; problem i uses a sub-seed drawn from the stream
/// seeded by cfg.seed.
inline std::vector<Problem> generate_problems(const GenConfig& cfg, std::size_t n) {
  Rng stream(cfg.seed);
  std::vector<Problem> out;
  std::set<std::string> seen;
  while (out.size() < n) {
    Rng sub(stream.next());
    Problem p = generate_problem(cfg, sub);
    if (seen.insert(p.id).second) out.push_back(std::move(p));
  }
  return out;
}

inline Problem reverse_premises(const Problem& p) {
  Problem r;
  r.premises.assign(p.premises.rbegin(), p.premises.rend());
  r.lineage.assign(p.lineage.rbegin(), p.lineage.rend());
  r.predicted = what_follows(r.premises);
  r.certificate = certify(r.premises, r.predicted, 64);
  r.rng_seed = p.rng_seed;
  r.id = problem_id(r.premises);
  r.reversed_of = p.reversed_of.empty() ? p.id : "";
  return r;
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_problem(const Problem& p, const GenConfig& cfg = {}) {
  ValidationReport r;
  const std::size_t atoms = atom_count(p.premises);
  if (atoms < cfg.min_atoms || atoms > cfg.max_atoms)
    r.violations.push_back("size: " + std::to_string(atoms) + " atoms outside [" + std::to_string(cfg.min_atoms) +
                           "," + std::to_string(cfg.max_atoms) + "]");
  for (const auto& v : p.premises)
    for (const auto& [pred, arity] : v.predicates())
      if (arity != 1) r.violations.push_back("monadic: predicate " + pred + " has arity " + std::to_string(arity));
  if (p.premises.empty()) {
    r.violations.push_back("premises: none");
    return r;
  }
  if (p.id != problem_id(p.premises)) r.violations.push_back("id: does not match premises");
  const View predicted = what_follows(p.premises);
  if (!(predicted == p.predicted))
    r.violations.push_back("prediction: recorded " + print_view(p.predicted) + " but engine gives " +
                           print_view(predicted));
  if (!p.predicted.is_categorical()) r.violations.push_back("categorical: predicted conclusion is not categorical");
  if (p.certificate.entailed) r.violations.push_back("certificate: marked as entailed");
  try {
    if (entails(p.premises, p.predicted, OracleConfig{cfg.max_domain}))
      r.violations.push_back("fallacy-status: predicted conclusion is logically entailed");
  } catch (const OracleError& e) {
    r.violations.push_back(std::string("oracle: ") + e.what());
  }
  return r;
}

// Problem file: one JSON object per line.

inline nlohmann::json to_json(const Problem& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["premises"] = nlohmann::json::array();
  for (const auto& v : p.premises) j["premises"].push_back(print_view(v));
  j["predicted"] = print_view(p.predicted);
  if (!p.reversed_of.empty()) j["reversed_of"] = p.reversed_of;
  j["lineage"] = nlohmann::json::array();
  for (const auto& l : p.lineage) j["lineage"].push_back({{"seed", l.seed}, {"mutations", l.mutations}});
  j["rng_seed"] = p.rng_seed;
  j["certificate"] = {{"entailed", p.certificate.entailed}, {"oracle_bound_used", p.certificate.oracle_bound_used}};
  return j;
}

inline Problem problem_from_json(const nlohmann::json& j) {
  Problem p;
  p.id = j.at("id").get<std::string>();
  for (const auto& s : j.at("premises")) p.premises.push_back(parse_view(s.get<std::string>()));
  p.predicted = parse_view(j.at("predicted").get<std::string>());
  p.reversed_of = j.value("reversed_of", "");
  if (j.contains("lineage"))
    for (const auto& l : j["lineage"])
      p.lineage.push_back({l.value("seed", ""), l.value("mutations", std::vector<std::string>{})});
  p.rng_seed = j.value("rng_seed", std::uint64_t{0});
  if (j.contains("certificate")) {
    p.certificate.entailed = j["certificate"].value("entailed", false);
    p.certificate.oracle_bound_used = j["certificate"].value("oracle_bound_used", std::size_t{0});
  }
  return p;
}

inline void write_problems(std::ostream& out, const std::vector<Problem>& problems) {
  for (const auto& p : problems) out << to_json(p).dump() << "\n";
}

inline std::vector<Problem> read_problems(std::istream& in) {
  std::vector<Problem> out;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) out.push_back(problem_from_json(nlohmann::json::parse(line)));
  return out;
}

inline std::vector<Problem> read_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_problems(in);
}

}  // namespace etr
