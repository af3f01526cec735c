// Erotetic operations over views: issue matching, Update, Query, Factor and
// the default inference procedure that yields the predicted conclusion.
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "etr/view.hpp"

namespace etr {

/// Which bindings a match may introduce.
enum class BindPolicy {
  unify,        // any variable, either side; incoming side preferred
  update,       // incoming var -> current term of the same quantifier, or an
                // existential to a constant
  instantiate,  // universal var -> any term (supposition discharge)
  query,        // question var: existential -> any term, universal -> universal
};

struct MatchContext {
  BindPolicy policy = BindPolicy::unify;
  std::map<std::string, Quantifier> bindable;  // unused under `unify`
  std::map<std::string, Quantifier> rigid;     // quantifiers of the fixed side
};

struct MatchResult {
  std::size_t score = 0;        // incoming literals matched
  std::size_t issue_score = 0;  // matched pairs carrying an issue flag
  Substitution subst;
};

namespace detail {

inline Term resolve(const Substitution& s, Term t) {
  for (int guard = 0; guard < 64 && t.is_variable(); ++guard) {
    auto it = s.find(t.name);
    if (it == s.end() || it->second == t) break;
    t = it->second;
  }
  return t;
}

inline void bind(Substitution& s, const std::string& var, const Term& to) {
  for (auto& [k, v] : s)
    if (v.is_variable() && v.name == var) v = to;
  s[var] = to;
}

inline bool may_bind(const Term& var, const Term& target, const MatchContext& ctx) {
  if (var.constant) return false;
  if (ctx.policy == BindPolicy::unify) return true;
  auto it = ctx.bindable.find(var.name);
  if (it == ctx.bindable.end()) return false;
  const Quantifier q = it->second;
  std::optional<Quantifier> tq;
  if (target.is_variable()) {
    if (auto r = ctx.rigid.find(target.name); r != ctx.rigid.end()) tq = r->second;
  }
  switch (ctx.policy) {
    case BindPolicy::update:
      if (target.constant) return q == Quantifier::existential;
      return !tq || *tq == q;
    case BindPolicy::instantiate:
      return q == Quantifier::universal || target.constant || !tq || *tq == Quantifier::existential;
    case BindPolicy::query:
      if (q == Quantifier::existential) return true;
      return target.is_variable() && (!tq || *tq == Quantifier::universal);
    case BindPolicy::unify:
      break;
  }
  return true;
}

}  // namespace detail

/// Unify `current` and `incoming` position-wise, extending `s`. Same
/// predicate and polarity are required; constants must be identical.
inline std::optional<Substitution> literal_match(const Literal& current, const Literal& incoming,
                                                 const Substitution& s = {}, const MatchContext& ctx = {}) {
  if (current.predicate != incoming.predicate || current.negated != incoming.negated ||
      current.arity() != incoming.arity())
    return std::nullopt;
  Substitution out = s;
  for (std::size_t i = 0; i < current.arity(); ++i) {
    const Term a = detail::resolve(out, current.args[i]);
    const Term b = detail::resolve(out, incoming.args[i]);
    if (a == b) continue;
    if (detail::may_bind(b, a, ctx)) {
      detail::bind(out, b.name, a);
    } else if (detail::may_bind(a, b, ctx)) {
      detail::bind(out, a.name, b);
    } else {
      return std::nullopt;
    }
  }
  return out;
}

/// Maximal number of `incoming` literals matched to distinct `current`
/// literals under one consistent substitution. Ties go to the pairing with
/// more issue-flagged literals, then to the first found in canonical order.
inline MatchResult state_match(const State& current, const State& incoming, const MatchContext& ctx = {},
                               const Substitution& seed = {}) {
  const auto& g = current.literals();
  const auto& d = incoming.literals();
  MatchResult best;
  best.subst = seed;
  std::vector<bool> used(g.size(), false);

  auto search = [&](auto&& self, std::size_t i, const Substitution& s, std::size_t score, std::size_t issues) -> void {
    if (score + (d.size() - i) < best.score) return;
    if (i == d.size()) {
      if (std::tie(score, issues) > std::tie(best.score, best.issue_score)) best = {score, issues, s};
      return;
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (used[j]) continue;
      if (auto m = literal_match(g[j], d[i], s, ctx)) {
        used[j] = true;
        const bool flagged = g[j].has_issue() || d[i].has_issue();
        self(self, i + 1, *m, score + 1, issues + (flagged ? 1 : 0));
        used[j] = false;
      }
    }
    self(self, i + 1, s, score, issues);
  };
  search(search, 0, seed, 0, 0);
  if (best.score == 0) best.subst = seed;
  return best;
}

/// Find an extension of `s` under which every literal of `pattern` occurs in
/// `target`.
inline std::optional<Substitution> embed(const State& pattern, const State& target, const MatchContext& ctx,
                                         const Substitution& s = {}) {
  const auto& p = pattern.literals();
  const auto& t = target.literals();
  std::optional<Substitution> found;
  auto search = [&](auto&& self, std::size_t i, const Substitution& cur) -> bool {
    if (i == p.size()) {
      found = cur;
      return true;
    }
    for (const auto& tl : t)
      if (auto m = literal_match(tl, p[i], cur, ctx))
        if (self(self, i + 1, *m)) return true;
    return false;
  };
  search(search, 0, s);
  return found;
}

/// Two states clash when one holds the complement of a literal of the other.
inline std::optional<Substitution> clash(const State& pattern, const State& target, const MatchContext& ctx,
                                         const Substitution& s = {}) {
  for (const auto& pl : pattern)
    for (const auto& tl : target)
      if (auto m = literal_match(tl, pl.complement(), s, ctx)) return m;
  return std::nullopt;
}

/// Negation of a disjunction of states, expanded back into disjunctive form.
inline std::vector<State> negate_states(const std::vector<State>& states) {
  std::vector<State> acc{State{}};
  for (const auto& s : states) {
    std::vector<State> next;
    for (const auto& a : acc)
      for (const auto& l : s) {
        State c = a.merged(State({l.complement()}));
        if (!c.self_contradictory()) next.push_back(std::move(c));
      }
    acc = normalize_states(std::move(next));
  }
  std::vector<State> out;
  for (const auto& s : acc) {
    const bool subsumed = std::any_of(acc.begin(), acc.end(), [&](const State& o) { return !(o == s) && s.includes(o); });
    if (!subsumed) out.push_back(s);
  }
  return out;
}

struct TraceStep {
  std::string operation;  // "update" or "factor"
  std::string rule;       // which branch of the operation fired
  std::vector<View> inputs;
  View output;
};

struct InferenceTrace {
  std::vector<TraceStep> steps;
};

namespace detail {

inline std::set<std::string> names_in(const View& v) {
  std::set<std::string> out = v.constants();
  for (const auto& q : v.prefix()) out.insert(q.name);
  return out;
}

/// Rename the variables of `v` so none collides with `avoid`.
inline View rename_apart(const View& v, const std::set<std::string>& avoid) {
  std::set<std::string> taken = avoid;
  for (const auto& c : v.constants()) taken.insert(c);
  Substitution ren;
  std::vector<QuantifiedVariable> prefix;
  for (const auto& q : v.prefix()) {
    std::string name = q.name;
    for (int i = 1; taken.count(name); ++i) name = q.name + std::to_string(i);
    taken.insert(name);
    if (name != q.name) ren[q.name] = Term::make_variable(name);
    prefix.push_back({name, q.quantifier});
  }
  if (ren.empty()) return v;
  return View(std::move(prefix), substitute(ren, v.stage()), substitute(ren, v.supposition()));
}

inline std::map<std::string, Quantifier> quantifiers(const View& v) {
  std::map<std::string, Quantifier> out;
  for (const auto& q : v.prefix()) out[q.name] = q.quantifier;
  return out;
}

/// Build a view over `stage`/`supposition`, declaring the used variables in
/// the order they appear in `order`.
inline View assemble(const std::vector<QuantifiedVariable>& order, std::vector<State> stage,
                     std::vector<State> supposition = verum_states()) {
  std::set<std::string> used;
  auto scan = [&](const std::vector<State>& states) {
    for (const auto& s : states)
      for (const auto& l : s)
        for (const auto& t : l.args)
          if (t.is_variable()) used.insert(t.name);
  };
  scan(stage);
  scan(supposition);
  std::vector<QuantifiedVariable> prefix;
  std::set<std::string> seen;
  for (const auto& q : order)
    if (used.count(q.name) && seen.insert(q.name).second) prefix.push_back(q);
  return View(std::move(prefix), std::move(stage), std::move(supposition));
}

inline std::vector<QuantifiedVariable> concat(const std::vector<QuantifiedVariable>& a,
                                              const std::vector<QuantifiedVariable>& b) {
  std::vector<QuantifiedVariable> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline State union_of(const std::vector<State>& states) {
  State out;
  for (const auto& s : states) out = out.merged(s);
  return out;
}

struct StageUpdate {
  std::vector<State> states;
  std::string rule;
};

/// Categorical core of Update: keep the best-matching pairs, otherwise the
/// consistent pairwise products, otherwise the current stage.
inline StageUpdate update_stage(const std::vector<State>& gamma, const std::vector<State>& delta,
                                const MatchContext& ctx) {
  struct Pair {
    std::size_t i, j;
    MatchResult m;
  };
  std::vector<Pair> pairs;
  std::size_t best = 0;
  for (std::size_t i = 0; i < gamma.size(); ++i)
    for (std::size_t j = 0; j < delta.size(); ++j) {
      auto m = state_match(gamma[i], delta[j], ctx);
      best = std::max(best, m.score);
      pairs.push_back({i, j, std::move(m)});
    }
  if (best > 0) {
    std::size_t best_issue = 0;
    for (const auto& p : pairs)
      if (p.m.score == best) best_issue = std::max(best_issue, p.m.issue_score);
    std::vector<State> out;
    for (const auto& p : pairs) {
      if (p.m.score != best || p.m.issue_score != best_issue) continue;
      State merged = gamma[p.i].merged(substitute(p.m.subst, delta[p.j]));
      if (!merged.self_contradictory()) out.push_back(std::move(merged));
    }
    if (!out.empty()) return {normalize_states(std::move(out)), "match"};
  }
  std::vector<State> out;
  for (const auto& g : gamma)
    for (const auto& d : delta) {
      State merged = g.merged(d);
      if (!merged.self_contradictory()) out.push_back(std::move(merged));
    }
  if (out.empty()) return {gamma, "fallback"};
  return {normalize_states(std::move(out)), "product"};
}

struct UpdateOutcome {
  View view;
  std::string rule;
};

inline UpdateOutcome update_impl(const View& current_raw, const View& incoming_raw) {
  if (incoming_raw.is_verum() && incoming_raw.has_verum_supposition()) return {current_raw, "verum"};
  if (current_raw.is_verum() && current_raw.has_verum_supposition()) return {incoming_raw, "verum"};
  // a current variable may share its name with an incoming constant
  const View current = rename_apart(current_raw, incoming_raw.constants());
  const View inc = rename_apart(incoming_raw, names_in(current));
  const auto cur_q = quantifiers(current);
  const auto inc_q = quantifiers(inc);
  const auto order = concat(current.prefix(), inc.prefix());

  MatchContext stage_ctx{BindPolicy::update, inc_q, cur_q};

  const bool cur_cond = !current.has_verum_supposition();
  const bool inc_cond = !inc.has_verum_supposition();

  if (!cur_cond && !inc_cond) {
    auto r = update_stage(current.stage(), inc.stage(), stage_ctx);
    return {assemble(order, std::move(r.states)), r.rule};
  }

  if (cur_cond && !inc_cond) {
    const State antecedent = union_of(current.supposition());
    std::map<std::string, Quantifier> universals;
    for (const auto& [n, q] : cur_q)
      if (q == Quantifier::universal) universals[n] = q;
    MatchContext inst_ctx{BindPolicy::instantiate, universals, inc_q};

    // Modus ponens: an incoming alternative affirms the supposition.
    for (const auto& d : inc.stage()) {
      auto s = embed(antecedent, d, inst_ctx);
      if (!s) continue;
      std::vector<QuantifiedVariable> prefix;
      for (const auto& q : current.prefix())
        if (!s->count(q.name)) prefix.push_back(q);
      prefix.insert(prefix.end(), inc.prefix().begin(), inc.prefix().end());
      std::vector<State> stage;
      const State affirmed = substitute(*s, antecedent);
      for (const auto& g : current.stage()) stage.push_back(substitute(*s, g).merged(affirmed));
      View discharged = assemble(prefix, std::move(stage));
      auto next = update_impl(discharged, inc);
      return {next.view, "discharge+" + next.rule};
    }

    // Modus tollens: every incoming alternative denies every alternative of
    // the stage.
    if (!current.stage().empty() && !inc.stage().empty()) {
      std::optional<Substitution> s = Substitution{};
      for (const auto& g : current.stage()) {
        for (const auto& d : inc.stage()) {
          s = clash(g, d, inst_ctx, *s);
          if (!s) break;
        }
        if (!s) break;
      }
      if (s) {
        std::vector<QuantifiedVariable> prefix;
        for (const auto& q : current.prefix()) {
          if (s->count(q.name)) continue;
          // Negating the supposition flips the quantifiers it depends on.
          prefix.push_back({q.name, q.quantifier == Quantifier::universal ? Quantifier::existential
                                                                           : Quantifier::universal});
        }
        prefix.insert(prefix.end(), inc.prefix().begin(), inc.prefix().end());
        auto negated = negate_states(substitute(*s, current.supposition()));
        return {assemble(prefix, std::move(negated)), "contrapositive"};
      }
    }

    auto r = update_stage(current.stage(), inc.stage(), stage_ctx);
    return {assemble(order, std::move(r.states), current.supposition()), "conditional-" + r.rule};
  }

  if (!cur_cond && inc_cond) {
    const State antecedent = union_of(inc.supposition());
    std::map<std::string, Quantifier> inc_universals;
    for (const auto& [n, q] : inc_q)
      if (q == Quantifier::universal) inc_universals[n] = q;
    MatchContext inst_ctx{BindPolicy::instantiate, inc_universals, cur_q};

    bool any = false;
    std::vector<State> stage;
    std::vector<QuantifiedVariable> prefix = order;
    for (const auto& g : current.stage()) {
      auto s = embed(antecedent, g, inst_ctx);
      if (!s) {
        stage.push_back(g);
        continue;
      }
      any = true;
      auto r = update_stage({g}, substitute(*s, inc.stage()), stage_ctx);
      stage.insert(stage.end(), r.states.begin(), r.states.end());
    }
    if (any) return {assemble(prefix, std::move(stage)), "incoming-discharge"};

    if (!current.stage().empty() && !inc.stage().empty()) {
      std::optional<Substitution> s = Substitution{};
      for (const auto& g : current.stage()) {
        for (const auto& d : inc.stage()) {
          s = clash(d, g, inst_ctx, *s);
          if (!s) break;
        }
        if (!s) break;
      }
      if (s) {
        std::vector<QuantifiedVariable> flipped = current.prefix();
        for (const auto& q : inc.prefix()) {
          if (s->count(q.name)) continue;
          flipped.push_back({q.name, q.quantifier == Quantifier::universal ? Quantifier::existential
                                                                            : Quantifier::universal});
        }
        auto negated = negate_states(substitute(*s, inc.supposition()));
        std::vector<State> out;
        for (const auto& g : current.stage())
          for (const auto& n : negated) {
            State merged = g.merged(n);
            if (!merged.self_contradictory()) out.push_back(std::move(merged));
          }
        if (!out.empty()) return {assemble(flipped, std::move(out)), "incoming-contrapositive"};
      }
    }
    return {current, "conditional-set-aside"};
  }

  // Both conditional: chain through the shared supposition/stage.
  {
    std::optional<Substitution> s = Substitution{};
    for (const auto& d : inc.stage()) {
      std::optional<Substitution> hit;
      for (const auto& sup : current.supposition())
        if ((hit = embed(sup, d, stage_ctx, *s))) break;
      s = hit;
      if (!s) break;
    }
    if (s && !inc.stage().empty()) {
      return {assemble(order, current.stage(), substitute(*s, inc.supposition())), "chain-forward"};
    }
  }
  {
    std::optional<Substitution> s = Substitution{};
    for (const auto& g : current.stage()) {
      std::optional<Substitution> hit;
      for (const auto& t : inc.supposition()) {
        MatchContext ctx{BindPolicy::instantiate, inc_q, cur_q};
        if ((hit = embed(t, g, ctx, *s))) break;
      }
      s = hit;
      if (!s) break;
    }
    if (s && !current.stage().empty()) {
      return {assemble(order, substitute(*s, inc.stage()), current.supposition()), "chain-backward"};
    }
  }
  return {current, "conditional-set-aside"};
}

}  // namespace detail

/// Update `current` with `incoming`. Alternatives of the current view that
/// best match the incoming information survive; see the rule names recorded
/// in traces for which branch applied.
inline View update(const View& current, const View& incoming) { return detail::update_impl(current, incoming).view; }

/// True iff every alternative of `v` contains an instance of some alternative
/// of the question `q`, and the suppositions agree.
inline bool endorses(const View& v, const View& q_raw) {
  const View q = detail::rename_apart(q_raw, detail::names_in(v));
  MatchContext ctx{BindPolicy::query, detail::quantifiers(q), detail::quantifiers(v)};
  Substitution base;
  if (q.has_verum_supposition() != v.has_verum_supposition()) return false;
  if (!q.has_verum_supposition()) {
    if (q.supposition().size() != v.supposition().size()) return false;
    for (std::size_t i = 0; i < q.supposition().size(); ++i) {
      const auto& qs = q.supposition()[i];
      const auto& vs = v.supposition()[i];
      if (qs.size() != vs.size()) return false;
      auto s = embed(qs, vs, ctx, base);
      if (!s) return false;
      base = *s;
    }
  }
  for (const auto& g : v.stage()) {
    bool hit = false;
    for (const auto& k : q.stage())
      if (embed(k, g, ctx, base)) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

/// Query: returns `q` when `v` endorses it, otherwise `v` unchanged.
inline View query(const View& v, const View& q) { return endorses(v, q) ? q : v; }

/// Drop subsumed alternatives, self-contradictory alternatives (unless none
/// would remain) and unused prefix variables.
inline View factor(const View& v) {
  std::vector<State> consistent;
  for (const auto& s : v.stage())
    if (!s.self_contradictory()) consistent.push_back(s);
  const std::vector<State>& base = consistent.empty() ? v.stage() : consistent;
  std::vector<State> kept;
  for (const auto& s : base) {
    const bool subsumed =
        std::any_of(base.begin(), base.end(), [&](const State& o) { return !(o == s) && s.includes(o); });
    if (!subsumed) kept.push_back(s);
  }
  return View(v.prefix(), std::move(kept), v.supposition()).without_unused_variables();
}

/// Fold Update over the premises in order, then Factor.
inline View what_follows(const std::vector<View>& premises, InferenceTrace* trace = nullptr) {
  if (premises.empty()) throw std::invalid_argument("what_follows: no premises");
  View v = premises.front();
  for (std::size_t i = 1; i < premises.size(); ++i) {
    auto out = detail::update_impl(v, premises[i]);
    if (trace) trace->steps.push_back({"update", out.rule, {v, premises[i]}, out.view});
    v = std::move(out.view);
  }
  View f = factor(v);
  if (trace) trace->steps.push_back({"factor", f == v ? "unchanged" : "reduced", {v}, f});
  return f;
}

inline bool does_it_follow(const std::vector<View>& premises, const View& q) {
  return endorses(what_follows(premises), q);
}

/// Re-run every recorded step and compare with the recorded outputs.
inline bool replay(const InferenceTrace& trace) {
  for (const auto& step : trace.steps) {
    if (step.operation == "update") {
      if (step.inputs.size() != 2 || !(update(step.inputs[0], step.inputs[1]) == step.output)) return false;
    } else if (step.operation == "factor") {
      if (step.inputs.size() != 1 || !(factor(step.inputs[0]) == step.output)) return false;
    } else {
      return false;
    }
  }
  return true;
}

/// One line per step: "update[rule] a + b => c".
inline std::string format_trace(const InferenceTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out += std::to_string(i + 1) + ". " + s.operation + "[" + s.rule + "] ";
    for (std::size_t k = 0; k < s.inputs.size(); ++k) out += (k ? " + " : "") + print_view(s.inputs[k]);
    out += " => " + print_view(s.output) + "\n";
  }
  return out;
}

}  // namespace etr
