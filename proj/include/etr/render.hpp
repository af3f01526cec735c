// Natural-language rendering of views and problems under a theme mapping.
#pragma once

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/hash.hpp"
#include "etr/problem.hpp"
#include "etr/rng.hpp"
#include "etr/theme.hpp"
#include "etr/view.hpp"

namespace etr {

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ThemeCapacityError : public RenderError {
 public:
  using RenderError::RenderError;
};

struct ThemeMapping {
  Theme theme;
  std::map<std::string, std::string> predicates;  // predicate -> attribute phrase
  std::map<std::string, std::string> terms;       // constant -> entity phrase
  std::uint64_t rng_seed = 0;

  bool empty() const { return predicates.empty() && terms.empty(); }
};

struct RenderOptions {
  /// Lead two-state disjunctions with "either". The older prompt style
  /// omitted it.
  bool either = true;
};

/// Closing block appended to every prompt.
inline const std::string& closing_instructions() {
  static const std::string text =
      "For the purpose of this question, I want you to write what follows in English. Please be succinct, precise "
      "and clear in your answer. Write a logical statement of the form \"Answer: From the premises, we can conclude "
      "that ...\" and then clearly write your conclusion. Please be succinct, precise, and clear.\n"
      "\n"
      "What if anything follows? I do not have an intended answer in mind, and it is possible that nothing follows. "
      "Please be succinct and precise.\n"
      "\n"
      "I want you to answer immediately. Read the question and provide your answer in the format given.\n"
      "\n"
      "What follows? Answer in the format that I showed you. Write \"Answer: {logical statement}\".";
  return text;
}

inline std::set<std::string> problem_predicates(const std::vector<View>& views) {
  std::set<std::string> out;
  for (const auto& v : views)
    for (const auto& [p, _] : v.predicates()) out.insert(p);
  return out;
}

inline std::set<std::string> problem_constants(const std::vector<View>& views) {
  std::set<std::string> out;
  for (const auto& v : views)
    for (const auto& c : v.constants()) out.insert(c);
  return out;
}

/// Random injective mapping of the views' predicates and constants onto the
/// theme's pools. Deterministic given `rng`.
inline ThemeMapping bind_theme(const std::vector<View>& views, const Theme& t, Rng& rng) {
  const auto preds = problem_predicates(views);
  const auto consts = problem_constants(views);
  if (preds.size() > t.predicates.size())
    throw ThemeCapacityError("theme " + t.name + " has " + std::to_string(t.predicates.size()) +
                             " attributes, problem needs " + std::to_string(preds.size()));
  if (consts.size() > t.objects.size())
    throw ThemeCapacityError("theme " + t.name + " has " + std::to_string(t.objects.size()) +
                             " entities, problem needs " + std::to_string(consts.size()));
  ThemeMapping m;
  m.theme = t;
  m.rng_seed = rng.seed();
  auto attrs = t.predicates;
  auto objs = t.objects;
  rng.shuffle(attrs);
  rng.shuffle(objs);
  std::size_t i = 0;
  for (const auto& p : preds) m.predicates[p] = attrs[i++];
  i = 0;
  for (const auto& c : consts) m.terms[c] = objs[i++];
  return m;
}

inline ThemeMapping bind_theme(const Problem& p, const Theme& t, Rng& rng) {
  auto views = p.premises;
  views.push_back(p.predicted);
  return bind_theme(views, t, rng);
}

/// "visible to the naked eye" -> "visibleToTheNakedEye", "moon 2" -> "moon2".
inline std::string camel_case(const std::string& phrase) {
  std::string out;
  bool upper = false;
  for (char ch : phrase) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (out.empty())
        out += static_cast<char>(std::tolower(c));
      else
        out += upper ? static_cast<char>(std::toupper(c)) : ch;
      upper = false;
    } else if (ch != '\'') {
      upper = true;
    }
  }
  return out;
}

/// Mapping for views whose symbol names are the camel-cased theme phrases,
/// as in hand-written examples.
inline ThemeMapping mapping_by_name(const std::vector<View>& views, const Theme& t) {
  ThemeMapping m;
  m.theme = t;
  auto lookup = [](const std::vector<std::string>& pool, const std::string& name) {
    for (const auto& phrase : pool)
      if (camel_case(phrase) == name) return phrase;
    throw RenderError("no theme phrase for symbol " + name);
  };
  for (const auto& p : problem_predicates(views)) m.predicates[p] = lookup(t.predicates, p);
  for (const auto& c : problem_constants(views)) m.terms[c] = lookup(t.objects, c);
  return m;
}

inline std::string variable_name(const std::string& var) {
  std::string out = var;
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string render_term(const Term& t, const ThemeMapping& m) {
  if (t.is_variable()) return variable_name(t.name);
  auto it = m.terms.find(t.name);
  if (it == m.terms.end()) throw RenderError("unmapped constant " + t.name);
  return it->second;
}

inline std::string render_literal(const Literal& l, const ThemeMapping& m) {
  if (l.arity() != 1) throw RenderError("only one-place predicates can be rendered: " + l.str());
  auto it = m.predicates.find(l.predicate);
  if (it == m.predicates.end()) throw RenderError("unmapped predicate " + l.predicate);
  const Copula c = m.theme.copula(it->second);
  return render_term(l.args[0], m) + " " + (l.negated ? c.negative : c.positive);
}

inline std::string render_state(const State& s, const ThemeMapping& m) {
  std::string out;
  for (const auto& l : s) {
    if (!out.empty()) out += " and ";
    out += render_literal(l, m);
  }
  return out;
}

inline std::string render_states(const std::vector<State>& states, const ThemeMapping& m,
                                 const RenderOptions& opt = {}) {
  if (states.size() == 1) return render_state(states[0], m);
  std::string out = states.size() == 2 && opt.either ? "either " : "";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ", or ";
    out += render_state(states[i], m);
  }
  return out;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

/// The sentence body without capitalization or the final period.
inline std::string render_clause(const View& v, const ThemeMapping& m, const RenderOptions& opt = {}) {
  if (v.is_verum()) return "nothing follows";
  if (v.is_absurd()) return "a contradiction follows";
  std::string out;
  for (const auto& q : v.prefix())
    out += (q.quantifier == Quantifier::existential ? "there is some " : "every ") + variable_name(q.name) +
           (q.quantifier == Quantifier::existential ? " such that " : " is such that ");
  if (!v.has_verum_supposition()) out += "if " + render_states(v.supposition(), m, opt) + ", then ";
  return out + render_states(v.stage(), m, opt);
}

inline std::string render_view(const View& v, const ThemeMapping& m, const RenderOptions& opt = {}) {
  return capitalize(render_clause(v, m, opt)) + ".";
}

inline std::string render_prompt(const std::vector<View>& premises, const ThemeMapping& m,
                                 const RenderOptions& opt = {}) {
  std::string out = m.theme.preamble + "\n";
  for (const auto& p : premises) out += "- " + render_view(p, m, opt) + "\n";
  return out + "\n" + closing_instructions();
}

inline std::string render_prompt(const Problem& p, const ThemeMapping& m) { return render_prompt(p.premises, m); }

inline std::string prompt_hash(const std::string& prompt) { return content_hash(prompt); }

/// Theme and mapping used for a problem and its reversed twin: theme chosen
/// round-robin by the numeric problem id, mapping seeded by the id.
inline std::uint64_t mapping_seed(const Problem& p) {
  const std::string& id = p.reversed_of.empty() ? p.id : p.reversed_of;
  return std::stoull(id.empty() ? "0" : id, nullptr, 16);
}

inline ThemeMapping assign_theme(const Problem& p, const std::vector<Theme>& themes = builtin_themes()) {
  if (themes.empty()) throw ThemeError("no themes available");
  const std::uint64_t seed = mapping_seed(p);
  Rng rng(seed);
  return bind_theme(p, themes[seed % themes.size()], rng);
}

}  // namespace etr
