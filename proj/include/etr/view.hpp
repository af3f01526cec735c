// Views: the central object of erotetic reasoning. A view is a quantifier
// prefix over a disjunctive set of states (the stage), optionally conditioned
// on a supposition. This header holds the data model, the shorthand-notation
// parser and printer, and the structural utilities (alpha-equality, atom
// counting) the rest of the library builds on.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace etr {

enum class Quantifier { universal, existential };

struct Term {
  std::string name;
  bool constant = false;

  static Term make_constant(std::string n) { return Term{std::move(n), true}; }
  static Term make_variable(std::string n) { return Term{std::move(n), false}; }

  bool is_variable() const { return !constant; }
  std::string str() const { return constant ? name + "()" : name; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

/// A signed atom. Issue flags mark argument positions that are "at issue";
/// they steer matching but are excluded from literal identity.
struct Literal {
  std::string predicate;
  std::vector<Term> args;
  std::vector<bool> issues;
  bool negated = false;

  Literal() = default;
  Literal(std::string pred, std::vector<Term> a, bool neg = false)
      : predicate(std::move(pred)), args(std::move(a)), issues(args.size(), false), negated(neg) {}

  std::size_t arity() const { return args.size(); }
  bool has_issue() const { return std::find(issues.begin(), issues.end(), true) != issues.end(); }

  Literal complement() const {
    Literal l = *this;
    l.negated = !negated;
    return l;
  }

  /// Arguments joined by ',' without issue markers; the sort key component.
  std::string printed_args() const {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].str();
    }
    return out;
  }

  std::string str() const {
    std::string out = negated ? "~" : "";
    out += predicate;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].str();
      if (i < issues.size() && issues[i]) out += '*';
    }
    out += ')';
    return out;
  }

  /// Identity: predicate, polarity and arguments. Issue flags do not count.
  friend bool operator==(const Literal& a, const Literal& b) {
    return a.predicate == b.predicate && a.negated == b.negated && a.args == b.args;
  }
};

/// Canonical literal order: predicate, then polarity (negative first), then
/// the printed argument list.
inline int compare_literals(const Literal& a, const Literal& b) {
  if (int c = a.predicate.compare(b.predicate)) return c < 0 ? -1 : 1;
  if (a.negated != b.negated) return a.negated ? -1 : 1;
  const std::string pa = a.printed_args();
  const std::string pb = b.printed_args();
  if (int c = pa.compare(pb)) return c < 0 ? -1 : 1;
  return 0;
}

struct LiteralLess {
  bool operator()(const Literal& a, const Literal& b) const { return compare_literals(a, b) < 0; }
};

/// A conjunctive set of literals, kept sorted and duplicate-free.
class State {
 public:
  State() = default;
  explicit State(std::vector<Literal> lits) : literals_(std::move(lits)) { normalize(); }

  const std::vector<Literal>& literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }

  auto begin() const { return literals_.begin(); }
  auto end() const { return literals_.end(); }

  bool contains(const Literal& l) const {
    auto it = std::lower_bound(literals_.begin(), literals_.end(), l, LiteralLess{});
    return it != literals_.end() && *it == l;
  }

  /// Identity containment: every literal of `other` occurs here.
  bool includes(const State& other) const {
    return std::all_of(other.begin(), other.end(), [&](const Literal& l) { return contains(l); });
  }

  /// A state holding an atom together with its negation.
  bool self_contradictory() const {
    for (const auto& l : literals_)
      if (!l.negated && contains(l.complement())) return true;
    return false;
  }

  /// Union; issue flags of identical literals are OR-ed together.
  State merged(const State& other) const {
    std::vector<Literal> all = literals_;
    all.insert(all.end(), other.literals_.begin(), other.literals_.end());
    return State(std::move(all));
  }

  std::string str() const {
    std::string out;
    for (const auto& l : literals_) out += l.str();
    return out;
  }

  friend bool operator==(const State& a, const State& b) { return a.literals_ == b.literals_; }

 private:
  void normalize() {
    std::stable_sort(literals_.begin(), literals_.end(), LiteralLess{});
    std::vector<Literal> out;
    out.reserve(literals_.size());
    for (auto& l : literals_) {
      if (!out.empty() && out.back() == l) {
        auto& keep = out.back();
        for (std::size_t i = 0; i < keep.issues.size() && i < l.issues.size(); ++i)
          keep.issues[i] = keep.issues[i] || l.issues[i];
        continue;
      }
      if (l.issues.size() != l.args.size()) l.issues.resize(l.args.size(), false);
      out.push_back(std::move(l));
    }
    literals_ = std::move(out);
  }

  std::vector<Literal> literals_;
};

inline int compare_states(const State& a, const State& b) {
  const auto& la = a.literals();
  const auto& lb = b.literals();
  const std::size_t n = std::min(la.size(), lb.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = compare_literals(la[i], lb[i])) return c;
  if (la.size() != lb.size()) return la.size() < lb.size() ? -1 : 1;
  return 0;
}

struct StateLess {
  bool operator()(const State& a, const State& b) const { return compare_states(a, b) < 0; }
};

/// Sort and deduplicate a set of states.
inline std::vector<State> normalize_states(std::vector<State> states) {
  std::stable_sort(states.begin(), states.end(), StateLess{});
  std::vector<State> out;
  for (auto& s : states) {
    if (!out.empty() && out.back() == s) {
      out.back() = out.back().merged(s);
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct QuantifiedVariable {
  std::string name;
  Quantifier quantifier = Quantifier::existential;
  friend bool operator==(const QuantifiedVariable&, const QuantifiedVariable&) = default;
};

using Substitution = std::map<std::string, Term>;

inline Term substitute(const Substitution& s, const Term& t) {
  if (t.constant) return t;
  auto it = s.find(t.name);
  return it == s.end() ? t : it->second;
}

inline Literal substitute(const Substitution& s, const Literal& l) {
  Literal out = l;
  for (auto& a : out.args) a = substitute(s, a);
  return out;
}

inline State substitute(const Substitution& s, const State& st) {
  std::vector<Literal> lits;
  lits.reserve(st.size());
  for (const auto& l : st) lits.push_back(substitute(s, l));
  return State(std::move(lits));
}

inline std::vector<State> substitute(const Substitution& s, const std::vector<State>& states) {
  std::vector<State> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(substitute(s, st));
  return normalize_states(std::move(out));
}

class ViewError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ViewError {
 public:
  enum class Kind { syntax, undeclared_variable, arity_mismatch, name_clash };

  ParseError(Kind kind, std::size_t position, const std::string& what)
      : ViewError(what + " at offset " + std::to_string(position)), kind_(kind), position_(position) {}

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

inline std::vector<State> verum_states() { return {State{}}; }

class View {
 public:
  /// The verum view "{0}".
  View() : stage_(verum_states()), supposition_(verum_states()) {}

  View(std::vector<QuantifiedVariable> prefix, std::vector<State> stage,
       std::vector<State> supposition = verum_states())
      : prefix_(std::move(prefix)),
        stage_(normalize_states(std::move(stage))),
        supposition_(normalize_states(std::move(supposition))) {
    validate();
  }

  static View verum() { return View(); }
  static View absurd() { return View({}, {}); }

  const std::vector<QuantifiedVariable>& prefix() const { return prefix_; }
  const std::vector<State>& stage() const { return stage_; }
  const std::vector<State>& supposition() const { return supposition_; }

  bool is_verum() const { return stage_.size() == 1 && stage_.front().empty(); }
  bool is_absurd() const { return stage_.empty(); }
  bool has_verum_supposition() const { return supposition_.size() == 1 && supposition_.front().empty(); }
  /// Exactly one alternative and no supposition.
  bool is_categorical() const { return stage_.size() == 1 && has_verum_supposition(); }

  std::optional<Quantifier> quantifier_of(const std::string& var) const {
    for (const auto& q : prefix_)
      if (q.name == var) return q.quantifier;
    return std::nullopt;
  }

  /// Variables that actually occur in stage or supposition.
  std::set<std::string> used_variables() const {
    std::set<std::string> out;
    auto scan = [&](const std::vector<State>& states) {
      for (const auto& s : states)
        for (const auto& l : s)
          for (const auto& t : l.args)
            if (t.is_variable()) out.insert(t.name);
    };
    scan(stage_);
    scan(supposition_);
    return out;
  }

  std::set<std::string> constants() const {
    std::set<std::string> out;
    for_each_literal([&](const Literal& l) {
      for (const auto& t : l.args)
        if (t.constant) out.insert(t.name);
    });
    return out;
  }

  /// predicate -> arity
  std::map<std::string, std::size_t> predicates() const {
    std::map<std::string, std::size_t> out;
    for_each_literal([&](const Literal& l) { out.emplace(l.predicate, l.arity()); });
    return out;
  }

  template <class F>
  void for_each_literal(F&& f) const {
    for (const auto& s : stage_)
      for (const auto& l : s) f(l);
    for (const auto& s : supposition_)
      for (const auto& l : s) f(l);
  }

  /// Drop prefix entries whose variable does not occur.
  View without_unused_variables() const {
    const auto used = used_variables();
    std::vector<QuantifiedVariable> prefix;
    for (const auto& q : prefix_)
      if (used.count(q.name)) prefix.push_back(q);
    return View(std::move(prefix), stage_, supposition_);
  }

  std::string str() const;

  friend bool operator==(const View& a, const View& b) {
    return a.prefix_ == b.prefix_ && a.stage_ == b.stage_ && a.supposition_ == b.supposition_;
  }

 private:
  void validate() const {
    std::set<std::string> declared;
    for (const auto& q : prefix_)
      if (!declared.insert(q.name).second) throw ViewError("variable '" + q.name + "' declared twice");
    std::map<std::string, std::size_t> arity;
    std::set<std::string> consts;
    for_each_literal([&](const Literal& l) {
      auto [it, fresh] = arity.emplace(l.predicate, l.arity());
      if (!fresh && it->second != l.arity())
        throw ViewError("predicate '" + l.predicate + "' used with arities " + std::to_string(it->second) +
                        " and " + std::to_string(l.arity()));
      for (const auto& t : l.args) {
        if (t.constant)
          consts.insert(t.name);
        else if (!declared.count(t.name))
          throw ViewError("variable '" + t.name + "' is not declared in the prefix");
      }
    });
    for (const auto& c : consts)
      if (declared.count(c)) throw ViewError("'" + c + "' is used both as a constant and a variable");
  }

  std::vector<QuantifiedVariable> prefix_;
  std::vector<State> stage_;
  std::vector<State> supposition_;
};

namespace detail {

inline std::string print_states(const std::vector<State>& states) {
  if (states.size() == 1 && states.front().empty()) return "{0}";
  std::string out = "{";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ',';
    out += states[i].str();
  }
  out += '}';
  return out;
}

inline bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '_'; }

constexpr std::string_view kExists = "\xE2\x88\x83";  // ∃
constexpr std::string_view kForall = "\xE2\x88\x80";  // ∀

class ViewParser {
 public:
  explicit ViewParser(std::string_view src) : src_(src) {}

  View parse() {
    std::vector<QuantifiedVariable> prefix = parse_prefix();
    for (const auto& q : prefix) declared_.insert(q.name);
    std::vector<State> stage = parse_braced_states();
    std::vector<State> supposition = verum_states();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      supposition = parse_braced_states();
    }
    skip_ws();
    if (pos_ != src_.size()) fail(ParseError::Kind::syntax, "unexpected trailing input");
    for (const auto& [name, at] : constant_sites_)
      if (declared_.count(name))
        throw ParseError(ParseError::Kind::name_clash, at, "'" + name + "' is both a constant and a variable");
    return View(std::move(prefix), std::move(stage), std::move(supposition));
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const { throw ParseError(kind, pos_, msg); }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(ParseError::Kind::syntax, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    if (!ident_start(peek())) fail(ParseError::Kind::syntax, "expected identifier");
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::vector<QuantifiedVariable> parse_prefix() {
    std::vector<QuantifiedVariable> prefix;
    std::set<std::string> seen;
    for (;;) {
      skip_ws();
      if (peek() == '{' || pos_ >= src_.size()) break;
      Quantifier q;
      if (starts_with(kExists)) {
        pos_ += kExists.size();
        q = Quantifier::existential;
      } else if (starts_with(kForall)) {
        pos_ += kForall.size();
        q = Quantifier::universal;
      } else {
        const std::size_t at = pos_;
        const std::string tok = ident();
        if (tok == "E") {
          q = Quantifier::existential;
        } else if (tok == "A") {
          q = Quantifier::universal;
        } else {
          pos_ = at;
          fail(ParseError::Kind::syntax, "expected quantifier or '{'");
        }
      }
      const std::size_t at = pos_;
      std::string var = ident();
      if (!seen.insert(var).second) throw ParseError(ParseError::Kind::syntax, at, "variable '" + var + "' declared twice");
      prefix.push_back({std::move(var), q});
    }
    return prefix;
  }

  std::vector<State> parse_braced_states() {
    expect('{');
    skip_ws();
    std::vector<State> states;
    if (peek() == '}') {
      ++pos_;
      return states;
    }
    if (peek() == '0') {
      ++pos_;
      expect('}');
      return verum_states();
    }
    for (;;) {
      states.push_back(parse_state());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == '}') {
        ++pos_;
        break;
      }
      fail(ParseError::Kind::syntax, "expected ',' or '}'");
    }
    return states;
  }

  State parse_state() {
    std::vector<Literal> lits;
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c == ',' || c == '}') break;
      lits.push_back(parse_literal());
    }
    if (lits.empty()) fail(ParseError::Kind::syntax, "empty state");
    return State(std::move(lits));
  }

  Literal parse_literal() {
    skip_ws();
    bool negated = false;
    if (peek() == '~') {
      negated = true;
      ++pos_;
    }
    const std::size_t at = pos_;
    Literal lit;
    lit.predicate = ident();
    lit.negated = negated;
    expect('(');
    skip_ws();
    if (peek() != ')') {
      for (;;) {
        auto [term, issue] = parse_term();
        lit.args.push_back(std::move(term));
        lit.issues.push_back(issue);
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    auto [it, fresh] = arity_.emplace(lit.predicate, lit.arity());
    if (!fresh && it->second != lit.arity())
      throw ParseError(ParseError::Kind::arity_mismatch, at,
                       "predicate '" + lit.predicate + "' expects " + std::to_string(it->second) + " argument(s)");
    return lit;
  }

  std::pair<Term, bool> parse_term() {
    const std::size_t at = pos_;
    std::string name = ident();
    skip_ws();
    Term term;
    if (peek() == '(') {
      ++pos_;
      expect(')');
      term = Term::make_constant(std::move(name));
      constant_sites_.emplace(term.name, at);
    } else {
      if (!declared_.count(name))
        throw ParseError(ParseError::Kind::undeclared_variable, at, "variable '" + name + "' is not declared");
      term = Term::make_variable(std::move(name));
    }
    skip_ws();
    bool issue = false;
    if (peek() == '*') {
      issue = true;
      ++pos_;
    }
    return {std::move(term), issue};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::set<std::string> declared_;
  std::map<std::string, std::size_t> arity_;
  std::map<std::string, std::size_t> constant_sites_;
};

}  // namespace detail

/// Parse the shorthand notation, e.g. "∃g {King(g*)Has(Sally(),g)}".
/// ASCII aliases: E for ∃, A for ∀, ~ for negation.
inline View parse_view(std::string_view text) { return detail::ViewParser(text).parse(); }

/// Canonical text: prefix in declaration order, literals and states sorted.
inline std::string print_view(const View& v) {
  std::string out;
  for (const auto& q : v.prefix()) {
    out += q.quantifier == Quantifier::existential ? detail::kExists : detail::kForall;
    out += q.name;
    out += ' ';
  }
  out += detail::print_states(v.stage());
  if (!v.has_verum_supposition()) {
    out += '^';
    out += detail::print_states(v.supposition());
  }
  return out;
}

inline std::string View::str() const { return print_view(*this); }

/// Literal occurrences in stage plus supposition.
inline std::size_t atom_count(const View& v) {
  std::size_t n = 0;
  for (const auto& s : v.stage()) n += s.size();
  for (const auto& s : v.supposition()) n += s.size();
  return n;
}

inline std::size_t atom_count(const std::vector<View>& views) {
  std::size_t n = 0;
  for (const auto& v : views) n += atom_count(v);
  return n;
}

namespace detail {

// Strip issue flags so set comparison follows literal identity only.
inline std::vector<State> without_issues(const std::vector<State>& states) {
  std::vector<State> out;
  for (const auto& s : states) {
    std::vector<Literal> lits(s.begin(), s.end());
    for (auto& l : lits) l.issues.assign(l.args.size(), false);
    out.emplace_back(std::move(lits));
  }
  return normalize_states(std::move(out));
}

// Quantifier blocks: maximal runs of the same quantifier in the prefix.
inline std::vector<std::pair<Quantifier, std::vector<std::string>>> blocks(const std::vector<QuantifiedVariable>& p) {
  std::vector<std::pair<Quantifier, std::vector<std::string>>> out;
  for (const auto& q : p) {
    if (out.empty() || out.back().first != q.quantifier) out.push_back({q.quantifier, {}});
    out.back().second.push_back(q.name);
  }
  return out;
}

// Occurrence signature of a variable: which (predicate, position, polarity,
// region) slots it fills. Renamings must preserve it.
inline std::multiset<std::string> signature(const View& v, const std::string& var) {
  std::multiset<std::string> sig;
  auto scan = [&](const std::vector<State>& states, char region) {
    for (const auto& s : states)
      for (const auto& l : s)
        for (std::size_t i = 0; i < l.args.size(); ++i)
          if (l.args[i].is_variable() && l.args[i].name == var)
            sig.insert(std::string(1, region) + (l.negated ? "~" : "+") + l.predicate + "#" + std::to_string(i));
  };
  scan(v.stage(), 's');
  scan(v.supposition(), 'p');
  return sig;
}

}  // namespace detail

struct AlphaOptions {
  bool compare_issues = false;
};

/// True iff a quantifier-preserving bijective renaming of variables makes the
/// two views identical as sets. Adjacent quantifiers of the same kind commute.
inline bool alpha_equal(const View& a, const View& b, AlphaOptions opts = {}) {
  if (a.stage().size() != b.stage().size() || a.supposition().size() != b.supposition().size()) return false;
  if (atom_count(a) != atom_count(b)) return false;
  if (a.constants() != b.constants() || a.predicates() != b.predicates()) return false;
  const auto ba = detail::blocks(a.prefix());
  const auto bb = detail::blocks(b.prefix());
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i)
    if (ba[i].first != bb[i].first || ba[i].second.size() != bb[i].second.size()) return false;

  auto prepare = [&](const std::vector<State>& s) { return opts.compare_issues ? s : detail::without_issues(s); };
  const auto b_stage = prepare(b.stage());
  const auto b_sup = prepare(b.supposition());

  // Candidate pairs by block and signature.
  std::vector<std::string> a_vars;
  std::vector<std::vector<std::string>> candidates;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    for (const auto& va : ba[i].second) {
      const auto sa = detail::signature(a, va);
      std::vector<std::string> cands;
      for (const auto& vb : bb[i].second)
        if (detail::signature(b, vb) == sa) cands.push_back(vb);
      if (cands.empty()) return false;
      a_vars.push_back(va);
      candidates.push_back(std::move(cands));
    }
  }

  Substitution rename;
  std::set<std::string> taken;
  auto same = [&](const std::vector<State>& x, const std::vector<State>& y) {
    if (x != y) return false;
    if (!opts.compare_issues) return true;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x[i].size(); ++j)
        if (x[i].literals()[j].issues != y[i].literals()[j].issues) return false;
    return true;
  };
  auto check = [&]() {
    return same(prepare(substitute(rename, a.stage())), b_stage) &&
           same(prepare(substitute(rename, a.supposition())), b_sup);
  };
  auto search = [&](auto&& self, std::size_t i) -> bool {
    if (i == a_vars.size()) return check();
    for (const auto& vb : candidates[i]) {
      if (taken.count(vb)) continue;
      taken.insert(vb);
      rename[a_vars[i]] = Term::make_variable(vb);
      if (self(self, i + 1)) return true;
      taken.erase(vb);
    }
    rename.erase(a_vars[i]);
    return false;
  };
  return search(search, 0);
}

}  // namespace etr
