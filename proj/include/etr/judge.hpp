// Reading model answers back into views and scoring them against the
// engine's prediction and the oracle.
#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/engine.hpp"
#include "etr/oracle.hpp"
#include "etr/render.hpp"

namespace etr {

class AnswerParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AnswerStatus { parsed, nothing_follows, parse_error };

inline std::string to_string(AnswerStatus s) {
  switch (s) {
    case AnswerStatus::parsed: return "parsed";
    case AnswerStatus::nothing_follows: return "nothing-follows";
    case AnswerStatus::parse_error: return "parse-error";
  }
  return "";
}

inline AnswerStatus answer_status_from_string(const std::string& s) {
  if (s == "parsed") return AnswerStatus::parsed;
  if (s == "nothing-follows") return AnswerStatus::nothing_follows;
  if (s == "parse-error") return AnswerStatus::parse_error;
  throw std::invalid_argument("unknown answer status: " + s);
}

struct ParsedAnswer {
  AnswerStatus status = AnswerStatus::parse_error;
  std::optional<View> conclusion;
  std::string raw;
  std::string error;

  /// The view judged downstream: verum for nothing-follows.
  View effective() const { return conclusion ? *conclusion : View::verum(); }
};

enum class JudgeMode { endorsement, exact, equivalence };

inline std::string to_string(JudgeMode m) {
  switch (m) {
    case JudgeMode::endorsement: return "endorsement";
    case JudgeMode::exact: return "exact";
    case JudgeMode::equivalence: return "up-to-equivalence";
  }
  return "";
}

inline JudgeMode judge_mode_from_string(const std::string& s) {
  if (s == "endorsement") return JudgeMode::endorsement;
  if (s == "exact") return JudgeMode::exact;
  if (s == "up-to-equivalence" || s == "equivalence") return JudgeMode::equivalence;
  throw std::invalid_argument("unknown judge mode: " + s);
}

struct Verdict {
  bool logically_correct = false;
  bool etr_predicted = false;
  bool human_like_fallacy = false;
  JudgeMode mode = JudgeMode::endorsement;
};

namespace detail {

inline char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

inline std::string lowercase(std::string s) {
  for (auto& c : s) c = lower(c);
  return s;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (lower(s[i]) != lower(prefix[i])) return false;
  return true;
}

inline bool equals_ci(std::string_view a, std::string_view b) { return a.size() == b.size() && starts_with_ci(a, b); }

inline std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + sep.size())
    out.push_back(s.substr(start, pos - start));
  out.push_back(s.substr(start));
  return out;
}

// Inverse of render_clause over one mapping.
class ClauseParser {
 public:
  explicit ClauseParser(const ThemeMapping& m) : m_(m) {}

  View parse(std::string text) {
    text = trim(text);
    while (!text.empty() && (text.back() == '.' || text.back() == '!')) text.pop_back();
    text = trim(text);
    if (text.empty()) throw AnswerParseError("empty clause");
    if (equals_ci(text, "nothing follows")) return View::verum();
    if (equals_ci(text, "a contradiction follows")) return View::absurd();

    std::vector<QuantifiedVariable> prefix;
    for (bool more = true; more;) {
      more = false;
      for (const auto& [intro, q] : quantifier_intros) {
        if (!starts_with_ci(text, intro)) continue;
        std::size_t i = intro.size();
        std::size_t j = i;
        while (j < text.size() && (std::isupper(static_cast<unsigned char>(text[j])) ||
                                   (j > i && std::isdigit(static_cast<unsigned char>(text[j])))))
          ++j;
        if (j == i) throw AnswerParseError("expected a variable after '" + std::string(intro) + "'");
        const std::string var = text.substr(i, j - i);
        std::string rest = text.substr(j);
        bool linked = false;
        for (std::string_view link : {" is such that ", " such that ", ", "})
          if (starts_with_ci(rest, link)) {
            rest = rest.substr(link.size());
            linked = true;
            break;
          }
        if (!linked) throw AnswerParseError("expected 'such that' after " + var);
        vars_[var] = fresh_name(var);
        prefix.push_back({vars_[var], q});
        text = rest;
        more = true;
        break;
      }
    }

    std::vector<State> sup = verum_states();
    if (starts_with_ci(text, "if ")) {
      const auto cut = text.find(", then ");
      if (cut == std::string::npos) throw AnswerParseError("conditional without ', then'");
      sup = states(text.substr(3, cut - 3));
      text = text.substr(cut + 7);
    }
    std::vector<State> stage = states(text);
    try {
      return View(prefix, stage, sup).without_unused_variables();
    } catch (const ViewError& e) {
      throw AnswerParseError(e.what());
    }
  }

 private:
  static constexpr std::pair<std::string_view, Quantifier> quantifier_intros[] = {
      {"there is some ", Quantifier::existential}, {"there exists some ", Quantifier::existential},
      {"there exists ", Quantifier::existential},  {"for every ", Quantifier::universal},
      {"for all ", Quantifier::universal},         {"every ", Quantifier::universal},
  };

  std::string fresh_name(const std::string& token) {
    std::string base = lowercase(token);
    std::string name = base;
    for (int i = 1; m_.terms.count(name) || used_.count(name); ++i) name = base + std::to_string(i);
    used_.insert(name);
    return name;
  }

  std::vector<State> states(std::string text) {
    text = trim(text);
    if (starts_with_ci(text, "either ")) text = text.substr(7);
    auto parts = split(text, ", or ");
    if (parts.size() == 1) parts = split(text, " or ");
    std::vector<State> out;
    for (const auto& p : parts) out.push_back(state(p));
    return out;
  }

  State state(const std::string& text) {
    std::vector<Literal> lits;
    for (auto part : split(text, " and ")) {
      part = trim(part);
      if (part.size() > 1 && part.back() == ',') part.pop_back();
      lits.push_back(literal(trim(part)));
    }
    return State(lits);
  }

  Literal literal(const std::string& text) {
    std::optional<Term> subject;
    std::size_t used = 0;
    for (const auto& [token, name] : vars_)
      if (text.size() > token.size() && text.compare(0, token.size(), token) == 0 && text[token.size()] == ' ' &&
          token.size() > used) {
        subject = Term::make_variable(name);
        used = token.size();
      }
    for (const auto& [constant, phrase] : m_.terms)
      if (text.size() > phrase.size() && starts_with_ci(text, phrase) && text[phrase.size()] == ' ' &&
          phrase.size() > used) {
        subject = Term::make_constant(constant);
        used = phrase.size();
      }
    if (!subject) throw AnswerParseError("no known entity in '" + text + "'");
    const std::string rest = text.substr(used + 1);
    for (const auto& [predicate, attr] : m_.predicates) {
      const Copula c = m_.theme.copula(attr);
      if (equals_ci(rest, c.positive)) return Literal(predicate, {*subject}, false);
      if (equals_ci(rest, c.negative)) return Literal(predicate, {*subject}, true);
    }
    throw AnswerParseError("no known attribute in '" + rest + "'");
  }

  const ThemeMapping& m_;
  std::map<std::string, std::string> vars_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Parse one rendered sentence back into a view. Throws AnswerParseError.
inline View parse_clause(const std::string& text, const ThemeMapping& m) { return detail::ClauseParser(m).parse(text); }

inline bool says_nothing_follows(const std::string& text) {
  const std::string t = detail::lowercase(text);
  for (const char* marker : {"nothing follows", "nothing can be concluded", "nothing definite", "cannot conclude",
                             "cannot definitively conclude", "can't conclude", "cannot be concluded",
                             "no conclusion", "cannot determine", "nothing further follows"})
    if (t.find(marker) != std::string::npos) return true;
  return false;
}

/// The conclusion sentence of an answer: the rest of the first line after
/// "Answer:" with the standard lead-in removed.
inline std::string answer_sentence(const std::string& text) {
  std::string body = text;
  const std::string lower = detail::lowercase(text);
  if (auto pos = lower.find("answer:"); pos != std::string::npos) body = text.substr(pos + 7);
  body = trim(body);
  if (auto nl = body.find('\n'); nl != std::string::npos) body = body.substr(0, nl);
  body = trim(body);
  for (std::string_view lead : {"from the premises, ", "from these premises, ", "therefore, ", "thus, "})
    if (detail::starts_with_ci(body, lead)) body = body.substr(lead.size());
  for (std::string_view lead : {"we can conclude that ", "we can conclude ", "it follows that "})
    if (detail::starts_with_ci(body, lead)) body = body.substr(lead.size());
  return trim(body);
}

inline ParsedAnswer parse_answer(const std::string& text, const ThemeMapping& m) {
  ParsedAnswer a;
  a.raw = text;
  const std::string sentence = answer_sentence(text);
  if (sentence.empty()) {
    a.error = "empty answer";
    return a;
  }
  if (says_nothing_follows(sentence)) {
    a.status = AnswerStatus::nothing_follows;
    return a;
  }
  try {
    View v = parse_clause(sentence, m);
    if (v.is_verum()) {
      a.status = AnswerStatus::nothing_follows;
      return a;
    }
    a.conclusion = std::move(v);
    a.status = AnswerStatus::parsed;
  } catch (const AnswerParseError& e) {
    a.error = e.what();
  }
  return a;
}

/// Score an answer. nothing-follows is always logically correct and never
/// ETR-predicted.
inline Verdict judge_response(const std::vector<View>& premises, const View& predicted, const ParsedAnswer& a,
                              JudgeMode mode = JudgeMode::endorsement, const OracleConfig& cfg = {}) {
  if (a.status == AnswerStatus::parse_error) throw std::invalid_argument("cannot judge an unparsed answer");
  Verdict v;
  v.mode = mode;
  if (a.status == AnswerStatus::nothing_follows) {
    v.logically_correct = true;
    return v;
  }
  const View& c = *a.conclusion;
  v.logically_correct = entails(premises, c, cfg);
  switch (mode) {
    case JudgeMode::endorsement: v.etr_predicted = does_it_follow(premises, c); break;
    case JudgeMode::exact: v.etr_predicted = alpha_equal(c, predicted); break;
    case JudgeMode::equivalence: v.etr_predicted = equivalent(c, predicted, cfg); break;
  }
  v.human_like_fallacy = v.etr_predicted && !v.logically_correct;
  return v;
}

inline Verdict judge_response(const Problem& p, const ParsedAnswer& a, JudgeMode mode = JudgeMode::endorsement,
                              const OracleConfig& cfg = {}) {
  return judge_response(p.premises, p.predicted, a, mode, cfg);
}

}  // namespace etr
