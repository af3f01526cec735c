// Per-model aggregates over a run store, the order-reversal comparison,
// correlations against capability tables, and report emission.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "etr/harness.hpp"
#include "etr/stats.hpp"
#include "json.hpp"

namespace etr {

class UndefinedRate : public StatsError {
 public:
  using StatsError::StatsError;
};

/// Throws if a record's verdict breaks fallacy = predicted and not correct.
inline void check_verdict_identity(const RunRecord& r) {
  if (!r.verdict) return;
  const auto& v = *r.verdict;
  if (v.human_like_fallacy != (v.etr_predicted && !v.logically_correct))
    throw StatsError("verdict identity violated in record " + r.key());
}

/// Fallacies over logically incorrect answers, judged records only.
inline double fallacy_rate(const std::vector<RunRecord>& records) {
  std::size_t incorrect = 0, fallacies = 0;
  for (const auto& r : records) {
    if (!r.judged()) continue;
    check_verdict_identity(r);
    if (r.verdict->logically_correct) continue;
    ++incorrect;
    if (r.verdict->human_like_fallacy) ++fallacies;
  }
  if (incorrect == 0) throw UndefinedRate("fallacy rate undefined: no logically incorrect answers");
  return static_cast<double>(fallacies) / static_cast<double>(incorrect);
}

struct ModelStats {
  std::string model;
  std::size_t n_answered = 0;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  std::size_t n_fallacy = 0;
  std::optional<double> fallacy_rate;
  double correctness_rate = 0;
};

/// Stats per model over records of one presentation order.
inline std::vector<ModelStats> model_stats(const std::vector<RunRecord>& records, Order order = Order::original) {
  std::map<std::string, ModelStats> by;
  for (const auto& r : records) {
    if (!r.judged() || r.order != order) continue;
    check_verdict_identity(r);
    auto& s = by[r.model];
    s.model = r.model;
    ++s.n_answered;
    if (r.verdict->logically_correct) {
      ++s.n_correct;
    } else {
      ++s.n_incorrect;
      if (r.verdict->human_like_fallacy) ++s.n_fallacy;
    }
  }
  std::vector<ModelStats> out;
  for (auto& [_, s] : by) {
    s.correctness_rate = static_cast<double>(s.n_correct) / static_cast<double>(s.n_answered);
    if (s.n_incorrect) s.fallacy_rate = static_cast<double>(s.n_fallacy) / static_cast<double>(s.n_incorrect);
    out.push_back(s);
  }
  return out;
}

struct ReversalRow {
  std::string model;
  std::size_t original_fallacies = 0;  // among paired problems
  std::size_t blocked = 0;             // of those, reversed answer correct
  double blocked_fraction = 0;
  std::size_t n_original = 0;
  std::size_t n_reversed = 0;
  std::size_t fallacies_original = 0;
  std::size_t fallacies_reversed = 0;
  ZTest test;
};

/// Models lacking paired records are skipped.
inline std::vector<ReversalRow> reversal_effect(const std::vector<RunRecord>& records, bool two_sided = true) {
  std::map<std::string, std::map<std::string, std::pair<const RunRecord*, const RunRecord*>>> pairs;
  for (const auto& r : records) {
    if (!r.judged()) continue;
    check_verdict_identity(r);
    auto& slot = pairs[r.model][r.problem_id];
    (r.order == Order::original ? slot.first : slot.second) = &r;
  }
  std::vector<ReversalRow> out;
  for (const auto& [model, problems] : pairs) {
    ReversalRow row;
    row.model = model;
    bool paired = false;
    for (const auto& [_, pr] : problems) {
      const auto [orig, rev] = pr;
      if (orig) {
        ++row.n_original;
        row.fallacies_original += orig->verdict->human_like_fallacy;
      }
      if (rev) {
        ++row.n_reversed;
        row.fallacies_reversed += rev->verdict->human_like_fallacy;
      }
      if (!orig || !rev) continue;
      paired = true;
      if (!orig->verdict->human_like_fallacy) continue;
      ++row.original_fallacies;
      if (rev->verdict->logically_correct) ++row.blocked;
    }
    if (!paired) continue;
    row.blocked_fraction =
        row.original_fallacies ? static_cast<double>(row.blocked) / static_cast<double>(row.original_fallacies) : 0.0;
    row.test = two_proportion_z(row.fallacies_original, row.n_original, row.fallacies_reversed, row.n_reversed,
                                two_sided);
    out.push_back(row);
  }
  return out;
}

/// Rows of (model, metric, value) from a comma-separated file with header
/// "model_id,metric,value".
class CapabilityTable {
 public:
  void add(const std::string& model, const std::string& metric, double value) {
    auto key = std::make_pair(model, metric);
    if (values_.count(key)) throw std::invalid_argument("duplicate capability row: " + model + "," + metric);
    values_[key] = value;
    if (std::find(models_.begin(), models_.end(), model) == models_.end()) models_.push_back(model);
  }

  /// Exact id first, then the part after the provider prefix.
  std::optional<double> value(const std::string& model, const std::string& metric) const {
    if (auto it = values_.find({model, metric}); it != values_.end()) return it->second;
    if (auto slash = model.find('/'); slash != std::string::npos)
      if (auto it = values_.find({model.substr(slash + 1), metric}); it != values_.end()) return it->second;
    return std::nullopt;
  }

  const std::vector<std::string>& models() const { return models_; }

  static CapabilityTable parse(std::istream& in) {
    CapabilityTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
      if (lineno == 1 && f.size() == 3 && f[0] == "model_id") continue;
      if (f.size() != 3) throw std::invalid_argument("capability line " + std::to_string(lineno) + ": expected 3 fields");
      try {
        t.add(f[0], f[1], std::stod(f[2]));
      } catch (const std::logic_error&) {
        throw std::invalid_argument("capability line " + std::to_string(lineno) + ": bad value '" + f[2] + "'");
      }
    }
    return t;
  }

  static CapabilityTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in);
  }

 private:
  std::map<std::pair<std::string, std::string>, double> values_;
  std::vector<std::string> models_;
};

struct CorrelationReport {
  std::string x_name;
  std::string y_name;
  std::vector<std::string> models;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> x_ranks;
  std::vector<double> y_ranks;
  Correlation pearson_r;
  Correlation spearman_rho;
  std::optional<ExpFit> fit;  // y on x, when all y > 0
};

inline CorrelationReport correlate(std::string x_name, std::string y_name, std::vector<std::string> models,
                                   std::vector<double> xs, std::vector<double> ys) {
  CorrelationReport c;
  c.x_name = std::move(x_name);
  c.y_name = std::move(y_name);
  c.models = std::move(models);
  c.xs = std::move(xs);
  c.ys = std::move(ys);
  c.x_ranks = average_ranks(c.xs);
  c.y_ranks = average_ranks(c.ys);
  c.pearson_r = pearson(c.xs, c.ys);
  c.spearman_rho = spearman(c.xs, c.ys);
  if (std::all_of(c.ys.begin(), c.ys.end(), [](double y) { return y > 0; })) c.fit = exp_fit(c.xs, c.ys);
  return c;
}

/// Two metrics of a capability table over the models that have both.
inline CorrelationReport correlate_metrics(const CapabilityTable& t, const std::string& x, const std::string& y) {
  std::vector<std::string> models;
  std::vector<double> xs, ys;
  for (const auto& m : t.models()) {
    auto vx = t.value(m, x);
    auto vy = t.value(m, y);
    if (!vx || !vy) continue;
    models.push_back(m);
    xs.push_back(*vx);
    ys.push_back(*vy);
  }
  return correlate(x, y, models, xs, ys);
}

/// Fallacy rate of each model against a capability metric.
inline CorrelationReport correlate_fallacy_rate(const std::vector<ModelStats>& stats, const CapabilityTable& t,
                                                const std::string& metric) {
  std::vector<std::string> models;
  std::vector<double> xs, ys;
  for (const auto& s : stats) {
    auto v = t.value(s.model, metric);
    if (!v || !s.fallacy_rate) continue;
    models.push_back(s.model);
    xs.push_back(*v);
    ys.push_back(*s.fallacy_rate);
  }
  return correlate(metric, "fallacy_rate", models, xs, ys);
}

inline nlohmann::json to_json(const CorrelationReport& c) {
  nlohmann::json j = {{"x", c.x_name},
                      {"y", c.y_name},
                      {"n", c.xs.size()},
                      {"pearson", {{"r", c.pearson_r.r}, {"p", c.pearson_r.p}}},
                      {"spearman", {{"rho", c.spearman_rho.r}, {"p", c.spearman_rho.p}}},
                      {"points", nlohmann::json::array()}};
  for (std::size_t i = 0; i < c.xs.size(); ++i)
    j["points"].push_back(
        {{"model", c.models[i]}, {"x", c.xs[i]}, {"y", c.ys[i]}, {"x_rank", c.x_ranks[i]}, {"y_rank", c.y_ranks[i]}});
  if (c.fit)
    j["exp_fit"] = {{"slope", c.fit->slope}, {"intercept", c.fit->intercept}, {"r", c.fit->r}, {"p", c.fit->p}};
  return j;
}

inline std::string format_double(double v, int digits = 6) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// One row per model: original-order stats joined with the reversal row.
inline void write_summary_csv(std::ostream& out, const std::vector<ModelStats>& stats,
                              const std::vector<ReversalRow>& reversal) {
  std::map<std::string, const ReversalRow*> rev;
  for (const auto& r : reversal) rev[r.model] = &r;
  out << "model,n_answered,n_incorrect,n_fallacy,fallacy_rate,correctness_rate,blocked_fraction,z,p\n";
  for (const auto& s : stats) {
    out << s.model << "," << s.n_answered << "," << s.n_incorrect << "," << s.n_fallacy << ","
        << (s.fallacy_rate ? format_double(*s.fallacy_rate) : "") << "," << format_double(s.correctness_rate) << ",";
    if (auto it = rev.find(s.model); it != rev.end())
      out << format_double(it->second->blocked_fraction) << "," << format_double(it->second->test.z) << ","
          << format_double(it->second->test.p);
    else
      out << ",,";
    out << "\n";
  }
}

inline nlohmann::json results_json(const std::vector<ModelStats>& stats, const std::vector<ReversalRow>& reversal,
                                   const ExclusionManifest& exclusions,
                                   const std::vector<CorrelationReport>& correlations = {}) {
  nlohmann::json j = {{"models", nlohmann::json::array()},
                      {"reversal", nlohmann::json::array()},
                      {"exclusions", to_json(exclusions)},
                      {"correlations", nlohmann::json::array()}};
  for (const auto& s : stats)
    j["models"].push_back({{"model", s.model},
                           {"n_answered", s.n_answered},
                           {"n_incorrect", s.n_incorrect},
                           {"n_fallacy", s.n_fallacy},
                           {"fallacy_rate", s.fallacy_rate ? nlohmann::json(*s.fallacy_rate) : nlohmann::json()},
                           {"correctness_rate", s.correctness_rate}});
  for (const auto& r : reversal)
    j["reversal"].push_back({{"model", r.model},
                             {"original_fallacies", r.original_fallacies},
                             {"blocked", r.blocked},
                             {"blocked_fraction", r.blocked_fraction},
                             {"n_original", r.n_original},
                             {"n_reversed", r.n_reversed},
                             {"fallacies_original", r.fallacies_original},
                             {"fallacies_reversed", r.fallacies_reversed},
                             {"z", r.test.z},
                             {"p", r.test.p},
                             {"degenerate", r.test.degenerate}});
  for (const auto& c : correlations) j["correlations"].push_back(to_json(c));
  return j;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char ch : in) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

/// Static scatter plot with the fitted exponential curve on a log y-axis.
inline std::string scatter_svg(const CorrelationReport& c, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  if (c.xs.empty()) return s.str() + "</svg>\n";
  const bool log_y = c.fit.has_value();
  auto ty = [&](double y) { return log_y ? std::log(y) : y; };
  double x0 = *std::min_element(c.xs.begin(), c.xs.end()), x1 = *std::max_element(c.xs.begin(), c.xs.end());
  double y0 = ty(*std::min_element(c.ys.begin(), c.ys.end())), y1 = ty(*std::max_element(c.ys.begin(), c.ys.end()));
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"12\">" << xml_escape(c.x_name) << "</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
    << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << xml_escape(c.y_name) << (log_y ? " (log)" : "") << "</text>\n";
  for (std::size_t i = 0; i < c.xs.size(); ++i)
    s << "<circle cx=\"" << format_double(px(c.xs[i])) << "\" cy=\"" << format_double(py(c.ys[i]))
      << "\" r=\"4\" fill=\"steelblue\"><title>" << xml_escape(c.models[i]) << "</title></circle>\n";
  if (c.fit) {
    s << "<polyline fill=\"none\" stroke=\"firebrick\" points=\"";
    for (int k = 0; k <= 50; ++k) {
      const double x = x0 + (x1 - x0) * k / 50.0;
      const double y = std::exp(c.fit->intercept + c.fit->slope * x);
      s << format_double(px(x)) << "," << format_double(py(y)) << " ";
    }
    s << "\"/>\n";
  }
  s << "<text x=\"" << W - R << "\" y=\"" << T << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
    << "font-size=\"12\">r = " << format_double(c.pearson_r.r, 3) << ", rho = " << format_double(c.spearman_rho.r, 3)
    << "</text>\n";
  return s.str() + "</svg>\n";
}

}  // namespace etr
