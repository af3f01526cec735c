// Correlation, proportion tests and the log-linear fit.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace etr {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * detail::beta_cf(a, b, x) / a;
  return 1.0 - std::exp(log_front) * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

struct Correlation {
  double r = 0;
  double p = 1;
  std::size_t n = 0;
};

inline Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw StatsError("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw StatsError("pearson: need at least 3 points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw StatsError("pearson: zero variance");
  Correlation c;
  c.n = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  if (std::fabs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    c.p = student_t_two_sided(t, df);
  }
  return c;
}

/// 1-based ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw StatsError("spearman: length mismatch");
  return pearson(average_ranks(xs), average_ranks(ys));
}

struct ZTest {
  double z = 0;
  double p = 1;
  bool degenerate = false;  // pooled proportion 0 or 1
};

/// Pooled two-proportion z-test of k1/n1 against k2/n2.
inline ZTest two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2, bool two_sided = true) {
  if (n1 == 0 || n2 == 0) throw StatsError("two_proportion_z: empty sample");
  if (k1 > n1 || k2 > n2) throw StatsError("two_proportion_z: count exceeds sample size");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  ZTest t;
  if (pooled <= 0.0 || pooled >= 1.0) {
    t.degenerate = true;
    return t;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  t.z = (p1 - p2) / se;
  t.p = two_sided ? normal_two_sided(t.z) : 1.0 - normal_cdf(t.z);
  return t;
}

struct ExpFit {
  double slope = 0;
  double intercept = 0;  // of ln y
  double r = 0;
  double p = 1;
  bool degenerate = false;  // constant ln y: r undefined
};

/// Least squares of ln(y) on x, i.e. y = e^intercept * e^(slope x).
inline ExpFit exp_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw StatsError("exp_fit: length mismatch");
  if (xs.size() < 3) throw StatsError("exp_fit: need at least 3 points");
  std::vector<double> ly;
  for (double y : ys) {
    if (!(y > 0)) throw StatsError("exp_fit: y values must be positive");
    ly.push_back(std::log(y));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ly[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw StatsError("exp_fit: zero variance in x");
  ExpFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy == 0) {
    f.slope = 0;
    f.intercept = my;
    f.degenerate = true;
    return f;
  }
  const Correlation c = pearson(xs, ly);
  f.r = c.r;
  f.p = c.p;
  return f;
}

}  // namespace etr
