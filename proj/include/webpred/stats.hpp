#pragma once

// Group-comparison statistics: two-sample KS, Cliff's delta, Pearson r,
// Bonferroni correction and normal-approximation confidence intervals.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "webpred/error.hpp"

namespace webpred::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0)
    return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Theta-function form; converges quickly for small lambda.
    const double y = -pi * pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = std::exp(y * (2 * k - 1) * (2 * k - 1));
      cdf += t;
      if (t < 1e-17 * cdf)
        break;
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * lambda * lambda);
    sf += (k % 2 ? 2.0 : -2.0) * t;
    if (t < 1e-17)
      break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

/// D = sup |ECDF_a - ECDF_b| over the pooled sample, evaluated after each
/// distinct value so ties are consumed from both samples at once. The
/// p-value is asymptotic with effective size m n / (m + n).
inline KsResult ks_two_sample(std::span<const double> a,
                              std::span<const double> b) {
  if (a.empty() || b.empty())
    throw ConfigError("ks_two_sample: both samples must be non-empty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j]))
      v = x[i];
    else
      v = y[j];
    while (i < x.size() && x[i] == v)
      ++i;
    while (j < y.size() && y[j] == v)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m -
                             static_cast<double>(j) / n));
  }
  return {d, kolmogorov_sf(std::sqrt(m * n / (m + n)) * d)};
}

/// (#{x > y} - #{x < y}) / (|a| |b|); positive when `a` tends to be larger.
inline double cliffs_delta(std::span<const double> a,
                           std::span<const double> b) {
  if (a.empty() || b.empty())
    throw ConfigError("cliffs_delta: both samples must be non-empty");
  std::vector<double> y(b.begin(), b.end());
  std::sort(y.begin(), y.end());
  long long greater = 0, less = 0;
  for (double x : a) {
    less += y.end() - std::upper_bound(y.begin(), y.end(), x);
    greater += std::lower_bound(y.begin(), y.end(), x) - y.begin();
  }
  return static_cast<double>(greater - less) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty())
    throw UndefinedError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs)
    s += x;
  return s / static_cast<double>(xs.size());
}

inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ConfigError("pearson_r: series lengths differ");
  if (x.size() < 2)
    throw ConfigError("pearson_r: need at least two observations");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedError("pearson_r: correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double bonferroni(double alpha, std::size_t n_comparisons) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("bonferroni: alpha must lie in (0, 1]");
  if (n_comparisons < 1)
    throw ConfigError("bonferroni: need at least one comparison");
  return alpha / static_cast<double>(n_comparisons);
}

/// Two-sided standard-normal quantile z with P(|Z| <= z) = level.
inline double normal_two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("confidence level must lie in (0, 1)");
  // P(|Z| > z) = erfc(z / sqrt 2); bisection on the monotone tail.
  const double target = 1.0 - level;
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::numbers::sqrt2) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct MeanCi {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// mean +- z * sd / sqrt(n) with the sample standard deviation.
inline MeanCi mean_ci(std::span<const double> xs, double level = 0.95) {
  if (xs.size() < 2)
    throw UndefinedError("mean_ci: need at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs)
    ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  const double half = normal_two_sided_z(level) * std::sqrt(ss / (n - 1.0) / n);
  return {m, m - half, m + half};
}

/// Linear-interpolation quantile (R type 7) of an unsorted sample.
inline double quantile(std::span<const double> xs, double q) {
  if (xs.empty())
    throw UndefinedError("quantile of an empty sample");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= s.size())
    return s.back();
  return s[k] + (h - static_cast<double>(k)) * (s[k + 1] - s[k]);
}

struct GroupComparison {
  std::string group_a;
  std::string group_b;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  double ks_statistic = 0.0;
  double p_value = 1.0;
  double cliffs_delta = 0.0;
  double alpha_adjusted = 0.05;
  bool significant = false;
};

inline GroupComparison compare_groups(std::string label_a,
                                      std::span<const double> a,
                                      std::string label_b,
                                      std::span<const double> b,
                                      double alpha_adjusted) {
  GroupComparison g;
  g.group_a = std::move(label_a);
  g.group_b = std::move(label_b);
  g.size_a = a.size();
  g.size_b = b.size();
  const auto ks = ks_two_sample(a, b);
  g.ks_statistic = ks.statistic;
  g.p_value = ks.p_value;
  g.cliffs_delta = cliffs_delta(a, b);
  g.alpha_adjusted = alpha_adjusted;
  g.significant = g.p_value < alpha_adjusted;
  return g;
}

} // namespace webpred::stats
