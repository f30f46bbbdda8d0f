#pragma once

// Predictability upper bounds from Fano's inequality and the prefix
// convergence analysis used to choose a minimum trajectory length.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "webpred/error.hpp"
#include "webpred/infotheory.hpp"
#include "webpred/match_length.hpp"

namespace webpred {

/// Standard binary entropy -p log2 p - (1-p) log2 (1-p), zero at both ends.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0)
    return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Left-hand side of the Fano relation, H_b(pi) + (1 - pi) log2(n - 1).
inline double fano_lhs(double pi, std::size_t n) {
  const double tail =
      n > 1 ? (1.0 - pi) * std::log2(static_cast<double>(n - 1)) : 0.0;
  return binary_entropy(pi) + tail;
}

struct FanoSolution {
  double pi = 1.0;
  bool clamped = false; // entropy exceeded log2 n and was clamped
};

/// Root of fano_lhs(pi, n) = s on the decreasing branch [1/n, 1].
///
/// The function falls from log2 n at 1/n to 0 at 1, so plain bisection on
/// that bracket converges unconditionally. Entropies at or above log2 n map
/// to 1/n; strictly above also sets `clamped`.
inline FanoSolution solve_fano(double s, std::size_t n) {
  if (n < 1)
    throw ConfigError("solve_fano: alphabet size must be at least 1");
  if (!(s >= 0.0))
    throw ConfigError("solve_fano: entropy must be non-negative");
  if (n == 1 || s == 0.0)
    return {1.0, false};
  const double lo_pi = 1.0 / static_cast<double>(n);
  const double s_max = std::log2(static_cast<double>(n));
  if (s >= s_max)
    return {lo_pi, s > s_max};

  double lo = lo_pi, hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (fano_lhs(mid, n) > s)
      lo = mid;
    else
      hi = mid;
  }
  const double r_lo = std::abs(fano_lhs(lo, n) - s);
  const double r_hi = std::abs(fano_lhs(hi, n) - s);
  return {r_lo <= r_hi ? lo : hi, false};
}

struct PredictabilityProfile {
  double pi_rand = 1.0;
  double pi_unc = 1.0;
  double pi_max = 1.0;
  std::size_t n_symbols = 0;
  std::size_t length = 0;
  bool clamped = false;
};

inline PredictabilityProfile predictability_profile(const EntropyProfile &ep) {
  if (ep.n_symbols < 1 || ep.length < 1)
    throw UndefinedError("predictability is undefined for an empty profile");
  PredictabilityProfile p;
  p.n_symbols = ep.n_symbols;
  p.length = ep.length;
  const auto rate = solve_fano(ep.s_rate, ep.n_symbols);
  const auto unc = solve_fano(ep.s_unc, ep.n_symbols);
  p.pi_max = rate.pi;
  p.pi_unc = unc.pi;
  p.pi_rand = 1.0 / static_cast<double>(ep.n_symbols);
  p.clamped = rate.clamped || unc.clamped;
  return p;
}

/// Sums of prefix-restricted match lengths, one per prefix length 1..l.
///
/// Restricting to the first m symbols caps each match at the prefix end, so
/// Lambda_i(m) = min(Lambda_i, m - i + 2) (1-based). Result element m-1 holds
/// the sum over i <= m; computed in O(l) from the full-length vector.
inline std::vector<std::uint64_t>
prefix_lambda_sums(std::span<const std::uint32_t> lambda) {
  const std::size_t n = lambda.size();
  std::vector<std::uint64_t> sums(n);
  // expire[t]: capped terms whose cap stops binding at prefix length t.
  std::vector<std::uint32_t> expire(n + 2, 0);
  std::uint64_t sum = 0;
  std::size_t capped = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    sum += capped; // every term capped at m-1 grows by one
    capped -= expire[m];
    const std::uint32_t lam = lambda[m - 1];
    sum += std::min<std::uint32_t>(lam, 2);
    if (lam > 2) {
      ++capped;
      ++expire[m + lam - 2];
    }
    sums[m - 1] = sum;
  }
  return sums;
}

/// Pi_max for every prefix length 1..l with N recomputed per prefix.
inline std::vector<double> prefix_pi_max(std::span<const SymbolId> s) {
  std::vector<double> out(s.size());
  if (s.empty())
    return out;
  const auto lambda = match_lengths(s);
  const auto sums = prefix_lambda_sums(lambda);
  std::unordered_set<SymbolId> seen;
  for (std::size_t m = 1; m <= s.size(); ++m) {
    seen.insert(s[m - 1]);
    if (seen.size() == 1) {
      out[m - 1] = 1.0;
      continue;
    }
    out[m - 1] =
        solve_fano(lz_entropy_rate_from_sum(m, sums[m - 1]), seen.size()).pi;
  }
  return out;
}

struct ConvergenceCurve {
  std::vector<std::size_t> lengths; // 2*step, 3*step, ...
  std::vector<double> deltas;       // |Pi_max(l') - Pi_max(l' - step)|
  std::vector<double> pi_max;       // Pi_max(l') at each grid length
};

inline ConvergenceCurve convergence_curve(std::span<const SymbolId> s,
                                          std::size_t step = 1) {
  if (step < 1)
    throw ConfigError("convergence step must be at least 1");
  if (s.size() < 2 * step)
    throw ConfigError("trajectory of length " + std::to_string(s.size()) +
                      " is shorter than twice the step " +
                      std::to_string(step));
  const auto pi = prefix_pi_max(s);
  ConvergenceCurve c;
  for (std::size_t len = 2 * step; len <= s.size(); len += step) {
    c.lengths.push_back(len);
    c.pi_max.push_back(pi[len - 1]);
    c.deltas.push_back(std::abs(pi[len - 1] - pi[len - step - 1]));
  }
  return c;
}

inline ConvergenceCurve convergence_curve(const Trajectory &t,
                                          std::size_t step = 1) {
  return convergence_curve(std::span<const SymbolId>(t.symbols), step);
}

/// Cross-user mean delta at each grid length. Curves must share their grid.
inline std::vector<double>
mean_deltas(std::span<const ConvergenceCurve> curves) {
  if (curves.empty())
    throw ConfigError("no convergence curves given");
  const auto &grid = curves.front().lengths;
  std::vector<double> mean(grid.size(), 0.0);
  for (const auto &c : curves) {
    if (c.lengths != grid)
      throw ConfigError("convergence curves do not share a length grid");
    for (std::size_t k = 0; k < grid.size(); ++k)
      mean[k] += c.deltas[k];
  }
  for (auto &m : mean)
    m /= static_cast<double>(curves.size());
  return mean;
}

/// Smallest grid length whose cross-user mean delta is <= threshold, or
/// nullopt when no grid point qualifies.
inline std::optional<std::size_t>
min_sufficient_length(std::span<const ConvergenceCurve> curves,
                      double threshold) {
  const auto mean = mean_deltas(curves);
  for (std::size_t k = 0; k < mean.size(); ++k)
    if (mean[k] <= threshold)
      return curves.front().lengths[k];
  return std::nullopt;
}

} // namespace webpred
