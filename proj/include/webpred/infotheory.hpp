#pragma once

// Entropy measures of a trajectory: the uniform bound log2 N, the Shannon
// entropy of visit frequencies, overlapping-window block entropy, and the
// match-length (Lempel-Ziv) estimate of the entropy rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "webpred/error.hpp"
#include "webpred/match_length.hpp"
#include "webpred/trajectory.hpp"

namespace webpred {

struct EntropyProfile {
  double s_rand = 0.0; // log2 N
  double s_unc = 0.0;  // Shannon entropy of symbol frequencies
  double s_rate = 0.0; // match-length entropy-rate estimate, bits/symbol
  std::size_t n_symbols = 0;
  std::size_t length = 0;
};

namespace detail {

inline void require_nonempty(std::span<const SymbolId> s) {
  if (s.empty())
    throw UndefinedError("entropy is undefined for an empty trajectory");
}

/// -sum (c/n) log2(c/n) over the given counts, accumulated in a fixed order.
template <class Counts>
double shannon_from_counts(const Counts &counts, std::size_t total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (double c : counts)
    if (c > 0)
      h -= (c / n) * std::log2(c / n);
  return h == 0.0 ? 0.0 : h; // no -0.0
}

/// Sorted multiset of counts; sorting makes the sum independent of how
/// symbols happen to be labelled.
template <class Map> std::vector<double> sorted_counts(const Map &m) {
  std::vector<double> c;
  c.reserve(m.size());
  for (const auto &kv : m)
    c.push_back(static_cast<double>(kv.second));
  std::sort(c.begin(), c.end());
  return c;
}

} // namespace detail

inline double random_entropy(std::span<const SymbolId> s) {
  detail::require_nonempty(s);
  return std::log2(static_cast<double>(count_distinct(s)));
}

inline double uncorrelated_entropy(std::span<const SymbolId> s) {
  detail::require_nonempty(s);
  std::unordered_map<SymbolId, std::size_t> counts;
  for (auto x : s)
    ++counts[x];
  return detail::shannon_from_counts(detail::sorted_counts(counts), s.size());
}

/// Entropy of the empirical distribution of the l-L+1 overlapping blocks of
/// length L. L = 0 gives 0 by convention.
inline double block_entropy(std::span<const SymbolId> s, std::size_t L) {
  if (L == 0)
    return 0.0;
  if (L > s.size())
    throw ConfigError("block length " + std::to_string(L) +
                      " exceeds trajectory length " + std::to_string(s.size()));
  std::map<std::vector<SymbolId>, std::size_t> counts;
  for (std::size_t i = 0; i + L <= s.size(); ++i)
    ++counts[std::vector<SymbolId>(s.begin() + i, s.begin() + i + L)];
  return detail::shannon_from_counts(detail::sorted_counts(counts),
                                     s.size() - L + 1);
}

/// l log2 l / sum(Lambda_i). Not clamped: on short sequences the estimate can
/// exceed log2 N.
inline double lz_entropy_rate_from_sum(std::size_t length,
                                       std::uint64_t lambda_sum) {
  const double n = static_cast<double>(length);
  return n * std::log2(n) / static_cast<double>(lambda_sum);
}

inline double lz_entropy_rate(std::span<const SymbolId> s) {
  if (s.size() < 2)
    throw UndefinedError("entropy-rate estimate needs at least 2 symbols");
  const auto lambda = match_lengths(s);
  const std::uint64_t sum =
      std::accumulate(lambda.begin(), lambda.end(), std::uint64_t{0});
  return lz_entropy_rate_from_sum(s.size(), sum);
}

inline EntropyProfile entropy_profile(std::span<const SymbolId> s) {
  EntropyProfile p;
  p.n_symbols = s.empty() ? 0 : count_distinct(s);
  p.length = s.size();
  p.s_rand = random_entropy(s);
  p.s_unc = uncorrelated_entropy(s);
  p.s_rate = lz_entropy_rate(s);
  return p;
}

inline EntropyProfile entropy_profile(const Trajectory &t) {
  return entropy_profile(std::span<const SymbolId>(t.symbols));
}

} // namespace webpred
