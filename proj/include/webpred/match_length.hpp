#pragma once

// Match lengths for the sliding-past Lempel-Ziv entropy-rate estimator.
//
// For position i (0-based) the match length is 1 + the length of the longest
// prefix of x[i..] that occurs entirely inside x[0..i). Occurrences may not
// run past position i, so this is the longest previous *non-overlapping*
// factor. The search is done on a suffix array:
//
//   * x[i..i+L) occurs in the past  <=>  some suffix j with lcp(i, j) >= L
//     has j + L <= i, i.e. the smallest start in the SA interval of suffixes
//     sharing L symbols with suffix i is at most i - L.
//   * The predicate is monotone in L, and the match at i+1 is at least the
//     match at i minus one, so a two-pointer sweep needs O(n) probes.
//
// Each probe costs O(log n) (binary search over an LCP range-min table), for
// O(n log n) total after an O(n log n) suffix array construction.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace webpred {

namespace detail {

/// Range-minimum table over a fixed array; O(1) queries on closed ranges.
class SparseMin {
public:
  SparseMin() = default;
  explicit SparseMin(std::vector<std::uint32_t> base) {
    const std::size_t n = base.size();
    levels_.push_back(std::move(base));
    for (std::size_t w = 1; 2 * w <= n; w *= 2) {
      const auto &prev = levels_.back();
      std::vector<std::uint32_t> next(n - 2 * w + 1);
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = std::min(prev[i], prev[i + w]);
      levels_.push_back(std::move(next));
    }
  }

  std::uint32_t min(std::size_t lo, std::size_t hi) const noexcept {
    const std::size_t k = std::bit_width(hi - lo + 1) - 1;
    return std::min(levels_[k][lo], levels_[k][hi + 1 - (std::size_t{1} << k)]);
  }

private:
  std::vector<std::vector<std::uint32_t>> levels_;
};

/// Prefix doubling over cyclic shifts of x + sentinel, counting sort per
/// round. Input values are arbitrary; they are rank-compressed first.
template <class Symbol>
std::vector<std::uint32_t> suffix_array(std::span<const Symbol> x) {
  const std::size_t n = x.size() + 1;
  std::vector<Symbol> alphabet(x.begin(), x.end());
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());

  std::vector<std::uint32_t> cls(n, 0), p(n), pn(n), cn(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    cls[i] = static_cast<std::uint32_t>(
        std::lower_bound(alphabet.begin(), alphabet.end(), x[i]) -
        alphabet.begin() + 1);
  std::size_t classes = alphabet.size() + 1;

  std::vector<std::uint32_t> cnt(std::max(classes, n), 0);
  for (std::size_t i = 0; i < n; ++i)
    ++cnt[cls[i]];
  for (std::size_t i = 1; i < classes; ++i)
    cnt[i] += cnt[i - 1];
  for (std::size_t i = n; i-- > 0;)
    p[--cnt[cls[i]]] = static_cast<std::uint32_t>(i);

  for (std::size_t h = 1; h < n && classes < n; h *= 2) {
    for (std::size_t i = 0; i < n; ++i)
      pn[i] = static_cast<std::uint32_t>((p[i] + n - h) % n);
    std::fill(cnt.begin(), cnt.begin() + classes, 0);
    for (std::size_t i = 0; i < n; ++i)
      ++cnt[cls[pn[i]]];
    for (std::size_t i = 1; i < classes; ++i)
      cnt[i] += cnt[i - 1];
    for (std::size_t i = n; i-- > 0;)
      p[--cnt[cls[pn[i]]]] = pn[i];
    cn[p[0]] = 0;
    classes = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (cls[p[i]] != cls[p[i - 1]] ||
          cls[(p[i] + h) % n] != cls[(p[i - 1] + h) % n])
        ++classes;
      cn[p[i]] = static_cast<std::uint32_t>(classes - 1);
    }
    cls.swap(cn);
  }
  p.erase(p.begin()); // the sentinel sorts first
  return p;
}

/// Kasai et al.; lcp[r] = lcp(sa[r-1], sa[r]) and lcp[0] = 0.
template <class Symbol>
std::vector<std::uint32_t> lcp_array(std::span<const Symbol> x,
                                     std::span<const std::uint32_t> sa) {
  const std::size_t n = x.size();
  std::vector<std::uint32_t> rank(n), lcp(n, 0);
  for (std::size_t r = 0; r < n; ++r)
    rank[sa[r]] = static_cast<std::uint32_t>(r);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = sa[rank[i] - 1];
    while (i + h < n && j + h < n && x[i + h] == x[j + h])
      ++h;
    lcp[rank[i]] = static_cast<std::uint32_t>(h);
    if (h > 0)
      --h;
  }
  return lcp;
}

} // namespace detail

/// Match lengths Lambda_1..Lambda_n (1-based in the estimator's notation;
/// element k of the result belongs to position k+1). Lambda_1 = 1.
template <class Symbol>
std::vector<std::uint32_t> match_lengths(std::span<const Symbol> x) {
  const std::size_t n = x.size();
  std::vector<std::uint32_t> lambda(n, 1);
  if (n < 2)
    return lambda;

  const auto sa = detail::suffix_array(x);
  const auto lcp = detail::lcp_array(x, std::span<const std::uint32_t>(sa));
  std::vector<std::uint32_t> rank(n);
  for (std::size_t r = 0; r < n; ++r)
    rank[sa[r]] = static_cast<std::uint32_t>(r);
  const detail::SparseMin lcp_min(lcp);
  const detail::SparseMin pos_min(sa);

  // Does x[i..i+len) occur inside x[0..i)?
  auto occurs_before = [&](std::size_t i, std::size_t len) {
    const std::size_t r = rank[i];
    std::size_t lo = r, hi = r;
    // Extend left: smallest lo with min(lcp[lo+1..r]) >= len.
    for (std::size_t a = 0, b = r; a < b;) {
      const std::size_t m = a + (b - a) / 2;
      if (lcp_min.min(m + 1, r) >= len)
        b = m;
      else
        a = m + 1;
      lo = b;
    }
    // Extend right: largest hi with min(lcp[r+1..hi]) >= len.
    for (std::size_t a = r, b = n - 1; a < b;) {
      const std::size_t m = a + (b - a + 1) / 2;
      if (lcp_min.min(r + 1, m) >= len)
        a = m;
      else
        b = m - 1;
      hi = a;
    }
    return static_cast<std::size_t>(pos_min.min(lo, hi)) + len <= i;
  };

  std::size_t match = 0;
  for (std::size_t i = 1; i < n; ++i) {
    match = match > 0 ? match - 1 : 0;
    while (i + match < n && occurs_before(i, match + 1))
      ++match;
    lambda[i] = static_cast<std::uint32_t>(match + 1);
  }
  return lambda;
}

template <class Symbol>
std::vector<std::uint32_t> match_lengths(const std::vector<Symbol> &x) {
  return match_lengths(std::span<const Symbol>(x));
}

} // namespace webpred
