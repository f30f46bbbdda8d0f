#pragma once

// Synthetic sources with known entropy rates: first-order Markov chains, a
// closed-form entropy-rate oracle, and a bridge that renders generated
// symbols as visit events so the whole pipeline can run on them.
//
// Sampling is done on raw mt19937_64 output (53-bit uniforms, inverse-CDF
// draws) rather than <random> distributions, whose algorithms are
// implementation-defined; sequences are therefore identical across
// standard libraries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "webpred/error.hpp"
#include "webpred/ingest.hpp"
#include "webpred/trajectory.hpp"

namespace webpred::synth {

struct MarkovModel {
  std::vector<std::vector<double>> transition; // k x k, row-stochastic
  std::vector<double> initial;                 // length k

  std::size_t states() const noexcept { return initial.size(); }
};

inline void validate(const MarkovModel &m) {
  const std::size_t k = m.states();
  if (k == 0)
    throw ConfigError("Markov model has no states");
  if (m.transition.size() != k)
    throw ConfigError("transition matrix must be k x k with k = |initial|");
  auto check_dist = [](const std::vector<double> &row, const char *what) {
    double s = 0.0;
    for (double p : row) {
      if (!(p >= 0.0))
        throw ConfigError(std::string(what) + " has a negative entry");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw ConfigError(std::string(what) + " does not sum to 1");
  };
  for (const auto &row : m.transition) {
    if (row.size() != k)
      throw ConfigError("transition matrix must be k x k with k = |initial|");
    check_dist(row, "transition row");
  }
  check_dist(m.initial, "initial distribution");
}

inline MarkovModel uniform_start(std::vector<std::vector<double>> transition) {
  MarkovModel m;
  const std::size_t k = transition.size();
  m.initial.assign(k, 1.0 / static_cast<double>(k));
  m.transition = std::move(transition);
  return m;
}

/// (1 - w) P + w I: adds self-loops, i.e. repeated visits to one location.
inline MarkovModel mix_self_loops(MarkovModel m, double w) {
  if (!(w >= 0.0 && w <= 1.0))
    throw ConfigError("self-loop weight must lie in [0, 1]");
  for (std::size_t i = 0; i < m.states(); ++i)
    for (std::size_t j = 0; j < m.states(); ++j)
      m.transition[i][j] = (1.0 - w) * m.transition[i][j] + (i == j ? w : 0.0);
  return m;
}

/// I.i.d. source with popularity p_k proportional to (k + 1)^-exponent.
inline MarkovModel zipf_model(std::size_t k, double exponent) {
  if (k == 0)
    throw ConfigError("zipf model needs at least one state");
  if (!(exponent >= 0.0))
    throw ConfigError("zipf exponent must be non-negative");
  std::vector<double> p(k);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    z += p[i] = std::pow(static_cast<double>(i + 1), -exponent);
  for (auto &x : p)
    x /= z;
  MarkovModel m;
  m.initial = p;
  m.transition.assign(k, p);
  return m;
}

namespace detail {

inline double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t draw(const std::vector<double> &p, std::mt19937_64 &rng) {
  const double u = uniform01(rng);
  double c = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    c += p[i];
    if (u < c)
      return i;
  }
  // Rounding left u above the total; fall back to the last positive entry.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0)
      return i;
  return p.size() - 1;
}

inline bool reaches_all(const MarkovModel &m, bool reverse) {
  const std::size_t k = m.states();
  std::vector<char> seen(k, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < k; ++j) {
      const double p = reverse ? m.transition[j][i] : m.transition[i][j];
      if (p > 0.0 && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

} // namespace detail

inline std::vector<SymbolId> markov_generate(const MarkovModel &m,
                                             std::size_t n,
                                             std::uint64_t seed) {
  validate(m);
  if (n < 1)
    throw ConfigError("markov_generate: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<SymbolId> out;
  out.reserve(n);
  auto state = detail::draw(m.initial, rng);
  out.push_back(static_cast<SymbolId>(state));
  for (std::size_t t = 1; t < n; ++t) {
    state = detail::draw(m.transition[state], rng);
    out.push_back(static_cast<SymbolId>(state));
  }
  return out;
}

inline bool is_irreducible(const MarkovModel &m) {
  validate(m);
  return detail::reaches_all(m, false) && detail::reaches_all(m, true);
}

/// Solves pi P = pi, sum pi = 1 with the normalisation replacing the last
/// balance equation.
inline std::vector<double> stationary_distribution(const MarkovModel &m) {
  if (!is_irreducible(m))
    throw ConfigError("Markov chain is reducible: not every state "
                      "communicates, so the stationary distribution is not "
                      "unique");
  const auto k = static_cast<Eigen::Index>(m.states());
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      a(i, j) = m.transition[static_cast<std::size_t>(j)]
                            [static_cast<std::size_t>(i)] -
                (i == j ? 1.0 : 0.0);
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(b);
  return {pi.data(), pi.data() + k};
}

/// h = -sum_i pi_i sum_j P_ij log2 P_ij, bits per symbol.
inline double markov_entropy_rate(const MarkovModel &m) {
  const auto pi = stationary_distribution(m);
  double h = 0.0;
  for (std::size_t i = 0; i < m.states(); ++i) {
    double row = 0.0;
    for (double p : m.transition[i])
      if (p > 0.0)
        row -= p * std::log2(p);
    h += pi[i] * row;
  }
  return h == 0.0 ? 0.0 : h;
}

struct SyntheticUserSpec {
  std::string user_id = "synth";
  MarkovModel model;
  double dwell_mean_seconds = 30.0;
  std::size_t visit_count = 1000;
  std::uint64_t seed = 0;
  std::optional<double> zipf_exponent; // i.i.d. popularity-skew mode
  std::size_t pages_per_domain = 4;
  std::int64_t start_time = 1'600'000'000;
};

/// One visit per generated symbol: domain `d<k>`, url `d<k>/p<j>` with a
/// random page j, category `c<k mod 5>`, exponential dwell (rounded to whole
/// seconds), visits back to back.
inline std::vector<VisitEvent> synth_events(const SyntheticUserSpec &spec) {
  if (spec.visit_count < 1)
    throw ConfigError("visit_count must be at least 1");
  if (!(spec.dwell_mean_seconds > 0.0))
    throw ConfigError("dwell_mean_seconds must be positive");
  if (spec.pages_per_domain < 1)
    throw ConfigError("pages_per_domain must be at least 1");
  const MarkovModel model =
      spec.zipf_exponent ? zipf_model(spec.model.states(), *spec.zipf_exponent)
                         : spec.model;
  const auto symbols = markov_generate(model, spec.visit_count, spec.seed);

  std::mt19937_64 rng(webpred::detail::splitmix64(spec.seed ^
                                                  0x5EED'D3E1'1000'0001ULL));
  std::vector<VisitEvent> events;
  events.reserve(symbols.size());
  std::int64_t t = spec.start_time;
  for (auto k : symbols) {
    VisitEvent e;
    e.user_id = spec.user_id;
    e.start_time = t;
    const double u = detail::uniform01(rng);
    e.active_seconds = std::llround(-spec.dwell_mean_seconds * std::log1p(-u));
    const auto page = rng() % spec.pages_per_domain;
    e.domain = "d" + std::to_string(k);
    e.url = e.domain + "/p" + std::to_string(page);
    e.category = "c" + std::to_string(k % 5);
    t += e.active_seconds;
    events.push_back(std::move(e));
  }
  return events;
}

/// Random per-user Markov models for ensemble experiments. Each state moves
/// to 1..max_fanout other states with random weights, then the chain is
/// mixed with the identity at `self_loop_weight` so users linger on a
/// location for several consecutive visits.
struct EnsembleConfig {
  std::size_t users = 100;
  std::uint64_t seed = 1;
  std::string user_prefix = "u";
  std::size_t min_states = 4;
  std::size_t max_states = 12;
  std::size_t min_fanout = 2;
  std::size_t max_fanout = 3;
  double self_loop_weight = 0.7;
  double dwell_mean_seconds = 300.0;
  std::size_t visit_count = 3000;
  std::size_t pages_per_domain = 4;
};

inline MarkovModel random_model(std::size_t k, std::size_t min_fanout,
                                std::size_t max_fanout, std::mt19937_64 &rng) {
  if (k < 2)
    throw ConfigError("random_model needs at least two states");
  max_fanout = std::clamp<std::size_t>(max_fanout, 1, k - 1);
  min_fanout = std::clamp<std::size_t>(min_fanout, 1, max_fanout);
  std::vector<std::vector<double>> p(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t fanout =
        min_fanout + rng() % (max_fanout - min_fanout + 1);
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i)
        others.push_back(j);
    double total = 0.0;
    for (std::size_t f = 0; f < fanout; ++f) {
      const std::size_t pick = f + rng() % (others.size() - f);
      std::swap(others[f], others[pick]);
      const double w = 0.2 + detail::uniform01(rng);
      p[i][others[f]] = w;
      total += w;
    }
    for (auto &x : p[i])
      x /= total;
  }
  return uniform_start(std::move(p));
}

inline std::vector<SyntheticUserSpec> make_ensemble(const EnsembleConfig &cfg) {
  if (cfg.min_states < 2 || cfg.max_states < cfg.min_states)
    throw ConfigError("ensemble needs 2 <= min_states <= max_states");
  std::vector<SyntheticUserSpec> out;
  out.reserve(cfg.users);
  const int width = static_cast<int>(std::to_string(cfg.users).size());
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const std::uint64_t user_seed =
        webpred::detail::splitmix64(cfg.seed * 0x100000001B3ULL + u);
    std::mt19937_64 rng(user_seed);
    const std::size_t k =
        cfg.min_states + rng() % (cfg.max_states - cfg.min_states + 1);
    SyntheticUserSpec spec;
    std::string idx = std::to_string(u);
    spec.user_id = cfg.user_prefix +
                   std::string(static_cast<std::size_t>(width) - idx.size(), '0') +
                   idx;
    spec.model = mix_self_loops(random_model(k, cfg.min_fanout, cfg.max_fanout, rng),
                                cfg.self_loop_weight);
    spec.dwell_mean_seconds = cfg.dwell_mean_seconds;
    spec.visit_count = cfg.visit_count;
    spec.pages_per_domain = cfg.pages_per_domain;
    spec.seed = rng();
    out.push_back(std::move(spec));
  }
  return out;
}

} // namespace webpred::synth
