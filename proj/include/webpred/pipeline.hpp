#pragma once

// Batch analyses over a parsed visit log: per-user entropy/predictability
// reports, temporal and spatial sweeps, prefix convergence, and pairwise
// group comparisons. Every analysis returns plain tables; the writers below
// render them as CSV in a fixed column order (see docs/report_schema.md).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "webpred/error.hpp"
#include "webpred/infotheory.hpp"
#include "webpred/ingest.hpp"
#include "webpred/predictability.hpp"
#include "webpred/stats.hpp"
#include "webpred/synth.hpp"
#include "webpred/trajectory.hpp"

namespace webpred {

/// 0.25, 0.5, 0.75, 1, 2, ..., 15 minutes, in seconds.
inline std::vector<std::int64_t> default_delta_t_grid() {
  std::vector<std::int64_t> g{15, 30, 45};
  for (std::int64_t m = 1; m <= 15; ++m)
    g.push_back(60 * m);
  return g;
}

inline const std::vector<TrajectoryKind> &all_kinds() {
  static const std::vector<TrajectoryKind> k{TrajectoryKind::Stat,
                                             TrajectoryKind::BinNonStat,
                                             TrajectoryKind::SeqNonStat};
  return k;
}

struct RunConfig {
  SpatialResolution resolution = SpatialResolution::Domain;
  std::int64_t delta_t_seconds = 60;
  std::vector<TrajectoryKind> kinds = all_kinds();
  std::size_t min_length = 100; // gate on the binned non-stationary length
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // converge
  TrajectoryKind convergence_kind = TrajectoryKind::BinNonStat;
  std::size_t step = 1;
  double threshold = 0.01;
  std::size_t horizon = 200;

  // sweep (over `kinds`)
  std::vector<std::int64_t> delta_t_grid = default_delta_t_grid();
  std::vector<SpatialResolution> resolution_grid = {
      SpatialResolution::Url, SpatialResolution::Domain,
      SpatialResolution::Category};

  // compare
  TrajectoryKind compare_kind = TrajectoryKind::Stat;
  std::string metric = "pi_max";
  double alpha = 0.05;

  BinningConfig binning() const { return {delta_t_seconds, seed}; }

  void validate() const {
    if (delta_t_seconds <= 0)
      throw ConfigError("delta-t must be positive");
    if (kinds.empty())
      throw ConfigError("at least one trajectory kind is required");
    if (min_length < 2)
      throw ConfigError("min-length must be at least 2");
    if (step < 1)
      throw ConfigError("step must be at least 1");
    if (!(threshold >= 0.0))
      throw ConfigError("threshold must be non-negative");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw ConfigError("alpha must lie in (0, 1]");
  }
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write results into slot i.
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)> &body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure)
            failure = std::current_exception();
        }
      }
    });
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

// ---------------------------------------------------------------- analyze

struct ReportRow {
  std::string user_id;
  TrajectoryKind kind;
  SpatialResolution resolution;
  std::optional<std::int64_t> delta_t_seconds;
  EntropyProfile entropy;
  PredictabilityProfile predictability;
};

struct Exclusion {
  std::string user_id;
  std::string reason;
};

struct AnalysisReport {
  std::vector<ReportRow> rows;
  std::vector<Exclusion> exclusions;
  std::size_t users_seen = 0;
  std::size_t users_reported = 0;
};

inline ReportRow profile_row(std::string_view user, const Trajectory &t) {
  ReportRow r{std::string(user), t.kind, t.resolution, t.delta_t_seconds, {}, {}};
  r.entropy = entropy_profile(t);
  r.predictability = predictability_profile(r.entropy);
  return r;
}

namespace detail {

struct UserOutcome {
  std::vector<ReportRow> rows;
  std::optional<Exclusion> exclusion;
};

inline UserOutcome analyze_user(const std::string &user,
                                std::span<const VisitEvent> events,
                                const RunConfig &cfg) {
  UserOutcome out;
  SymbolTable table;
  const auto stat =
      build_stationary(events, cfg.binning(), cfg.resolution, table);
  const auto bin = to_binned_nonstationary(stat);
  if (bin.length() < cfg.min_length) {
    out.exclusion = Exclusion{
        user, fmt::format("bin-nonstat length {} below min-length {}",
                          bin.length(), cfg.min_length)};
    return out;
  }
  for (auto kind : cfg.kinds) {
    Trajectory t = kind == TrajectoryKind::Stat         ? stat
                   : kind == TrajectoryKind::BinNonStat ? bin
                   : build_sequential_nonstationary(events, cfg.resolution,
                                                    table);
    if (t.length() < 2) {
      out.rows.clear();
      out.exclusion = Exclusion{
          user, fmt::format("{} trajectory has length {}, need at least 2",
                            to_string(kind), t.length())};
      return out;
    }
    out.rows.push_back(profile_row(user, t));
  }
  return out;
}

} // namespace detail

/// Per-user profiles for every configured trajectory kind. Users whose
/// binned non-stationary trajectory is shorter than min_length are listed in
/// `exclusions` with the reason; every input user lands in exactly one list.
inline AnalysisReport run_pipeline(const UserEvents &users,
                                   const RunConfig &cfg) {
  cfg.validate();
  std::vector<const std::pair<const std::string, std::vector<VisitEvent>> *>
      order;
  for (const auto &kv : users)
    order.push_back(&kv);
  std::vector<detail::UserOutcome> outcomes(order.size());
  parallel_for(order.size(), cfg.workers, [&](std::size_t i) {
    outcomes[i] = detail::analyze_user(order[i]->first, order[i]->second, cfg);
  });

  AnalysisReport rep;
  rep.users_seen = order.size();
  for (auto &o : outcomes) {
    if (o.exclusion) {
      rep.exclusions.push_back(std::move(*o.exclusion));
      continue;
    }
    ++rep.users_reported;
    for (auto &r : o.rows)
      rep.rows.push_back(std::move(r));
  }
  return rep;
}

/// Users passing the min-length gate, in user-id order.
inline std::vector<std::string> gated_users(const UserEvents &users,
                                            const RunConfig &cfg,
                                            std::vector<Exclusion> *excluded =
                                                nullptr) {
  std::vector<std::string> keep;
  for (const auto &[user, events] : users) {
    const auto bin =
        build_binned_nonstationary(events, cfg.binning(), cfg.resolution);
    if (bin.length() >= cfg.min_length)
      keep.push_back(user);
    else if (excluded)
      excluded->push_back(
          {user, fmt::format("bin-nonstat length {} below min-length {}",
                             bin.length(), cfg.min_length)});
  }
  return keep;
}

// ------------------------------------------------------------------ sweep

enum class SweepDimension { Temporal, Spatial };

struct MeasureSummary {
  std::optional<stats::MeanCi> s_rand, s_unc, s_rate, pi_rand, pi_unc, pi_max;
};

struct SweepRow {
  std::string grid_value; // seconds for temporal, resolution name for spatial
  TrajectoryKind kind;
  std::size_t n_users = 0;
  MeasureSummary summary;
};

namespace detail {

inline MeasureSummary summarize(const std::vector<ReportRow> &rows) {
  MeasureSummary m;
  if (rows.size() < 2)
    return m;
  auto ci = [&](auto field) {
    std::vector<double> xs;
    xs.reserve(rows.size());
    for (const auto &r : rows)
      xs.push_back(field(r));
    return stats::mean_ci(xs);
  };
  m.s_rand = ci([](const ReportRow &r) { return r.entropy.s_rand; });
  m.s_unc = ci([](const ReportRow &r) { return r.entropy.s_unc; });
  m.s_rate = ci([](const ReportRow &r) { return r.entropy.s_rate; });
  m.pi_rand = ci([](const ReportRow &r) { return r.predictability.pi_rand; });
  m.pi_unc = ci([](const ReportRow &r) { return r.predictability.pi_unc; });
  m.pi_max = ci([](const ReportRow &r) { return r.predictability.pi_max; });
  return m;
}

} // namespace detail

/// Ensemble means (with 95% CIs) of every measure at each grid point. The
/// user population is fixed by the min-length gate at the base config;
/// users whose trajectory at a grid point is shorter than 2 are skipped
/// there and the row's n_users says how many remained.
inline std::vector<SweepRow> run_sweep(const UserEvents &users,
                                       const RunConfig &cfg,
                                       SweepDimension dim) {
  cfg.validate();
  if (dim == SweepDimension::Temporal && cfg.delta_t_grid.empty())
    throw ConfigError("temporal sweep needs a non-empty delta-t grid");
  if (dim == SweepDimension::Spatial && cfg.resolution_grid.empty())
    throw ConfigError("spatial sweep needs a non-empty resolution grid");
  for (auto dt : cfg.delta_t_grid)
    if (dt <= 0)
      throw ConfigError("delta-t grid values must be positive");

  const auto &kinds = cfg.kinds;
  const auto population = gated_users(users, cfg);

  struct Point {
    std::string label;
    RunConfig cfg;
  };
  std::vector<Point> points;
  if (dim == SweepDimension::Temporal) {
    for (auto dt : cfg.delta_t_grid) {
      Point p{std::to_string(dt), cfg};
      p.cfg.delta_t_seconds = dt;
      points.push_back(std::move(p));
    }
  } else {
    for (auto r : cfg.resolution_grid) {
      Point p{std::string(to_string(r)), cfg};
      p.cfg.resolution = r;
      points.push_back(std::move(p));
    }
  }

  std::vector<SweepRow> table;
  for (const auto &pt : points) {
    for (auto kind : kinds) {
      std::vector<std::optional<ReportRow>> per_user(population.size());
      parallel_for(population.size(), cfg.workers, [&](std::size_t i) {
        const auto &events = users.at(population[i]);
        SymbolTable table_;
        auto t = build_trajectory(events, kind, pt.cfg.binning(),
                                  pt.cfg.resolution, table_);
        if (t.length() >= 2)
          per_user[i] = profile_row(population[i], t);
      });
      std::vector<ReportRow> rows;
      for (auto &r : per_user)
        if (r)
          rows.push_back(std::move(*r));
      table.push_back({pt.label, kind, rows.size(), detail::summarize(rows)});
    }
  }
  return table;
}

// ------------------------------------------------------------ convergence

struct ConvergenceRow {
  std::size_t length = 0;
  double mean_delta = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::optional<std::size_t> min_length; // nullopt: threshold never reached
  std::vector<std::string> users_used;
  std::vector<Exclusion> exclusions;
};

/// Prefix convergence of Pi_max on `convergence_kind` trajectories. Every
/// user with at least `horizon` symbols contributes its first `horizon`
/// symbols, so all curves share one grid; shorter users are listed as
/// exclusions.
inline ConvergenceReport run_convergence(const UserEvents &users,
                                         const RunConfig &cfg) {
  cfg.validate();
  if (cfg.horizon < 2 * cfg.step)
    throw ConfigError("horizon must be at least twice the step");
  ConvergenceReport rep;
  std::vector<std::vector<SymbolId>> prefixes;
  for (const auto &[user, events] : users) {
    SymbolTable table;
    const auto t = build_trajectory(events, cfg.convergence_kind, cfg.binning(),
                                    cfg.resolution, table);
    if (t.length() < cfg.horizon) {
      rep.exclusions.push_back(
          {user, fmt::format("{} length {} below horizon {}",
                             to_string(cfg.convergence_kind), t.length(),
                             cfg.horizon)});
      continue;
    }
    rep.users_used.push_back(user);
    prefixes.emplace_back(t.symbols.begin(),
                          t.symbols.begin() +
                              static_cast<std::ptrdiff_t>(cfg.horizon));
  }
  if (prefixes.empty())
    throw ConfigError(fmt::format(
        "no user has a {} trajectory of at least {} symbols",
        to_string(cfg.convergence_kind), cfg.horizon));

  std::vector<ConvergenceCurve> curves(prefixes.size());
  parallel_for(prefixes.size(), cfg.workers, [&](std::size_t i) {
    curves[i] = convergence_curve(std::span<const SymbolId>(prefixes[i]),
                                  cfg.step);
  });
  const auto mean = mean_deltas(curves);
  std::vector<double> column(curves.size());
  for (std::size_t k = 0; k < mean.size(); ++k) {
    for (std::size_t u = 0; u < curves.size(); ++u)
      column[u] = curves[u].deltas[k];
    rep.rows.push_back({curves.front().lengths[k], mean[k],
                        stats::quantile(column, 0.05),
                        stats::quantile(column, 0.95)});
  }
  rep.min_length = min_sufficient_length(curves, cfg.threshold);
  return rep;
}

// ---------------------------------------------------------------- compare

struct CompareReport {
  std::vector<stats::GroupComparison> comparisons;
  std::vector<std::string> warnings;
};

inline double metric_value(const ReportRow &r, std::string_view metric) {
  if (metric == "pi_max")
    return r.predictability.pi_max;
  if (metric == "pi_unc")
    return r.predictability.pi_unc;
  if (metric == "pi_rand")
    return r.predictability.pi_rand;
  if (metric == "s_rate")
    return r.entropy.s_rate;
  if (metric == "s_unc")
    return r.entropy.s_unc;
  if (metric == "s_rand")
    return r.entropy.s_rand;
  throw ConfigError("unknown metric '" + std::string(metric) + "'");
}

/// Grouping file: CSV with header `user_id,group`.
inline std::map<std::string, std::string> parse_groups(std::istream &in) {
  std::map<std::string, std::string> groups;
  std::string line;
  std::size_t lineno = 0;
  std::size_t user_col = 0, group_col = 1, width = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty())
      continue;
    auto f = detail::split_csv(line, lineno);
    if (lineno == 1) {
      auto find = [&](std::string_view name) {
        auto it = std::find_if(f.begin(), f.end(), [&](const auto &h) {
          return detail::trim(h) == name;
        });
        if (it == f.end())
          throw InputError("grouping header lacks column '" +
                               std::string(name) + "'",
                           lineno);
        return static_cast<std::size_t>(it - f.begin());
      };
      user_col = find("user_id");
      group_col = find("group");
      width = f.size();
      continue;
    }
    if (f.size() != width)
      throw InputError("expected " + std::to_string(width) + " fields", lineno);
    const auto user = std::string(detail::trim(f[user_col]));
    const auto group = std::string(detail::trim(f[group_col]));
    if (user.empty() || group.empty())
      throw InputError("empty user_id or group", lineno);
    if (!groups.emplace(user, group).second)
      throw InputError("user '" + user + "' assigned twice", lineno);
  }
  if (lineno == 0)
    throw InputError("grouping file is empty");
  return groups;
}

/// All pairwise group comparisons of `metric` on `compare_kind`
/// trajectories of gated users, Bonferroni-adjusted over the number of pairs.
inline CompareReport run_compare(const UserEvents &users, const RunConfig &cfg,
                                 const std::map<std::string, std::string> &groups) {
  cfg.validate();
  metric_value(ReportRow{}, cfg.metric); // reject unknown metrics up front
  CompareReport rep;

  RunConfig one = cfg;
  one.kinds = {cfg.compare_kind};
  const auto analysis = run_pipeline(users, one);
  std::map<std::string, double> value;
  for (const auto &r : analysis.rows)
    value[r.user_id] = metric_value(r, cfg.metric);
  std::set<std::string> excluded;
  for (const auto &e : analysis.exclusions)
    excluded.insert(e.user_id);

  std::map<std::string, std::vector<double>> samples;
  for (const auto &[user, group] : groups) {
    auto it = value.find(user);
    if (it != value.end()) {
      samples[group].push_back(it->second);
    } else if (excluded.count(user)) {
      rep.warnings.push_back("user '" + user +
                             "' was excluded by the min-length gate");
    } else {
      rep.warnings.push_back("user '" + user + "' not found in input");
    }
  }
  std::set<std::string> labels;
  for (const auto &kv : groups)
    labels.insert(kv.second);
  for (const auto &g : labels) {
    const auto n = samples.count(g) ? samples[g].size() : 0;
    if (n < 2)
      throw InputError(fmt::format(
          "group '{}' has {} analysable user(s), need at least 2", g, n));
  }
  if (labels.size() < 2)
    throw InputError("need at least two groups to compare");

  const std::size_t pairs = labels.size() * (labels.size() - 1) / 2;
  const double alpha = stats::bonferroni(cfg.alpha, pairs);
  const std::vector<std::string> ordered(labels.begin(), labels.end());
  for (std::size_t i = 0; i < ordered.size(); ++i)
    for (std::size_t j = i + 1; j < ordered.size(); ++j)
      rep.comparisons.push_back(stats::compare_groups(
          ordered[i], samples[ordered[i]], ordered[j], samples[ordered[j]],
          alpha));
  return rep;
}

// ------------------------------------------------------------------ synth

namespace detail {

inline synth::MarkovModel model_from_json(const nlohmann::json &j) {
  synth::MarkovModel m;
  if (j.contains("transition")) {
    m.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    if (j.contains("initial"))
      m.initial = j.at("initial").get<std::vector<double>>();
    else
      m = synth::uniform_start(std::move(m.transition));
  } else if (j.contains("states")) {
    const auto k = j.at("states").get<std::size_t>();
    m = synth::uniform_start(std::vector<std::vector<double>>(
        k, std::vector<double>(k, 1.0 / static_cast<double>(k))));
  } else {
    throw ConfigError("synthetic user needs 'transition' or 'states'");
  }
  const double w = j.value("self_loop_weight", 0.0);
  if (w > 0.0)
    m = synth::mix_self_loops(std::move(m), w);
  return m;
}

} // namespace detail

/// Synthetic-data spec document:
///   { "users": [ { "user_id", "transition" | "states", "initial"?,
///                  "self_loop_weight"?, "zipf_exponent"?,
///                  "dwell_mean_seconds"?, "visit_count"?, "seed"?,
///                  "pages_per_domain"?, "start_time"? }, ... ],
///     "ensemble": { "users"?, "seed"?, "user_prefix"?, "min_states"?,
///                   "max_states"?, "min_fanout"?, "max_fanout"?,
///                   "self_loop_weight"?, "dwell_mean_seconds"?,
///                   "visit_count"?, "pages_per_domain"? } }
/// Either key may be absent.
inline std::vector<synth::SyntheticUserSpec>
parse_synth_spec(const nlohmann::json &doc) {
  std::vector<synth::SyntheticUserSpec> specs;
  try {
    if (doc.contains("users")) {
      for (const auto &u : doc.at("users")) {
        synth::SyntheticUserSpec s;
        s.user_id = u.value("user_id", "synth" + std::to_string(specs.size()));
        s.model = detail::model_from_json(u);
        if (u.contains("zipf_exponent"))
          s.zipf_exponent = u.at("zipf_exponent").get<double>();
        s.dwell_mean_seconds = u.value("dwell_mean_seconds", s.dwell_mean_seconds);
        s.visit_count = u.value("visit_count", s.visit_count);
        s.seed = u.value("seed", s.seed);
        s.pages_per_domain = u.value("pages_per_domain", s.pages_per_domain);
        s.start_time = u.value("start_time", s.start_time);
        synth::validate(s.model);
        specs.push_back(std::move(s));
      }
    }
    if (doc.contains("ensemble")) {
      const auto &e = doc.at("ensemble");
      synth::EnsembleConfig c;
      c.users = e.value("users", c.users);
      c.seed = e.value("seed", c.seed);
      c.user_prefix = e.value("user_prefix", c.user_prefix);
      c.min_states = e.value("min_states", c.min_states);
      c.max_states = e.value("max_states", c.max_states);
      c.min_fanout = e.value("min_fanout", c.min_fanout);
      c.max_fanout = e.value("max_fanout", c.max_fanout);
      c.self_loop_weight = e.value("self_loop_weight", c.self_loop_weight);
      c.dwell_mean_seconds = e.value("dwell_mean_seconds", c.dwell_mean_seconds);
      c.visit_count = e.value("visit_count", c.visit_count);
      c.pages_per_domain = e.value("pages_per_domain", c.pages_per_domain);
      for (auto &s : synth::make_ensemble(c))
        specs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception &ex) {
    throw ConfigError(std::string("invalid synth spec: ") + ex.what());
  }
  if (specs.empty())
    throw ConfigError("synth spec defines no users");
  return specs;
}

inline UserEvents synth_user_events(
    const std::vector<synth::SyntheticUserSpec> &specs) {
  UserEvents users;
  for (const auto &s : specs) {
    if (users.count(s.user_id))
      throw ConfigError("duplicate synthetic user id '" + s.user_id + "'");
    users.emplace(s.user_id, synth::synth_events(s));
  }
  return users;
}

// ---------------------------------------------------------------- writers

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string fmt_real(double x) { return fmt::format("{:.10f}", x); }

inline void write_events_csv(std::ostream &out, const UserEvents &users) {
  out << "user_id,timestamp,url,domain,category,active_seconds\n";
  for (const auto &[user, events] : users)
    for (const auto &e : events)
      out << csv_field(e.user_id) << ',' << e.start_time << ','
          << csv_field(e.url) << ',' << csv_field(e.domain) << ','
          << csv_field(e.category) << ',' << e.active_seconds << '\n';
}

inline void write_report_csv(std::ostream &out,
                             const std::vector<ReportRow> &rows) {
  out << "user_id,kind,resolution,delta_t_seconds,length,n_symbols,s_rand,"
         "s_unc,s_rate,pi_rand,pi_unc,pi_max,clamped\n";
  for (const auto &r : rows) {
    out << csv_field(r.user_id) << ',' << to_string(r.kind) << ','
        << to_string(r.resolution) << ','
        << (r.delta_t_seconds ? std::to_string(*r.delta_t_seconds) : "") << ','
        << r.entropy.length << ',' << r.entropy.n_symbols << ','
        << fmt_real(r.entropy.s_rand) << ',' << fmt_real(r.entropy.s_unc) << ','
        << fmt_real(r.entropy.s_rate) << ','
        << fmt_real(r.predictability.pi_rand) << ','
        << fmt_real(r.predictability.pi_unc) << ','
        << fmt_real(r.predictability.pi_max) << ','
        << (r.predictability.clamped ? 1 : 0) << '\n';
  }
}

inline void write_exclusions_csv(std::ostream &out,
                                 const std::vector<Exclusion> &rows) {
  out << "user_id,reason\n";
  for (const auto &e : rows)
    out << csv_field(e.user_id) << ',' << csv_field(e.reason) << '\n';
}

inline void write_sweep_csv(std::ostream &out, SweepDimension dim,
                            const std::vector<SweepRow> &rows) {
  out << (dim == SweepDimension::Temporal ? "delta_t_seconds" : "resolution")
      << ",kind,n_users";
  for (auto name : {"s_rand", "s_unc", "s_rate", "pi_rand", "pi_unc", "pi_max"})
    out << ',' << name << "_mean," << name << "_lower," << name << "_upper";
  out << '\n';
  for (const auto &r : rows) {
    out << r.grid_value << ',' << to_string(r.kind) << ',' << r.n_users;
    for (const auto *m : {&r.summary.s_rand, &r.summary.s_unc, &r.summary.s_rate,
                          &r.summary.pi_rand, &r.summary.pi_unc,
                          &r.summary.pi_max}) {
      if (*m)
        out << ',' << fmt_real((*m)->mean) << ',' << fmt_real((*m)->lower)
            << ',' << fmt_real((*m)->upper);
      else
        out << ",,,";
    }
    out << '\n';
  }
}

inline void write_convergence_csv(std::ostream &out,
                                  const ConvergenceReport &rep) {
  out << "length,mean_delta,q05_delta,q95_delta\n";
  for (const auto &r : rep.rows)
    out << r.length << ',' << fmt_real(r.mean_delta) << ','
        << fmt_real(r.q05) << ',' << fmt_real(r.q95) << '\n';
}

inline void write_compare_csv(std::ostream &out, const CompareReport &rep) {
  out << "group_a,group_b,n_a,n_b,ks_statistic,p_value,cliffs_delta,"
         "alpha_adjusted,significant\n";
  for (const auto &g : rep.comparisons)
    out << csv_field(g.group_a) << ',' << csv_field(g.group_b) << ','
        << g.size_a << ',' << g.size_b << ',' << fmt_real(g.ks_statistic)
        << ',' << fmt::format("{:.6e}", g.p_value) << ','
        << fmt_real(g.cliffs_delta) << ','
        << fmt::format("{:.6e}", g.alpha_adjusted) << ','
        << (g.significant ? 1 : 0) << '\n';
}

inline nlohmann::json config_json(const RunConfig &cfg) {
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : cfg.kinds)
    kinds.push_back(std::string(to_string(k)));
  return {{"resolution", std::string(to_string(cfg.resolution))},
          {"delta_t_seconds", cfg.delta_t_seconds},
          {"kinds", kinds},
          {"min_length", cfg.min_length},
          {"seed", cfg.seed},
          {"step", cfg.step},
          {"threshold", cfg.threshold},
          {"horizon", cfg.horizon},
          {"delta_t_grid", cfg.delta_t_grid},
          {"metric", cfg.metric},
          {"alpha", cfg.alpha}};
}

} // namespace webpred
