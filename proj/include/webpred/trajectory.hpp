#pragma once

// Stationary (time-binned) and non-stationary trajectories built from one
// user's sorted, non-overlapping visit stream.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "webpred/error.hpp"
#include "webpred/ingest.hpp"

namespace webpred {

enum class TrajectoryKind { Stat, BinNonStat, SeqNonStat };

inline std::string_view to_string(TrajectoryKind k) noexcept {
  switch (k) {
  case TrajectoryKind::Stat:
    return "stat";
  case TrajectoryKind::BinNonStat:
    return "bin-nonstat";
  case TrajectoryKind::SeqNonStat:
    return "seq-nonstat";
  }
  return "?";
}

inline std::optional<TrajectoryKind> parse_kind(std::string_view s) noexcept {
  if (s == "stat")
    return TrajectoryKind::Stat;
  if (s == "bin-nonstat")
    return TrajectoryKind::BinNonStat;
  if (s == "seq-nonstat")
    return TrajectoryKind::SeqNonStat;
  return std::nullopt;
}

inline std::size_t count_distinct(std::span<const SymbolId> symbols) {
  return std::unordered_set<SymbolId>(symbols.begin(), symbols.end()).size();
}

struct Trajectory {
  std::vector<SymbolId> symbols;
  std::size_t alphabet_size = 0;
  TrajectoryKind kind = TrajectoryKind::SeqNonStat;
  std::optional<std::int64_t> delta_t_seconds; // unset for SeqNonStat
  SpatialResolution resolution = SpatialResolution::Domain;

  std::size_t length() const noexcept { return symbols.size(); }
  bool empty() const noexcept { return symbols.empty(); }

  friend bool operator==(const Trajectory &, const Trajectory &) = default;
};

struct BinningConfig {
  std::int64_t delta_t_seconds = 60;
  std::uint64_t tie_break_seed = 0;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

} // namespace detail

/// Stateless draw keyed by (seed, user, bin): the same key always yields the
/// same value, independent of evaluation order.
inline std::uint64_t tie_break_draw(std::uint64_t seed, std::string_view user,
                                    std::int64_t bin) noexcept {
  using detail::splitmix64;
  return splitmix64(seed ^
                    splitmix64(detail::fnv1a(user) ^
                               splitmix64(static_cast<std::uint64_t>(bin))));
}

inline std::vector<SymbolId> compress_adjacent(std::span<const SymbolId> symbols) {
  std::vector<SymbolId> out;
  out.reserve(symbols.size());
  for (auto s : symbols)
    if (out.empty() || out.back() != s)
      out.push_back(s);
  return out;
}

/// One symbol per non-empty bin of width delta_t, anchored at the first
/// visit's start. The winner is the location with the most active seconds
/// overlapping the bin; ties go to a keyed pseudo-random pick.
///
/// Every visit is interned into `table` in stream order, so ids agree with
/// build_sequential_nonstationary on the same table.
inline Trajectory build_stationary(std::span<const VisitEvent> events,
                                   const BinningConfig &cfg,
                                   SpatialResolution res, SymbolTable &table) {
  if (cfg.delta_t_seconds <= 0)
    throw ConfigError("delta_t_seconds must be positive");
  Trajectory t;
  t.kind = TrajectoryKind::Stat;
  t.delta_t_seconds = cfg.delta_t_seconds;
  t.resolution = res;
  if (events.empty())
    return t;

  const std::int64_t dt = cfg.delta_t_seconds;
  const std::int64_t t0 = events.front().start_time;
  const std::string_view user = events.front().user_id;

  std::int64_t cur_bin = -1;
  std::vector<std::pair<SymbolId, std::int64_t>> acc; // (symbol, seconds)
  std::vector<SymbolId> tied;

  auto flush = [&] {
    if (acc.empty())
      return;
    std::int64_t best = 0;
    for (const auto &[sym, secs] : acc)
      best = std::max(best, secs);
    tied.clear();
    for (const auto &[sym, secs] : acc)
      if (secs == best)
        tied.push_back(sym);
    SymbolId winner = tied.front();
    if (tied.size() > 1) {
      std::sort(tied.begin(), tied.end());
      winner = tied[tie_break_draw(cfg.tie_break_seed, user, cur_bin) %
                    tied.size()];
    }
    t.symbols.push_back(winner);
    acc.clear();
  };

  for (const auto &e : events) {
    const SymbolId sym = resolve_location(e, res, table);
    if (e.active_seconds == 0)
      continue;
    const std::int64_t s = e.start_time - t0;
    const std::int64_t end = s + e.active_seconds;
    for (std::int64_t b = s / dt; b * dt < end; ++b) {
      if (b != cur_bin) {
        flush();
        cur_bin = b;
      }
      const std::int64_t overlap =
          std::min(end, (b + 1) * dt) - std::max(s, b * dt);
      auto it = std::find_if(acc.begin(), acc.end(),
                             [sym](const auto &p) { return p.first == sym; });
      if (it == acc.end())
        acc.emplace_back(sym, overlap);
      else
        it->second += overlap;
    }
  }
  flush();
  t.alphabet_size = count_distinct(t.symbols);
  return t;
}

inline Trajectory build_stationary(std::span<const VisitEvent> events,
                                   const BinningConfig &cfg,
                                   SpatialResolution res) {
  SymbolTable table;
  return build_stationary(events, cfg, res, table);
}

inline Trajectory to_binned_nonstationary(Trajectory stationary) {
  stationary.symbols = compress_adjacent(stationary.symbols);
  stationary.kind = TrajectoryKind::BinNonStat;
  return stationary;
}

inline Trajectory build_binned_nonstationary(std::span<const VisitEvent> events,
                                             const BinningConfig &cfg,
                                             SpatialResolution res,
                                             SymbolTable &table) {
  return to_binned_nonstationary(build_stationary(events, cfg, res, table));
}

inline Trajectory build_binned_nonstationary(std::span<const VisitEvent> events,
                                             const BinningConfig &cfg,
                                             SpatialResolution res) {
  SymbolTable table;
  return build_binned_nonstationary(events, cfg, res, table);
}

/// Raw visit order mapped to locations, adjacent repeats collapsed.
inline Trajectory build_sequential_nonstationary(
    std::span<const VisitEvent> events, SpatialResolution res,
    SymbolTable &table) {
  Trajectory t;
  t.kind = TrajectoryKind::SeqNonStat;
  t.resolution = res;
  t.symbols.reserve(events.size());
  for (const auto &e : events) {
    const auto sym = resolve_location(e, res, table);
    if (t.symbols.empty() || t.symbols.back() != sym)
      t.symbols.push_back(sym);
  }
  t.alphabet_size = count_distinct(t.symbols);
  return t;
}

inline Trajectory
build_sequential_nonstationary(std::span<const VisitEvent> events,
                               SpatialResolution res) {
  SymbolTable table;
  return build_sequential_nonstationary(events, res, table);
}

inline Trajectory build_trajectory(std::span<const VisitEvent> events,
                                   TrajectoryKind kind, const BinningConfig &cfg,
                                   SpatialResolution res, SymbolTable &table) {
  switch (kind) {
  case TrajectoryKind::Stat:
    return build_stationary(events, cfg, res, table);
  case TrajectoryKind::BinNonStat:
    return build_binned_nonstationary(events, cfg, res, table);
  case TrajectoryKind::SeqNonStat:
    break;
  }
  return build_sequential_nonstationary(events, res, table);
}

// Dump format: user_id<TAB>kind<TAB>N<TAB>space-separated symbol ids

inline std::string format_dump_line(std::string_view user_id,
                                    const Trajectory &t) {
  std::string out;
  out.append(user_id).push_back('\t');
  out.append(to_string(t.kind)).push_back('\t');
  out.append(std::to_string(t.alphabet_size)).push_back('\t');
  for (std::size_t i = 0; i < t.symbols.size(); ++i) {
    if (i)
      out.push_back(' ');
    out.append(std::to_string(t.symbols[i]));
  }
  return out;
}

struct DumpRecord {
  std::string user_id;
  TrajectoryKind kind;
  std::size_t alphabet_size;
  std::vector<SymbolId> symbols;
};

inline DumpRecord parse_dump_line(std::string_view line) {
  const auto t1 = line.find('\t');
  const auto t2 = t1 == line.npos ? line.npos : line.find('\t', t1 + 1);
  const auto t3 = t2 == line.npos ? line.npos : line.find('\t', t2 + 1);
  if (t3 == line.npos)
    throw InputError("trajectory dump line needs four tab-separated fields");
  DumpRecord r;
  r.user_id = std::string(line.substr(0, t1));
  auto kind = parse_kind(line.substr(t1 + 1, t2 - t1 - 1));
  if (!kind)
    throw InputError("unknown trajectory kind in dump line");
  r.kind = *kind;
  r.alphabet_size = static_cast<std::size_t>(
      detail::parse_int(line.substr(t2 + 1, t3 - t2 - 1), "N", 0));
  std::istringstream ids{std::string(line.substr(t3 + 1))};
  std::int64_t v = 0;
  while (ids >> v) {
    if (v < 0)
      throw InputError("negative symbol id in dump line");
    r.symbols.push_back(static_cast<SymbolId>(v));
  }
  if (!ids.eof())
    throw InputError("malformed symbol list in dump line");
  if (r.alphabet_size != count_distinct(r.symbols))
    throw InputError("dump line N does not match its symbols");
  return r;
}

} // namespace webpred
