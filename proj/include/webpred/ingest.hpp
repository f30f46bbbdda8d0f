#pragma once

// Visit-log parsing and per-user symbol allocation.
//
// Input is a flat table with the columns
//   user_id,timestamp,url,domain,category,active_seconds
// in any order, either comma-separated (with RFC 4180 style quoting) or as
// line-delimited JSON objects carrying the same six keys.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "webpred/error.hpp"

namespace webpred {

using SymbolId = std::uint32_t;

struct VisitEvent {
  std::string user_id;
  std::int64_t start_time = 0;     // epoch seconds, UTC
  std::int64_t active_seconds = 0; // >= 0
  std::string url;
  std::string domain;
  std::string category;

  std::int64_t end_time() const noexcept { return start_time + active_seconds; }

  friend bool operator==(const VisitEvent &, const VisitEvent &) = default;
};

/// Per-user event streams, keyed (and therefore iterated) in user-id order.
using UserEvents = std::map<std::string, std::vector<VisitEvent>>;

enum class SpatialResolution { Url, Domain, Category };

inline std::string_view to_string(SpatialResolution r) noexcept {
  switch (r) {
  case SpatialResolution::Url:
    return "url";
  case SpatialResolution::Domain:
    return "domain";
  case SpatialResolution::Category:
    return "category";
  }
  return "?";
}

inline std::optional<SpatialResolution>
parse_resolution(std::string_view s) noexcept {
  if (s == "url")
    return SpatialResolution::Url;
  if (s == "domain")
    return SpatialResolution::Domain;
  if (s == "category")
    return SpatialResolution::Category;
  return std::nullopt;
}

inline const std::string &location_of(const VisitEvent &e,
                                      SpatialResolution r) noexcept {
  switch (r) {
  case SpatialResolution::Url:
    return e.url;
  case SpatialResolution::Category:
    return e.category;
  case SpatialResolution::Domain:
    break;
  }
  return e.domain;
}

/// Dense bijection between location strings and ids 0..N-1, scoped to one
/// (user, resolution) pair.
class SymbolTable {
public:
  SymbolId intern(std::string_view location) {
    auto it = ids_.find(std::string(location));
    if (it != ids_.end())
      return it->second;
    const auto id = static_cast<SymbolId>(names_.size());
    names_.emplace_back(location);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<SymbolId> find(std::string_view location) const {
    auto it = ids_.find(std::string(location));
    if (it == ids_.end())
      return std::nullopt;
    return it->second;
  }

  const std::string &name(SymbolId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

private:
  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<std::string> names_;
};

inline SymbolId resolve_location(const VisitEvent &event, SpatialResolution res,
                                 SymbolTable &table) {
  return table.intern(location_of(event, res));
}

enum class InputFormat { Csv, JsonLines };

/// `.jsonl` / `.ndjson` select line-delimited JSON; everything else is CSV.
inline InputFormat format_for_path(const std::filesystem::path &p) {
  const auto ext = p.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson")
    return InputFormat::JsonLines;
  return InputFormat::Csv;
}

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Splits one CSV record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported.
inline std::vector<std::string> split_csv(std::string_view line,
                                          std::size_t lineno) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty() && !was_quoted) {
      field.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted)
    throw InputError("unterminated quoted field", lineno);
  out.push_back(std::move(field));
  return out;
}

inline std::int64_t parse_int(std::string_view text, std::string_view column,
                              std::size_t lineno) {
  const auto s = trim(text);
  std::int64_t v = 0;
  const auto *first = s.data();
  const auto *last = s.data() + s.size();
  if (!s.empty() && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last)
    throw InputError("cannot parse " + std::string(column) + " '" +
                         std::string(s) + "' as an integer",
                     lineno);
  return v;
}

constexpr std::string_view kColumns[] = {"user_id", "timestamp",
                                         "url",     "domain",
                                         "category", "active_seconds"};

inline VisitEvent make_event(std::string_view user, std::string_view ts,
                             std::string_view url, std::string_view domain,
                             std::string_view category,
                             std::string_view active, std::size_t lineno) {
  VisitEvent e;
  e.user_id = std::string(trim(user));
  e.start_time = parse_int(ts, "timestamp", lineno);
  e.active_seconds = parse_int(active, "active_seconds", lineno);
  e.url = std::string(trim(url));
  e.domain = std::string(trim(domain));
  e.category = std::string(trim(category));
  if (e.active_seconds < 0)
    throw InputError("active_seconds must be non-negative, got " +
                         std::to_string(e.active_seconds),
                     lineno);
  if (e.user_id.empty())
    throw InputError("empty user_id", lineno);
  if (e.url.empty() || e.domain.empty() || e.category.empty())
    throw InputError("url, domain and category must be non-empty", lineno);
  return e;
}

inline std::string json_field(const nlohmann::json &obj, std::string_view key,
                              std::size_t lineno) {
  auto it = obj.find(std::string(key));
  if (it == obj.end())
    throw InputError("missing field '" + std::string(key) + "'", lineno);
  if (it->is_string())
    return it->get<std::string>();
  if (it->is_number_integer())
    return std::to_string(it->get<std::int64_t>());
  throw InputError("field '" + std::string(key) +
                       "' must be a string or an integer",
                   lineno);
}

/// Sorts each stream into a canonical order and rejects overlapping visits.
inline void finalize_streams(UserEvents &users) {
  for (auto &[user, events] : users) {
    std::sort(events.begin(), events.end(),
              [](const VisitEvent &a, const VisitEvent &b) {
                return std::tie(a.start_time, a.active_seconds, a.url, a.domain,
                                a.category) < std::tie(b.start_time,
                                                       b.active_seconds, b.url,
                                                       b.domain, b.category);
              });
    for (std::size_t i = 1; i < events.size(); ++i) {
      const auto &prev = events[i - 1];
      if (prev.end_time() > events[i].start_time)
        throw InputError("overlapping visits for user '" + user +
                         "': visit at " + std::to_string(prev.start_time) +
                         " (" + std::to_string(prev.active_seconds) +
                         " s) overlaps visit at " +
                         std::to_string(events[i].start_time));
    }
  }
}

} // namespace detail

/// Parses a visit log into per-user streams sorted by start time.
inline UserEvents parse_events(std::istream &in,
                               InputFormat format = InputFormat::Csv) {
  UserEvents users;
  std::string line;
  std::size_t lineno = 0;

  if (format == InputFormat::JsonLines) {
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty())
        continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error &e) {
        throw InputError(std::string("invalid JSON record: ") + e.what(),
                         lineno);
      }
      if (!obj.is_object())
        throw InputError("record is not a JSON object", lineno);
      auto e = detail::make_event(
          detail::json_field(obj, "user_id", lineno),
          detail::json_field(obj, "timestamp", lineno),
          detail::json_field(obj, "url", lineno),
          detail::json_field(obj, "domain", lineno),
          detail::json_field(obj, "category", lineno),
          detail::json_field(obj, "active_seconds", lineno), lineno);
      users[e.user_id].push_back(std::move(e));
    }
    detail::finalize_streams(users);
    return users;
  }

  if (!std::getline(in, line))
    return users; // zero-byte input: no users
  ++lineno;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  const auto header = detail::split_csv(line, lineno);
  std::size_t col[6];
  for (std::size_t k = 0; k < 6; ++k) {
    auto it = std::find_if(header.begin(), header.end(), [&](const auto &h) {
      return detail::trim(h) == detail::kColumns[k];
    });
    if (it == header.end())
      throw InputError("header lacks required column '" +
                           std::string(detail::kColumns[k]) + "'",
                       lineno);
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty())
      continue;
    const auto f = detail::split_csv(line, lineno);
    if (f.size() != header.size())
      throw InputError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(f.size()),
                       lineno);
    auto e = detail::make_event(f[col[0]], f[col[1]], f[col[2]], f[col[3]],
                                f[col[4]], f[col[5]], lineno);
    users[e.user_id].push_back(std::move(e));
  }
  detail::finalize_streams(users);
  return users;
}

inline UserEvents parse_events(std::string_view text,
                               InputFormat format = InputFormat::Csv) {
  std::istringstream in{std::string(text)};
  return parse_events(in, format);
}

inline UserEvents read_events_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open input file '" + path.string() + "'");
  try {
    return parse_events(in, format_for_path(path));
  } catch (const InputError &e) {
    throw InputError::in_file(path.string(), e);
  }
}

} // namespace webpred
