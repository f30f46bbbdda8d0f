// webpred: batch front-end for trajectory predictability analyses.
//
// Exit codes: 0 success, 1 input error, 2 configuration error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "webpred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace webpred;

namespace {

constexpr int kInputError = 1;
constexpr int kConfigError = 2;

struct CommonOptions {
  std::string input;
  std::string out;
  std::int64_t delta_t = 60;
  std::string resolution = "domain";
  std::string kinds;
  std::size_t min_length = 100;
  std::uint64_t seed = 0;
  std::size_t step = 1;
  double threshold = 0.01;
  std::size_t workers = 1;
};

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty())
      out.push_back(item);
  return out;
}

std::vector<TrajectoryKind> parse_kinds(const std::string &s) {
  std::vector<TrajectoryKind> kinds;
  for (const auto &item : split_list(s)) {
    auto k = parse_kind(item);
    if (!k)
      throw ConfigError("unknown trajectory kind '" + item +
                        "' (expected stat, bin-nonstat or seq-nonstat)");
    kinds.push_back(*k);
  }
  if (kinds.empty())
    throw ConfigError("--kinds is empty");
  return kinds;
}

RunConfig make_config(const CommonOptions &o) {
  RunConfig cfg;
  auto res = parse_resolution(o.resolution);
  if (!res)
    throw ConfigError("unknown resolution '" + o.resolution + "'");
  cfg.resolution = *res;
  cfg.delta_t_seconds = o.delta_t;
  cfg.min_length = o.min_length;
  cfg.seed = o.seed;
  cfg.step = o.step;
  cfg.threshold = o.threshold;
  cfg.workers = o.workers;
  if (!o.kinds.empty()) {
    cfg.kinds = parse_kinds(o.kinds);
    cfg.convergence_kind = cfg.kinds.front();
    cfg.compare_kind = cfg.kinds.front();
  }
  cfg.validate();
  return cfg;
}

fs::path output_dir(const CommonOptions &o) {
  if (o.out.empty())
    throw ConfigError("--out is required");
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path &p) {
  std::ofstream f(p, std::ios::binary);
  if (!f)
    throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

UserEvents load_input(const CommonOptions &o) {
  if (o.input.empty())
    throw ConfigError("--input is required");
  return read_events_file(o.input);
}

void write_summary(const fs::path &dir, const std::string &command,
                   const RunConfig &cfg, nlohmann::json counts,
                   double seconds) {
  nlohmann::json doc{{"command", command},
                     {"config", config_json(cfg)},
                     {"counts", std::move(counts)},
                     {"elapsed_seconds", seconds}};
  open_out(dir / "summary.json") << doc.dump(2) << '\n';
}

void add_common(CLI::App *sub, CommonOptions &o, bool needs_input = true) {
  auto *in = sub->add_option("--input", o.input, "visit log (.csv or .jsonl)");
  if (needs_input)
    in->required();
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--delta-t", o.delta_t, "time-bin width in seconds")
      ->capture_default_str();
  sub->add_option("--resolution", o.resolution, "url | domain | category")
      ->capture_default_str();
  sub->add_option("--kinds", o.kinds,
                  "comma list of stat,bin-nonstat,seq-nonstat");
  sub->add_option("--min-length", o.min_length,
                  "minimum bin-nonstat length for a user to be analysed")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "tie-break seed")->capture_default_str();
  sub->add_option("--step", o.step, "convergence grid step")
      ->capture_default_str();
  sub->add_option("--threshold", o.threshold, "convergence threshold")
      ->capture_default_str();
  sub->add_option("--workers", o.workers, "worker threads")
      ->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Entropy and predictability limits of visit trajectories"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string dimension = "temporal";
  std::string groups_path;
  std::string spec_path;
  std::string delta_t_grid;
  std::string resolution_grid;
  std::string metric = "pi_max";
  double alpha = 0.05;
  std::size_t horizon = 200;

  auto *analyze = app.add_subcommand("analyze", "per-user entropy and predictability report");
  add_common(analyze, opt);

  auto *sweep = app.add_subcommand("sweep", "ensemble means over a delta-t or resolution grid");
  add_common(sweep, opt);
  sweep->add_option("--dimension", dimension, "temporal | spatial")
      ->check(CLI::IsMember({"temporal", "spatial"}))
      ->capture_default_str();
  sweep->add_option("--delta-t-grid", delta_t_grid, "comma list of seconds");
  sweep->add_option("--resolution-grid", resolution_grid,
                    "comma list of url,domain,category");

  auto *converge = app.add_subcommand("converge", "prefix convergence of Pi_max");
  add_common(converge, opt);
  converge->add_option("--horizon", horizon, "prefix length analysed per user")
      ->capture_default_str();

  auto *compare = app.add_subcommand("compare", "pairwise group comparisons");
  add_common(compare, opt);
  compare->add_option("--groups", groups_path, "CSV with user_id,group")
      ->required();
  compare->add_option("--metric", metric, "measure to compare")
      ->check(CLI::IsMember(
          {"pi_max", "pi_unc", "pi_rand", "s_rate", "s_unc", "s_rand"}))
      ->capture_default_str();
  compare->add_option("--alpha", alpha, "family-wise significance level")
      ->capture_default_str();

  auto *synth_cmd = app.add_subcommand("synth", "generate a synthetic visit log");
  synth_cmd->add_option("--spec", spec_path, "JSON spec")->required();
  synth_cmd->add_option("--out", opt.out, "output CSV path (stdout if absent)");

  auto *dump = app.add_subcommand("dump-trajectories", "write trajectories as TSV");
  add_common(dump, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  try {
    if (*synth_cmd) {
      std::ifstream f(spec_path);
      if (!f)
        throw ConfigError("cannot open spec '" + spec_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
      }
      const auto users = synth_user_events(parse_synth_spec(doc));
      if (opt.out.empty()) {
        write_events_csv(std::cout, users);
      } else {
        const fs::path p(opt.out);
        if (p.has_parent_path())
          fs::create_directories(p.parent_path());
        auto out = open_out(p);
        write_events_csv(out, users);
      }
      return 0;
    }

    RunConfig cfg = make_config(opt);
    cfg.metric = metric;
    cfg.alpha = alpha;
    cfg.horizon = horizon;
    if (!delta_t_grid.empty()) {
      cfg.delta_t_grid.clear();
      for (const auto &v : split_list(delta_t_grid))
        cfg.delta_t_grid.push_back(detail::parse_int(v, "--delta-t-grid", 0));
    }
    if (!resolution_grid.empty()) {
      cfg.resolution_grid.clear();
      for (const auto &v : split_list(resolution_grid)) {
        auto r = parse_resolution(v);
        if (!r)
          throw ConfigError("unknown resolution '" + v + "'");
        cfg.resolution_grid.push_back(*r);
      }
    }
    cfg.validate();
    const auto users = load_input(opt);

    if (*analyze) {
      const auto dir = output_dir(opt);
      const auto rep = run_pipeline(users, cfg);
      auto report = open_out(dir / "report.csv");
      write_report_csv(report, rep.rows);
      auto excluded = open_out(dir / "excluded.csv");
      write_exclusions_csv(excluded, rep.exclusions);
      write_summary(dir, "analyze", cfg,
                    {{"users", rep.users_seen},
                     {"reported", rep.users_reported},
                     {"excluded", rep.exclusions.size()},
                     {"rows", rep.rows.size()}},
                    elapsed());
    } else if (*sweep) {
      const auto dir = output_dir(opt);
      const auto dim = dimension == "spatial" ? SweepDimension::Spatial
                                              : SweepDimension::Temporal;
      std::vector<Exclusion> excluded_users;
      const auto kept = gated_users(users, cfg, &excluded_users);
      const auto table = run_sweep(users, cfg, dim);
      auto out = open_out(dir / ("sweep_" + dimension + ".csv"));
      write_sweep_csv(out, dim, table);
      auto excluded = open_out(dir / "excluded.csv");
      write_exclusions_csv(excluded, excluded_users);
      write_summary(dir, "sweep", cfg,
                    {{"users", users.size()},
                     {"population", kept.size()},
                     {"grid_points", table.size()}},
                    elapsed());
    } else if (*converge) {
      const auto dir = output_dir(opt);
      const auto rep = run_convergence(users, cfg);
      auto out = open_out(dir / "convergence.csv");
      write_convergence_csv(out, rep);
      auto excluded = open_out(dir / "excluded.csv");
      write_exclusions_csv(excluded, rep.exclusions);
      nlohmann::json chosen = nullptr;
      if (rep.min_length)
        chosen = *rep.min_length;
      write_summary(dir, "converge", cfg,
                    {{"users", users.size()},
                     {"users_used", rep.users_used.size()},
                     {"min_sufficient_length", chosen}},
                    elapsed());
      std::cout << "min_sufficient_length: "
                << (rep.min_length ? std::to_string(*rep.min_length)
                                   : std::string("not reached"))
                << '\n';
    } else if (*compare) {
      const auto dir = output_dir(opt);
      std::ifstream gf(groups_path);
      if (!gf)
        throw InputError("cannot open grouping file '" + groups_path + "'");
      const auto rep = run_compare(users, cfg, parse_groups(gf));
      auto out = open_out(dir / "compare.csv");
      write_compare_csv(out, rep);
      auto warn = open_out(dir / "warnings.txt");
      for (const auto &w : rep.warnings) {
        warn << w << '\n';
        std::cerr << "warning: " << w << '\n';
      }
      write_summary(dir, "compare", cfg,
                    {{"comparisons", rep.comparisons.size()},
                     {"warnings", rep.warnings.size()}},
                    elapsed());
    } else if (*dump) {
      std::ofstream file;
      std::ostream *out = &std::cout;
      if (!opt.out.empty()) {
        file = open_out(output_dir(opt) / "trajectories.tsv");
        out = &file;
      }
      for (const auto &[user, events] : users) {
        SymbolTable table;
        for (auto kind : cfg.kinds)
          *out << format_dump_line(user, build_trajectory(events, kind,
                                                          cfg.binning(),
                                                          cfg.resolution, table))
               << '\n';
      }
    }
  } catch (const InputError &e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const UndefinedError &e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
