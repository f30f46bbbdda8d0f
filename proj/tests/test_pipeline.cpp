#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "webpred/pipeline.hpp"

using namespace webpred;

namespace {

UserEvents toy() {
  return read_events_file(std::string(WEBPRED_DATA_DIR) + "/toy_visits.csv");
}

RunConfig toy_config() {
  RunConfig cfg;
  cfg.min_length = 2;
  return cfg;
}

std::vector<synth::SyntheticUserSpec> markov_group(const std::string &prefix,
                                                   const synth::MarkovModel &m,
                                                   int n, std::uint64_t seed) {
  std::vector<synth::SyntheticUserSpec> out;
  for (int i = 0; i < n; ++i) {
    synth::SyntheticUserSpec s;
    s.user_id = prefix + std::to_string(i);
    s.model = m;
    s.visit_count = 400;
    s.seed = seed + static_cast<std::uint64_t>(i);
    out.push_back(s);
  }
  return out;
}

// Rows cycle to the next state with probability 1 - q, else skip one ahead.
synth::MarkovModel low_entropy_chain() {
  const double q = 0.0527;
  return synth::uniform_start({{0, 1 - q, q}, {q, 0, 1 - q}, {1 - q, q, 0}});
}

// Cyclic shifts of (0, 1/2, 1/4, 1/4): doubly stochastic, rate 1.5 bits.
synth::MarkovModel high_entropy_chain() {
  return synth::uniform_start({{0, 0.5, 0.25, 0.25},
                               {0.25, 0, 0.5, 0.25},
                               {0.25, 0.25, 0, 0.5},
                               {0.5, 0.25, 0.25, 0}});
}

} // namespace

TEST(Analyze, ToyFixtureRows) {
  const auto rep = run_pipeline(toy(), toy_config());
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.users_seen, 1u);
  EXPECT_EQ(rep.users_reported, 1u);
  EXPECT_TRUE(rep.exclusions.empty());

  const auto &stat = rep.rows[0];
  EXPECT_EQ(stat.kind, TrajectoryKind::Stat);
  EXPECT_EQ(stat.entropy.length, 17u);
  EXPECT_EQ(stat.entropy.n_symbols, 3u);
  EXPECT_NEAR(stat.entropy.s_rand, std::log2(3.0), 1e-12);
  EXPECT_NEAR(stat.entropy.s_unc, 1.2639334294856335, 1e-12);
  const std::vector<std::uint32_t> stat_seq{0, 0, 0, 0, 0, 0, 0, 1, 1,
                                            1, 1, 1, 1, 1, 1, 0, 2};
  const auto lam = oracle::match_lengths(stat_seq);
  double sum = 0;
  for (auto l : lam)
    sum += l;
  EXPECT_NEAR(stat.entropy.s_rate, 17.0 * std::log2(17.0) / sum, 1e-12);
  EXPECT_NEAR(stat.predictability.pi_max,
              oracle::fano_grid(stat.entropy.s_rate, 3), 1e-6);

  EXPECT_EQ(rep.rows[1].kind, TrajectoryKind::BinNonStat);
  EXPECT_EQ(rep.rows[1].entropy.length, 4u);
  EXPECT_EQ(rep.rows[2].kind, TrajectoryKind::SeqNonStat);
  EXPECT_EQ(rep.rows[2].entropy.length, 5u);
  EXPECT_FALSE(rep.rows[2].delta_t_seconds);
}

TEST(Analyze, ToyReportMatchesGoldenFile) {
  std::ostringstream out;
  write_report_csv(out, run_pipeline(toy(), toy_config()).rows);
  std::ifstream golden(std::string(WEBPRED_TEST_DIR) + "/golden/toy_report.csv",
                       std::ios::binary);
  ASSERT_TRUE(golden);
  std::stringstream expected;
  expected << golden.rdbuf();
  EXPECT_EQ(out.str(), expected.str());
}

TEST(Analyze, DefaultGateExcludesTheToyUserWithReason) {
  const auto rep = run_pipeline(toy(), RunConfig{});
  EXPECT_TRUE(rep.rows.empty());
  ASSERT_EQ(rep.exclusions.size(), 1u);
  EXPECT_EQ(rep.exclusions[0].user_id, "toy");
  EXPECT_NE(rep.exclusions[0].reason.find("length 4"), std::string::npos);
}

TEST(Analyze, EmptyInput) {
  const auto rep = run_pipeline({}, RunConfig{});
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_TRUE(rep.exclusions.empty());
  EXPECT_EQ(rep.users_seen, 0u);
}

TEST(Analyze, EveryUserReportedOrExcludedOnce) {
  synth::EnsembleConfig ec;
  ec.users = 20;
  ec.visit_count = 300;
  auto users = synth_user_events(synth::make_ensemble(ec));
  users["short"] = {{"short", 0, 600, "x/p", "x", "k"}};
  RunConfig cfg;
  cfg.min_length = 20;
  const auto rep = run_pipeline(users, cfg);
  std::multiset<std::string> seen;
  for (const auto &e : rep.exclusions)
    seen.insert(e.user_id);
  std::set<std::string> reported;
  for (const auto &r : rep.rows)
    reported.insert(r.user_id);
  for (const auto &u : reported)
    seen.insert(u);
  EXPECT_EQ(seen.size(), users.size());
  for (const auto &[u, ev] : users)
    EXPECT_EQ(seen.count(u), 1u) << u;
  EXPECT_EQ(rep.rows.size(), 3 * reported.size());
  EXPECT_GT(reported.size(), 0u);
  EXPECT_GT(rep.exclusions.size(), 0u);
}

TEST(Analyze, WorkerCountDoesNotChangeTheReport) {
  synth::EnsembleConfig ec;
  ec.users = 16;
  ec.visit_count = 400;
  const auto users = synth_user_events(synth::make_ensemble(ec));
  RunConfig cfg;
  auto render = [&](std::size_t workers) {
    cfg.workers = workers;
    std::ostringstream out;
    const auto rep = run_pipeline(users, cfg);
    write_report_csv(out, rep.rows);
    write_exclusions_csv(out, rep.exclusions);
    return out.str();
  };
  const auto one = render(1);
  EXPECT_EQ(one, render(3));
  EXPECT_EQ(one, render(8));
}

TEST(Analyze, ParallelForPropagatesFailures) {
  EXPECT_THROW(parallel_for(10, 4,
                            [](std::size_t i) {
                              if (i == 7)
                                throw ConfigError("boom");
                            }),
               ConfigError);
}

TEST(Sweep, SinglePointGridGivesOneRowPerKind) {
  synth::EnsembleConfig ec;
  ec.users = 5;
  ec.visit_count = 1000;
  const auto users = synth_user_events(synth::make_ensemble(ec));
  RunConfig cfg;
  cfg.delta_t_grid = {120};
  const auto table = run_sweep(users, cfg, SweepDimension::Temporal);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0].grid_value, "120");
  EXPECT_EQ(table[0].n_users, 5u);
  EXPECT_TRUE(table[0].summary.pi_max);
  cfg.delta_t_grid.clear();
  EXPECT_THROW(run_sweep(users, cfg, SweepDimension::Temporal), ConfigError);
}

TEST(Sweep, SpatialGridLabelsAndCoarsening) {
  synth::EnsembleConfig ec;
  ec.users = 8;
  ec.visit_count = 800;
  const auto users = synth_user_events(synth::make_ensemble(ec));
  RunConfig cfg;
  cfg.kinds = {TrajectoryKind::Stat};
  const auto table = run_sweep(users, cfg, SweepDimension::Spatial);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0].grid_value, "url");
  EXPECT_EQ(table[2].grid_value, "category");
  EXPECT_LT(table[0].summary.pi_max->mean, table[1].summary.pi_max->mean);
  EXPECT_LE(table[1].summary.s_rand->mean, table[0].summary.s_rand->mean);
  EXPECT_LE(table[2].summary.s_rand->mean, table[1].summary.s_rand->mean);
}

TEST(Converge, ConstantUsersChooseTheFirstGridPoint) {
  UserEvents users;
  for (int u = 0; u < 3; ++u) {
    auto &ev = users["c" + std::to_string(u)];
    for (int i = 0; i < 20; ++i)
      ev.push_back({"c" + std::to_string(u), 60 * i, 60, "x/p", "x", "k"});
  }
  RunConfig cfg;
  cfg.convergence_kind = TrajectoryKind::Stat;
  cfg.horizon = 10;
  const auto rep = run_convergence(users, cfg);
  EXPECT_EQ(rep.min_length, 2u);
  EXPECT_EQ(rep.users_used.size(), 3u);
  for (const auto &r : rep.rows)
    EXPECT_EQ(r.mean_delta, 0.0);
}

TEST(Converge, ShortUsersAreExcludedAndThresholdZeroIsUnreachable) {
  synth::EnsembleConfig ec;
  ec.users = 6;
  ec.visit_count = 1500;
  auto users = synth_user_events(synth::make_ensemble(ec));
  users["tiny"] = {{"tiny", 0, 10, "x/p", "x", "k"}};
  RunConfig cfg;
  cfg.threshold = 0.0;
  const auto rep = run_convergence(users, cfg);
  ASSERT_EQ(rep.exclusions.size(), 1u);
  EXPECT_EQ(rep.exclusions[0].user_id, "tiny");
  EXPECT_EQ(rep.users_used.size(), 6u);
  EXPECT_FALSE(rep.min_length);
  EXPECT_EQ(rep.rows.size(), cfg.horizon - 1);
  for (const auto &r : rep.rows) {
    EXPECT_LE(r.q05, r.mean_delta + 1e-15);
    EXPECT_LE(r.mean_delta, r.q95 + 1e-15);
  }
}

TEST(Converge, EnsembleDeltasDecayInMovingAverage) {
  synth::EnsembleConfig ec;
  ec.visit_count = 1500;
  const auto users = synth_user_events(synth::make_ensemble(ec));
  RunConfig cfg;
  const auto rep = run_convergence(users, cfg);
  ASSERT_EQ(rep.users_used.size(), 100u);
  std::vector<double> ma;
  for (std::size_t k = 0; k + 10 <= rep.rows.size(); k += 10) {
    double s = 0;
    for (std::size_t j = k; j < k + 10; ++j)
      s += rep.rows[j].mean_delta;
    ma.push_back(s / 10);
  }
  for (std::size_t k = 1; k < ma.size(); ++k)
    EXPECT_LE(ma[k], ma[k - 1]) << "window " << k;
}

TEST(Compare, IdenticalGroupsAreNotSignificant) {
  const auto m = high_entropy_chain();
  auto specs = markov_group("a", m, 8, 100);
  const auto b = markov_group("b", m, 8, 100);
  specs.insert(specs.end(), b.begin(), b.end());
  const auto users = synth_user_events(specs);
  std::map<std::string, std::string> groups;
  for (int i = 0; i < 8; ++i) {
    groups["a" + std::to_string(i)] = "A";
    groups["b" + std::to_string(i)] = "B";
  }
  RunConfig cfg;
  cfg.min_length = 20;
  cfg.compare_kind = TrajectoryKind::SeqNonStat;
  const auto rep = run_compare(users, cfg, groups);
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_EQ(rep.comparisons[0].ks_statistic, 0.0);
  EXPECT_FALSE(rep.comparisons[0].significant);
}

TEST(Compare, LowAndHighEntropySourcesSeparate) {
  EXPECT_NEAR(synth::markov_entropy_rate(low_entropy_chain()), 0.3, 0.01);
  EXPECT_NEAR(synth::markov_entropy_rate(high_entropy_chain()), 1.5, 1e-12);
  auto specs = markov_group("lo", low_entropy_chain(), 12, 1);
  const auto hi = markov_group("hi", high_entropy_chain(), 12, 1000);
  specs.insert(specs.end(), hi.begin(), hi.end());
  const auto users = synth_user_events(specs);
  std::map<std::string, std::string> groups;
  for (int i = 0; i < 12; ++i) {
    groups["lo" + std::to_string(i)] = "low";
    groups["hi" + std::to_string(i)] = "high";
  }
  RunConfig cfg;
  cfg.min_length = 20;
  cfg.compare_kind = TrajectoryKind::SeqNonStat;
  const auto rep = run_compare(users, cfg, groups);
  ASSERT_EQ(rep.comparisons.size(), 1u);
  const auto &g = rep.comparisons[0];
  EXPECT_EQ(g.group_a, "high");
  EXPECT_TRUE(g.significant);
  EXPECT_GT(std::abs(g.cliffs_delta), 0.5);
  EXPECT_DOUBLE_EQ(g.alpha_adjusted, 0.05);
}

TEST(Compare, SixGroupsGiveFifteenPairs) {
  std::vector<synth::SyntheticUserSpec> specs;
  std::map<std::string, std::string> groups;
  for (int g = 0; g < 6; ++g) {
    const auto part = markov_group("g" + std::to_string(g) + "_",
                                   high_entropy_chain(), 3, 50 * g);
    for (const auto &s : part) {
      groups[s.user_id] = "G" + std::to_string(g);
      specs.push_back(s);
    }
  }
  groups["ghost"] = "G0";
  RunConfig cfg;
  cfg.min_length = 20;
  const auto rep = run_compare(synth_user_events(specs), cfg, groups);
  EXPECT_EQ(rep.comparisons.size(), 15u);
  EXPECT_DOUBLE_EQ(rep.comparisons[0].alpha_adjusted, 0.05 / 15);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("ghost"), std::string::npos);
}

TEST(Compare, UndersizedGroupIsAnError) {
  const auto specs = markov_group("u", high_entropy_chain(), 3, 7);
  const auto users = synth_user_events(specs);
  std::map<std::string, std::string> groups{{"u0", "A"}, {"u1", "A"}, {"u2", "B"}};
  RunConfig cfg;
  cfg.min_length = 20;
  EXPECT_THROW(run_compare(users, cfg, groups), InputError);
  groups = {{"u0", "A"}, {"u1", "A"}};
  EXPECT_THROW(run_compare(users, cfg, groups), InputError);
}

TEST(Compare, GroupingFileParsing) {
  std::istringstream ok("group,user_id\nA,u1\nB,u2\n\n");
  const auto g = parse_groups(ok);
  EXPECT_EQ(g.at("u1"), "A");
  EXPECT_EQ(g.at("u2"), "B");
  std::istringstream dup("user_id,group\nu1,A\nu1,B\n");
  EXPECT_THROW(parse_groups(dup), InputError);
  std::istringstream nohdr("user,grp\nu1,A\n");
  EXPECT_THROW(parse_groups(nohdr), InputError);
}

TEST(SynthSpec, UsersAndEnsemble) {
  const auto doc = nlohmann::json::parse(R"({
    "users": [
      {"user_id": "m", "transition": [[0.9, 0.1], [0.1, 0.9]], "visit_count": 20, "seed": 3},
      {"user_id": "z", "states": 5, "zipf_exponent": 1.2, "visit_count": 10}
    ],
    "ensemble": {"users": 3, "visit_count": 15, "user_prefix": "e"}
  })");
  const auto specs = parse_synth_spec(doc);
  ASSERT_EQ(specs.size(), 5u);
  const auto users = synth_user_events(specs);
  EXPECT_EQ(users.at("m").size(), 20u);
  EXPECT_EQ(users.at("z").size(), 10u);
  EXPECT_EQ(users.at("e0").size(), 15u);

  std::ostringstream csv;
  write_events_csv(csv, users);
  EXPECT_EQ(parse_events(std::string_view(csv.str())), users);

  EXPECT_THROW(parse_synth_spec(nlohmann::json::parse("{}")), ConfigError);
  EXPECT_THROW(parse_synth_spec(nlohmann::json::parse(
                   R"({"users": [{"transition": [[0.5, 0.6], [1, 0]]}]})")),
               ConfigError);
  EXPECT_THROW(parse_synth_spec(nlohmann::json::parse(
                   R"({"users": [{"states": "many"}]})")),
               ConfigError);
}

TEST(Writers, CsvQuotingAndConfigEcho) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
  const auto j = config_json(RunConfig{});
  EXPECT_EQ(j.at("min_length"), 100);
  EXPECT_EQ(j.at("delta_t_grid").size(), 18u);
  EXPECT_EQ(j.at("resolution"), "domain");
}
