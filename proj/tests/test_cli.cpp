// Runs the built executable end to end and checks outputs and exit codes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = WEBPRED_CLI;
const std::string kToy = std::string(WEBPRED_DATA_DIR) + "/toy_visits.csv";

fs::path scratch_dir(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "webpred_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string &args) {
  const std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST(Cli, AnalyzeToyMatchesGolden) {
  const auto out = scratch_dir("analyze");
  ASSERT_EQ(run("analyze --input " + kToy + " --out " + out.string() +
                " --min-length 2"),
            0);
  EXPECT_EQ(slurp(out / "report.csv"),
            slurp(std::string(WEBPRED_TEST_DIR) + "/golden/toy_report.csv"));
  EXPECT_EQ(slurp(out / "excluded.csv"), "user_id,reason\n");
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary.at("counts").at("users"), 1);
  EXPECT_EQ(summary.at("counts").at("rows"), 3);
  EXPECT_EQ(summary.at("config").at("min_length"), 2);
}

TEST(Cli, AnalyzeEmptyInputGivesZeroUserSummary) {
  const auto out = scratch_dir("empty");
  std::ofstream(out / "in.csv")
      << "user_id,timestamp,url,domain,category,active_seconds\n";
  ASSERT_EQ(run("analyze --input " + (out / "in.csv").string() + " --out " +
                (out / "res").string()),
            0);
  const auto summary = nlohmann::json::parse(slurp(out / "res" / "summary.json"));
  EXPECT_EQ(summary.at("counts").at("users"), 0);
  const auto report = slurp(out / "res" / "report.csv");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 1);
}

TEST(Cli, DumpTrajectories) {
  const auto out = scratch_dir("dump");
  ASSERT_EQ(run("dump-trajectories --input " + kToy + " --out " + out.string()),
            0);
  EXPECT_EQ(slurp(out / "trajectories.tsv"),
            "toy\tstat\t3\t0 0 0 0 0 0 0 1 1 1 1 1 1 1 1 0 2\n"
            "toy\tbin-nonstat\t3\t0 1 0 2\n"
            "toy\tseq-nonstat\t3\t0 1 0 2 0\n");
}

TEST(Cli, SynthThenAnalyzeWithKinds) {
  const auto out = scratch_dir("synth");
  std::ofstream(out / "spec.json")
      << R"({"ensemble": {"users": 4, "visit_count": 600}})";
  ASSERT_EQ(run("synth --spec " + (out / "spec.json").string() + " --out " +
                (out / "events.csv").string()),
            0);
  ASSERT_EQ(run("analyze --input " + (out / "events.csv").string() + " --out " +
                (out / "res").string() + " --kinds stat --resolution url"),
            0);
  const auto report = slurp(out / "res" / "report.csv");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 5);
  EXPECT_NE(report.find("u0,stat,url,60,"), std::string::npos);
}

TEST(Cli, SweepConvergeCompareWriteTheirTables) {
  const auto out = scratch_dir("suite");
  std::ofstream(out / "spec.json")
      << R"({"ensemble": {"users": 6, "visit_count": 1500}})";
  ASSERT_EQ(run("synth --spec " + (out / "spec.json").string() + " --out " +
                (out / "events.csv").string()),
            0);
  const auto in = " --input " + (out / "events.csv").string();
  ASSERT_EQ(run("sweep --dimension temporal --delta-t-grid 60,120" + in +
                " --out " + out.string()),
            0);
  const auto sweep = slurp(out / "sweep_temporal.csv");
  EXPECT_EQ(sweep.rfind("delta_t_seconds,kind,n_users,s_rand_mean,", 0), 0u);
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 7);

  ASSERT_EQ(run("sweep --dimension spatial" + in + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "sweep_spatial.csv"));

  ASSERT_EQ(run("converge" + in + " --out " + out.string()), 0);
  const auto conv = slurp(out / "convergence.csv");
  EXPECT_EQ(conv.rfind("length,mean_delta,q05_delta,q95_delta\n2,", 0), 0u);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_TRUE(summary.at("counts").at("min_sufficient_length").is_number());

  std::ofstream(out / "groups.csv")
      << "user_id,group\nu0,a\nu1,a\nu2,a\nu3,b\nu4,b\nu5,b\nnobody,b\n";
  ASSERT_EQ(run("compare --groups " + (out / "groups.csv").string() + in +
                " --out " + out.string()),
            0);
  const auto cmp = slurp(out / "compare.csv");
  EXPECT_EQ(cmp.rfind("group_a,group_b,n_a,n_b,", 0), 0u);
  EXPECT_NE(slurp(out / "warnings.txt").find("nobody"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch_dir("codes");
  std::ofstream(out / "bad.csv")
      << "user_id,timestamp,url,domain,category,active_seconds\nu,1,a,a,a,-3\n";
  EXPECT_EQ(run("analyze --input " + (out / "bad.csv").string() + " --out " +
                out.string()),
            1);
  EXPECT_EQ(run("analyze --input " + (out / "missing.csv").string() +
                " --out " + out.string()),
            1);
  EXPECT_EQ(run("analyze --input " + kToy + " --out " + out.string() +
                " --kinds stat,fast"),
            2);
  EXPECT_EQ(run("analyze --input " + kToy + " --out " + out.string() +
                " --min-length 1"),
            2);
  EXPECT_EQ(run("analyze --input " + kToy + " --out " + out.string() +
                " --resolution city"),
            2);
  EXPECT_EQ(run("analyze --input " + kToy + " --delta-t 0 --out " +
                out.string()),
            2);
  EXPECT_EQ(run("analyze --input " + kToy), 2);
  EXPECT_EQ(run("analyze --bogus"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("sweep --dimension diagonal --input " + kToy), 2);
  EXPECT_EQ(run("--help"), 0);
  std::ofstream(out / "spec.json") << "{not json";
  EXPECT_EQ(run("synth --spec " + (out / "spec.json").string()), 2);
  std::ofstream(out / "groups.csv") << "user_id,group\ntoy,a\n";
  EXPECT_EQ(run("compare --min-length 2 --groups " +
                (out / "groups.csv").string() + " --input " + kToy +
                " --out " + out.string()),
            1);
}
