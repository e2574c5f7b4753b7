#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swarmsim/cli.hpp"
#include "swarmsim/core.hpp"

using namespace swarmsim;
using namespace swarmsim::cli;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = SWARMSIM_SCENARIO_DIR;

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "swarmsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "swarmsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) : path_(fs::temp_directory_path() / ("swarmsim_cli_" + tag)) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const { return (sub.empty() ? path_ : path_ / sub).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(ParseNValues, RangesAndLists) {
  EXPECT_EQ(parse_n_values("3..6"), (std::vector<std::size_t>{3, 4, 5, 6}));
  EXPECT_EQ(parse_n_values("3,5,9"), (std::vector<std::size_t>{3, 5, 9}));
  EXPECT_EQ(parse_n_values("3..4,9"), (std::vector<std::size_t>{3, 4, 9}));
  EXPECT_EQ(parse_n_values("7"), (std::vector<std::size_t>{7}));
  for (const char* bad : {"", "a", "3..", "5..3", "3,,4", "3.5", "-2"}) {
    EXPECT_THROW(parse_n_values(bad), InvalidArgument) << bad;
  }
}

TEST(ParseArgs, Navigate) {
  const auto cfg = parse({"navigate", "--scenario", kScenarios + "/navigate_los.json", "--trials", "7", "--jobs", "3",
                          "--seed", "11", "--out", "x", "--set", "noise.model_aware=true", "--set",
                          "motion.max_slots=5"});
  EXPECT_EQ(cfg.command, Command::Navigate);
  EXPECT_EQ(cfg.trials, 7u);
  EXPECT_EQ(cfg.jobs, 3u);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_EQ(cfg.output_dir, fs::path("x"));
  EXPECT_EQ(cfg.overrides.size(), 2u);
}

TEST(ParseArgs, SweepAndAudit) {
  const auto sw = parse({"sweep", "--scenario", kScenarios + "/circle9_localize.json", "--n", "3..5", "--radius", "30"});
  EXPECT_EQ(sw.command, Command::Sweep);
  EXPECT_EQ(sw.n_values, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_DOUBLE_EQ(sw.radius, 30.0);
  const auto au = parse({"audit", "--scenario", kScenarios + "/navigate_los.json", "--trace", kScenarios + "/navigate_los.json"});
  EXPECT_EQ(au.command, Command::Audit);
  EXPECT_EQ(au.trace_path, fs::path(kScenarios + "/navigate_los.json"));
}

TEST(ParseArgs, UsageErrors) {
  const std::string sc = kScenarios + "/navigate_los.json";
  EXPECT_THROW(parse({}), UsageError);
  EXPECT_THROW(parse({"fly", "--scenario", sc}), UsageError);
  EXPECT_THROW(parse({"navigate"}), UsageError);
  EXPECT_THROW(parse({"navigate", "--scenario", sc, "--bogus"}), UsageError);
  EXPECT_THROW(parse({"navigate", "--scenario", sc, "--trials", "many"}), UsageError);
  EXPECT_THROW(parse({"navigate", "--scenario", "/nonexistent/file.json"}), UsageError);
  EXPECT_THROW(parse({"sweep", "--scenario", sc}), UsageError);
  EXPECT_THROW(parse({"sweep", "--scenario", sc, "--n", "9..3"}), UsageError);
  EXPECT_THROW(parse({"audit", "--scenario", sc}), UsageError);
  std::string err;
  EXPECT_EQ(run_cli({"navigate", "--scenario", sc, "--bogus"}, nullptr, &err), 64);
  EXPECT_NE(err.find("--trials"), std::string::npos);
}

TEST(ParseArgs, HelpListsEveryFlag) {
  const auto cfg = parse({"--help"});
  ASSERT_TRUE(cfg.show_help);
  for (const char* flag : {"localize", "navigate", "sweep", "audit", "--scenario", "--seed", "--out", "--set",
                           "--trials", "--jobs", "--traces", "--n", "--radius", "--trace", "--ellipse-sqrt"}) {
    EXPECT_NE(cfg.help_text.find(flag), std::string::npos) << flag;
  }
  std::string out;
  EXPECT_EQ(run_cli({"--help"}, &out), 0);
  EXPECT_EQ(out, cfg.help_text);
}

TEST(ParseArgs, SeedFallsBackToEnvironment) {
  const std::string sc = kScenarios + "/navigate_los.json";
  ::unsetenv("SWARMSIM_SEED");
  EXPECT_EQ(parse({"navigate", "--scenario", sc}).seed, 1u);
  ::setenv("SWARMSIM_SEED", "977", 1);
  EXPECT_EQ(parse({"navigate", "--scenario", sc}).seed, 977u);
  EXPECT_EQ(parse({"navigate", "--scenario", sc, "--seed", "5"}).seed, 5u);
  ::setenv("SWARMSIM_SEED", "junk", 1);
  EXPECT_THROW(parse({"navigate", "--scenario", sc}), UsageError);
  ::unsetenv("SWARMSIM_SEED");
}

TEST(Execute, LocalizeWritesEllipses) {
  TempDir dir("localize");
  std::string out;
  ASSERT_EQ(run_cli({"localize", "--scenario", kScenarios + "/circle9_localize.json", "--out", dir.str()}, &out), 0);
  const auto csv = slurp(dir.path() / "ellipses.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);  // header + 8 unknown UAVs
  const auto doc = nlohmann::json::parse(slurp(dir.path() / "localization.json"));
  EXPECT_GT(doc.at("network_rmse_m").get<double>(), 0.0);
}

TEST(Execute, NavigateWritesSeriesTracesAndSummary) {
  TempDir dir("navigate");
  ASSERT_EQ(run_cli({"navigate", "--scenario", kScenarios + "/navigate_nlos.json", "--trials", "3", "--traces", "2",
                     "--set", "motion.max_slots=60", "--out", dir.str()}),
            0);
  for (const char* f : {"rmse_series.csv", "trace_0.csv", "trace_1.csv", "summary.json", "audit.json"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir.path() / "trace_2.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir.path() / "summary.json"));
  EXPECT_EQ(summary.at("trials").get<int>(), 3);
  const auto& t = summary.at("terminations");
  EXPECT_EQ(t.at("converged").get<int>() + t.at("max_slots").get<int>() + t.at("singular_fim").get<int>(), 3);
  const auto series = slurp(dir.path() / "rmse_series.csv");
  EXPECT_EQ(std::count(series.begin(), series.end(), '\n'), 62);  // header + slots 0..60

  TempDir audit_dir("audit");
  std::string out;
  ASSERT_EQ(run_cli({"audit", "--scenario", kScenarios + "/navigate_nlos.json", "--trace", dir.str("trace_0.csv"),
                     "--out", audit_dir.str()},
                    &out),
            0);
  const auto audit = nlohmann::json::parse(slurp(audit_dir.path() / "audit.json"));
  EXPECT_EQ(audit.at("segment_intersections").get<int>(), 0);
}

TEST(Execute, SweepWritesRows) {
  TempDir dir("sweep");
  ASSERT_EQ(run_cli({"sweep", "--scenario", kScenarios + "/circle9_localize.json", "--n", "3..5", "--out", dir.str()}),
            0);
  const auto csv = slurp(dir.path() / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 3);
}

TEST(Execute, ValidationFailureExitsTwo) {
  TempDir dir("invalid");
  std::string err;
  EXPECT_EQ(run_cli({"navigate", "--scenario", kScenarios + "/navigate_los.json", "--set", "motion.speed=-1", "--out",
                     dir.str()},
                    nullptr, &err),
            2);
  EXPECT_FALSE(err.empty());
  EXPECT_EQ(run_cli({"navigate", "--scenario", kScenarios + "/navigate_los.json", "--set", "nope", "--out", dir.str()}),
            1);
}

TEST(Execute, UnwritableOutputFails) {
  EXPECT_NE(run_cli({"localize", "--scenario", kScenarios + "/circle9_localize.json", "--out",
                     kScenarios + "/circle9_localize.json/sub"}),
            0);
}

TEST(Determinism, RepeatedRunsAndJobCountsAreByteIdentical) {
  const std::vector<std::string> base{"navigate", "--scenario",   kScenarios + "/navigate_nlos.json", "--trials", "4",
                                      "--seed",   "21",           "--traces", "2",
                                      "--set",    "motion.max_slots=120"};
  TempDir a("det_a"), b("det_b"), c("det_c");
  auto with = [&](const TempDir& d, const std::string& jobs) {
    auto args = base;
    args.insert(args.end(), {"--jobs", jobs, "--out", d.str()});
    return run_cli(args);
  };
  ASSERT_EQ(with(a, "1"), 0);
  ASSERT_EQ(with(b, "1"), 0);
  ASSERT_EQ(with(c, "3"), 0);
  for (const char* f : {"rmse_series.csv", "trace_0.csv", "trace_1.csv"}) {
    const auto ref = slurp(a.path() / f);
    ASSERT_FALSE(ref.empty());
    EXPECT_EQ(ref, slurp(b.path() / f)) << f;
    EXPECT_EQ(ref, slurp(c.path() / f)) << f;
  }
}
