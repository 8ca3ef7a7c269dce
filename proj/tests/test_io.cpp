#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "recal/cli.hpp"
#include "recal/io/config.hpp"
#include "recal/io/csv.hpp"

using namespace recal;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run run_cli(const std::string& args) {
  Run r;
  const std::string cmd = std::string(RECAL_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("recal_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

std::string sample(const std::string& f) { return std::string(RECAL_SAMPLES_DIR) + "/" + f; }

io::AnalysisConfig parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_analysis_config(in, "cfg.yaml");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Csv, RoundTripIsBitExact) {
  Frame f;
  f.add("x", {0.1, -1e-300, 1.0 / 3.0, 12345678.9, 5e-324});
  f.add("v", {0, 1, 0, 1, 1});
  std::stringstream s;
  io::write_csv(f, s);
  auto g = io::read_csv(s);
  ASSERT_EQ(g.names(), f.names());
  for (const auto& n : f.names()) {
    auto a = f.col(n), b = g.col(n);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Csv, MissingValueNamesRow) {
  std::istringstream in("z,y\n1,2\n3,\n");
  const auto msg = error_of([&] { io::read_csv(in, "main.csv"); });
  EXPECT_NE(msg.find("main.csv: row 3, column 'y'"), std::string::npos) << msg;
  std::istringstream na("z,y\n1,NA\n");
  EXPECT_NE(error_of([&] { io::read_csv(na); }).find("row 2"), std::string::npos);
}

TEST(Csv, MalformedInputs) {
  std::istringstream bad("z,y\n1,abc\n");
  EXPECT_NE(error_of([&] { io::read_csv(bad); }).find("cannot parse 'abc'"), std::string::npos);
  std::istringstream ragged("z,y\n1,2,3\n");
  EXPECT_NE(error_of([&] { io::read_csv(ragged); }).find("3 fields"), std::string::npos);
  std::istringstream empty("");
  EXPECT_THROW(io::read_csv(empty), Error);
  std::istringstream bom("\xEF\xBB\xBFz, y \n1, 2\n");
  auto f = io::read_csv(bom);
  EXPECT_TRUE(f.has("z"));
  EXPECT_EQ(f.col("y")[0], 2.0);
}

TEST(Config, ParsesRolesAndArrows) {
  auto c = parse(
      "outcome: binary\n"
      "exposure_unit: 10\n"
      "columns: {exposure: fiber, surrogate: ffq, outcome: case}\n"
      "covariates:\n"
      "  - {name: age, role: V4}\n"
      "  - {name: sun, affects: [x], available_in_validation: false}\n"
      "strategies: [NoneM, \"O-\"]\n");
  EXPECT_EQ(c.outcome, OutcomeFamily::Binary);
  EXPECT_EQ(c.exposure_unit, 10.0);
  EXPECT_EQ(c.exposure_column, "fiber");
  ASSERT_EQ(c.covariates.size(), 2u);
  EXPECT_EQ(classify(c.covariates[0]), Role::V4);
  EXPECT_EQ(classify(c.covariates[1]), Role::V7);
  EXPECT_FALSE(c.covariates[1].available_in_validation);
  EXPECT_EQ(c.strategies, (std::vector<AdjustmentStrategy>{AdjustmentStrategy::NoneM, AdjustmentStrategy::ONone}));
}

TEST(Config, ErrorsNameTheLine) {
  const auto unknown = error_of([] { parse("outcome: continuous\ncovariates:\n  - name: a\n    role: V9\n"); });
  EXPECT_NE(unknown.find("cfg.yaml:4"), std::string::npos) << unknown;
  const auto key = error_of([] { parse("outcome: continuous\nfoo: 1\n"); });
  EXPECT_NE(key.find("cfg.yaml:2"), std::string::npos) << key;
  EXPECT_NE(key.find("unknown key 'foo'"), std::string::npos);
  const auto both = error_of([] { parse("covariates:\n  - {name: a, role: V1, affects: [y]}\n"); });
  EXPECT_NE(both.find("exactly one"), std::string::npos);
  const auto arrow = error_of([] { parse("covariates:\n  - {name: a, affects: [w]}\n"); });
  EXPECT_NE(arrow.find("unknown arrow target 'w'"), std::string::npos);
  EXPECT_TRUE(parse("").covariates.empty());
}

TEST(Config, ScenarioYamlRoundTrip) {
  auto c = find_scenario("dag4.large_me.binary");
  c.beta_xv = 0.125;
  c.seed = 99;
  std::istringstream in(io::to_yaml(c));
  auto d = io::parse_scenario(in);
  EXPECT_EQ(d.name, c.name);
  EXPECT_EQ(d.dag, c.dag);
  EXPECT_EQ(d.theta_v, c.theta_v);
  EXPECT_EQ(d.beta_xv, c.beta_xv);
  EXPECT_EQ(d.outcome, c.outcome);
  EXPECT_EQ(d.n_ms, c.n_ms);
  EXPECT_EQ(d.seed, c.seed);
  std::istringstream bad("scenario: {dag: 1, eta_v: 0.3}\n");
  EXPECT_THROW(io::parse_scenario(bad), Error);
}

TEST(Estimate, RecoversTruthAndAttenuatesNaive) {
  auto cfg = find_scenario("dag4.base.continuous");
  cfg.n_ms = 20000;
  cfg.n_vs = 2000;
  auto s = generate(cfg, 0);
  io::AnalysisConfig ac;
  ac.covariates = {CovariateRole::of("v", Role::V4)};
  auto rep = cli::run_estimate(s.main, s.validation, ac);
  ASSERT_TRUE(rep.recommended.estimate.has_value());
  const auto& e = *rep.recommended.estimate;
  EXPECT_EQ(e.strategy, AdjustmentStrategy::OM);
  EXPECT_LT(std::abs(e.beta_hat - 0.5), 3 * e.se);
  EXPECT_DOUBLE_EQ(rep.naive.beta_hat, e.gamma_hat);
  EXPECT_NE(rep.naive.beta_hat, e.beta_hat);
  EXPECT_EQ(rep.n_main, 20000u);
}

TEST(Estimate, PerfectSurrogateLeavesNaiveUnchanged) {
  Stream rng(3, 0, 0);
  Frame main, valid;
  std::vector<double> z, y, x;
  for (int i = 0; i < 300; ++i) {
    const double a = rng.normal();
    z.push_back(a);
    y.push_back(0.5 * a + rng.normal());
  }
  for (int i = 0; i < 100; ++i) x.push_back(rng.normal());
  main.add("z", z);
  main.add("y", y);
  valid.add("x", x);
  valid.add("z", x);
  auto rep = cli::run_estimate(main, valid, {});
  EXPECT_NEAR(rep.recommended.estimate->beta_hat, rep.naive.beta_hat, 1e-10);
}

TEST(Estimate, ForcedBiasedStrategyWarns) {
  auto s = generate(base_case(4), 0);
  io::AnalysisConfig ac;
  ac.covariates = {CovariateRole::of("v", Role::V4)};
  ac.strategies = {AdjustmentStrategy::NoneM};
  auto rep = cli::run_estimate(s.main, s.validation, ac);
  ASSERT_EQ(rep.forced.size(), 1u);
  ASSERT_FALSE(rep.forced[0].warnings.empty());
  const auto& w = rep.forced[0].warnings;
  EXPECT_TRUE(std::any_of(w.begin(), w.end(), [](const std::string& x) { return x.find("per the validity table") != std::string::npos; }));
  EXPECT_TRUE(rep.forced[0].estimate.has_value());
}

TEST(Estimate, MissingColumnIsSchemaError) {
  auto s = generate(base_case(4), 0);
  io::AnalysisConfig ac;
  ac.covariates = {CovariateRole::of("age", Role::V4)};
  EXPECT_NE(error_of([&] { cli::run_estimate(s.main, s.validation, ac); }).find("'age'"), std::string::npos);
}

TEST(Estimate, BinaryReportsOddsRatio) {
  auto s = generate(base_case(1, OutcomeFamily::Binary), 0);
  io::AnalysisConfig ac;
  ac.outcome = OutcomeFamily::Binary;
  ac.exposure_unit = 2.0;
  ac.covariates = {CovariateRole::of("v", Role::V1)};
  auto rep = cli::run_estimate(s.main, s.validation, ac);
  ASSERT_TRUE(rep.recommended.odds_ratio.has_value());
  EXPECT_NEAR(rep.recommended.odds_ratio->estimate, std::exp(2.0 * rep.recommended.estimate->beta_hat), 1e-12);
  EXPECT_TRUE(cli::to_json(rep).contains("recommended"));
}

TEST(Cli, AdviseFiberRoles) {
  auto r = run_cli("advise --roles " + sample("fiber_roles.yaml") + " --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["minimal_set"], nlohmann::json::array({"age", "sleep", "smoking"}));
}

TEST(Cli, ErrorsExitNonzero) {
  auto r = run_cli("simulate --scenario dag9.base.continuous");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("unknown scenario 'dag9.base.continuous'"), std::string::npos);
  EXPECT_NE(r.out.find("dag4.base.continuous"), std::string::npos);
  EXPECT_NE(run_cli("advise --roles /nonexistent.yaml").status, 0);
  EXPECT_NE(run_cli("frobnicate").status, 0);
}

TEST(Cli, GenerateThenEstimate) {
  const auto m = scratch("main.csv"), v = scratch("valid.csv");
  auto g = run_cli("generate --scenario dag4.base.continuous --seed 11 --main " + m.string() + " --validation " + v.string());
  ASSERT_EQ(g.status, 0) << g.out;
  auto e = run_cli("estimate --main " + m.string() + " --validation " + v.string() + " --config " +
               sample("analysis.yaml") + " --format json");
  ASSERT_EQ(e.status, 0) << e.out;
  auto j = nlohmann::json::parse(e.out);
  EXPECT_EQ(j["recommended"]["strategy"], "OM");
  EXPECT_NEAR(j["recommended"]["beta_hat"].get<double>(), 0.5, 0.15);
  EXPECT_EQ(j["forced"].size(), 2u);

  // Same seed, same files.
  const auto m2 = scratch("main2.csv");
  run_cli("generate --scenario dag4.base.continuous --seed 11 --main " + m2.string() + " --validation " + v.string());
  std::ifstream a(m), b(m2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Cli, SimulateSmoke) {
  auto r = run_cli("simulate --catalog dag1.base.continuous --replicates 50 --format csv --jobs 1");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("dag1.base.continuous,OM,"), std::string::npos);
  auto y = run_cli("simulate --config " + sample("scenario.yaml") + " --replicates 20 --compare");
  ASSERT_EQ(y.status, 0) << y.out;
  EXPECT_NE(y.out.find("dag8.custom"), std::string::npos);
  EXPECT_NE(run_cli("simulate --scenario dag1.base.continuous --catalog dag1").status, 0);
}

TEST(Cli, AreGridMarksInfeasibleCells) {
  auto r = run_cli("are-grid --dag 4 --sweep1 rho_vx=0.4,1.2 --sweep2 rho_vz_x=0.2");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("NA,NA"), std::string::npos);
  auto d = run_cli("are-grid --dag 8");
  ASSERT_EQ(d.status, 0) << d.out;
  EXPECT_EQ(d.out.substr(0, d.out.find('\n')), "dag,rho_vx,rho_vz_x,strategy,variance,are");
}
