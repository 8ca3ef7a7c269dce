#include <gtest/gtest.h>

#include <cmath>

#include "recal/harness.hpp"

using namespace recal;

namespace {

ScenarioConfig small(std::string_view name, std::size_t reps) {
  auto c = find_scenario(name);
  c.replicates = reps;
  return c;
}

}  // namespace

TEST(Harness, DeterministicAcrossThreadCounts) {
  auto c = small("dag4.base.continuous", 40);
  RunOptions one, three;
  one.jobs = 1;
  three.jobs = 3;
  auto a = run_scenario(c, {kAllStrategies.begin(), kAllStrategies.end()}, one);
  auto b = run_scenario(c, {kAllStrategies.begin(), kAllStrategies.end()}, three);
  for (auto s : kAllStrategies) {
    EXPECT_EQ(a.at(s).mean, b.at(s).mean);
    EXPECT_EQ(a.at(s).empirical_variance, b.at(s).empirical_variance);
  }
}

TEST(Harness, SeedAndReplicateOverrides) {
  auto c = small("dag1.base.continuous", 20);
  RunOptions o;
  o.jobs = 1;
  auto a = run_scenario(c, {AdjustmentStrategy::OM}, o);
  o.seed = 7;
  o.replicates = 10;
  auto b = run_scenario(c, {AdjustmentStrategy::OM}, o);
  EXPECT_NE(a.at(AdjustmentStrategy::OM).mean, b.at(AdjustmentStrategy::OM).mean);
  EXPECT_EQ(b.at(AdjustmentStrategy::OM).replicates, 10u);
  EXPECT_EQ(b.config.seed, 7u);
}

TEST(Harness, ValidAndBiasedStrategiesSeparateInDag4) {
  auto r = run_scenario(small("dag4.base.continuous", 200));
  const auto& om = r.at(AdjustmentStrategy::OM);
  EXPECT_LT(std::abs(om.percent_bias), 3 * om.percent_bias_se + 1e-9);
  for (auto s : {AdjustmentStrategy::NoneNone, AdjustmentStrategy::NoneM, AdjustmentStrategy::ONone}) {
    const auto& x = r.at(s);
    EXPECT_GT(std::abs(x.percent_bias), 3 * x.percent_bias_se) << to_string(s);
    ASSERT_TRUE(x.limit.has_value());
    // The Monte Carlo mean tracks the analytic probability limit.
    EXPECT_LT(std::abs(x.mean - *x.limit), 4 * x.mean_se + 0.01 * std::abs(*x.limit)) << to_string(s);
  }
  ASSERT_TRUE(om.ere.has_value());
  EXPECT_EQ(*om.ere, 1.0);
  EXPECT_EQ(*om.are, 1.0);
  EXPECT_EQ(om.failures, 0u);
}

TEST(Harness, ModelSeMatchesEmpiricalSpread) {
  auto r = run_scenario(small("dag1.base.continuous", 300), {AdjustmentStrategy::OM});
  const auto& om = r.at(AdjustmentStrategy::OM);
  EXPECT_NEAR(om.mean_model_se * om.mean_model_se, om.empirical_variance, 0.2 * om.empirical_variance);
  ASSERT_TRUE(om.analytic_variance.has_value());
  EXPECT_NEAR(om.empirical_variance, *om.analytic_variance, 0.2 * *om.analytic_variance);
}

TEST(Harness, BinaryHasNoAnalyticColumns) {
  auto r = run_scenario(small("dag1.base.binary", 5), {AdjustmentStrategy::OM});
  EXPECT_FALSE(r.at(AdjustmentStrategy::OM).are.has_value());
  EXPECT_FALSE(r.at(AdjustmentStrategy::OM).limit.has_value());
}

TEST(Harness, TooManyFailuresIsAnError) {
  auto c = small("dag1.base.continuous", 20);
  c.theta_x = 1e-4;  // calibration slope indistinguishable from zero
  c.n_vs = 50;
  try {
    run_scenario(c, {AdjustmentStrategy::OM});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooManyFailures);
  }
}

TEST(Harness, CatalogFilter) {
  RunOptions o;
  o.replicates = 3;
  auto rs = run_catalog("dag5.base", {AdjustmentStrategy::OM}, o);
  EXPECT_EQ(rs.size(), 2u);
  EXPECT_THROW(run_catalog("dag9", {AdjustmentStrategy::OM}, o), Error);
}

TEST(Tables, SummaryCsvFixture) {
  SimResult r;
  r.scenario = "dag1.base.continuous";
  r.config = find_scenario(r.scenario);
  StrategySummary s;
  s.strategy = AdjustmentStrategy::NoneM;
  s.percent_bias = -0.4;
  s.empirical_variance = 0.001234;
  s.ere = 0.8123;
  s.are = 0.8;
  s.mean = 0.498;
  s.mean_se = 0.0011;
  s.failures = 2;
  r.strategies.push_back(s);
  EXPECT_EQ(summary_table({r}, TableFormat::Csv),
            "scenario,strategy,bias_pct,var,ere,are,mean,mean_se,var_unit,failures\n"
            "dag1.base.continuous,NoneM,0,1.23,0.81,0.80,0.4980,0.0011,1e-3,2\n");
}

TEST(Tables, SummaryMarkdownBinaryUnits) {
  SimResult r;
  r.scenario = "dag1.base.binary";
  r.config = find_scenario(r.scenario);
  StrategySummary s;
  s.strategy = AdjustmentStrategy::OM;
  s.percent_bias = 3.6;
  s.empirical_variance = 0.0123;
  s.are = 0.9;  // never printed for binary
  r.strategies.push_back(s);
  EXPECT_EQ(summary_table({r}, TableFormat::Markdown),
            "| scenario | strategy | bias_pct | var | ere | are | mean | mean_se | var_unit | failures |\n"
            "| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- |\n"
            "| dag1.base.binary | OM | 4 | 1.23 | NA | NA | 0.0000 | 0.0000 | 1e-2 | 0 |\n");
}

TEST(Tables, ComparisonSkipsBinary) {
  SimResult r;
  r.scenario = "dag1.base.binary";
  r.config = find_scenario(r.scenario);
  r.strategies.push_back({});
  const auto t = comparison_table({r}, TableFormat::Csv);
  EXPECT_EQ(t, "scenario,strategy,are,ere,are_minus_ere,analytic_var,empirical_var\n");
  EXPECT_THROW(parse_table_format("html"), Error);
}
