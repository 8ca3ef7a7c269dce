#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "recal/analytic.hpp"
#include "recal/error.hpp"
#include "recal/rsw.hpp"
#include "recal/scenario.hpp"

namespace recal {

struct StrategySummary {
  AdjustmentStrategy strategy = AdjustmentStrategy::OM;
  double mean = 0.0;
  double mean_se = 0.0;  // Monte Carlo SE of the mean
  double percent_bias = 0.0;
  double percent_bias_se = 0.0;
  double empirical_variance = 0.0;
  double mean_model_se = 0.0;  // average delta-method SE
  std::optional<double> ere;
  std::optional<double> analytic_variance;
  std::optional<double> are;
  std::optional<double> limit;  // analytic probability limit
  std::size_t replicates = 0;   // successful
  std::size_t failures = 0;
};

struct SimResult {
  std::string scenario;
  ScenarioConfig config;
  std::vector<StrategySummary> strategies;
  std::vector<std::string> warnings;

  const StrategySummary& at(AdjustmentStrategy s) const {
    for (const auto& x : strategies) {
      if (x.strategy == s) return x;
    }
    fail(Errc::InvalidArgument, "strategy " + std::string(to_string(s)) + " was not simulated");
  }
};

struct RunOptions {
  unsigned jobs = 0;  // 0 = hardware concurrency
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::ostream* log = nullptr;
};

namespace detail {

struct ReplicateOutcome {
  std::array<std::optional<double>, 4> beta;
  std::array<double, 4> se{};
  std::array<std::optional<Errc>, 4> error;
};

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace detail

/// Runs every replicate of `config`, estimating each requested strategy with
/// the scenario covariate. Replicates are distributed over threads; results
/// are folded in replicate order, so output does not depend on scheduling.
inline SimResult run_scenario(ScenarioConfig config,
                              const std::vector<AdjustmentStrategy>& strategies =
                                  std::vector<AdjustmentStrategy>(kAllStrategies.begin(), kAllStrategies.end()),
                              const RunOptions& opt = {}) {
  if (opt.replicates) config.replicates = *opt.replicates;
  if (opt.seed) config.seed = *opt.seed;
  config.validate();
  if (strategies.empty()) fail(Errc::InvalidArgument, "no strategies requested");

  const std::size_t R = config.replicates;
  std::vector<detail::ReplicateOutcome> out(R);
  const std::vector<std::string> cov{std::string(kCovariate)};
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        const auto sample = generate(config, r);
        for (auto s : strategies) {
          const auto k = static_cast<std::size_t>(s);
          try {
            const auto e = estimate(sample.main, sample.validation, s, cov, config.outcome);
            out[r].beta[k] = e.beta_hat;
            out[r].se[k] = e.se;
          } catch (const Error& err) {
            out[r].error[k] = err.code();
          }
        }
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        next.store(R);
        return;
      }
    }
  };

  const unsigned jobs = std::min<unsigned>(detail::resolve_jobs(opt.jobs), static_cast<unsigned>(std::max<std::size_t>(R, 1)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  SimResult res;
  res.scenario = config.name;
  res.config = config;

  std::optional<PopulationParams> pop;
  if (config.outcome == OutcomeFamily::Continuous && config.beta_xv == 0.0) pop = implied_correlations(config);
  std::optional<AnalyticLimits> limits;
  if (pop) limits = population_coefficients(*pop);

  for (auto s : strategies) {
    const auto k = static_cast<std::size_t>(s);
    StrategySummary sm;
    sm.strategy = s;
    double sum = 0.0, sum_se = 0.0;
    for (const auto& o : out) {
      if (o.beta[k]) {
        sum += *o.beta[k];
        sum_se += o.se[k];
        ++sm.replicates;
      } else {
        ++sm.failures;
      }
    }
    const double frac = static_cast<double>(sm.failures) / static_cast<double>(R);
    if (frac > 0.10) {
      fail(Errc::TooManyFailures, config.name + " " + std::string(to_string(s)) + ": " +
                                      std::to_string(sm.failures) + " of " + std::to_string(R) + " replicates failed");
    }
    if (frac > 0.01) {
      res.warnings.push_back(config.name + " " + std::string(to_string(s)) + ": " + std::to_string(sm.failures) +
                             " of " + std::to_string(R) + " replicates failed and were excluded");
    }
    if (sm.replicates > 0) {
      const double n = static_cast<double>(sm.replicates);
      sm.mean = sum / n;
      sm.mean_model_se = sum_se / n;
      double ss = 0.0;
      for (const auto& o : out) {
        if (o.beta[k]) ss += (*o.beta[k] - sm.mean) * (*o.beta[k] - sm.mean);
      }
      sm.empirical_variance = sm.replicates > 1 ? ss / (n - 1.0) : 0.0;
      sm.mean_se = std::sqrt(sm.empirical_variance / n);
      sm.percent_bias = 100.0 * (sm.mean - config.beta_x) / config.beta_x;
      sm.percent_bias_se = 100.0 * sm.mean_se / std::abs(config.beta_x);
    }
    if (pop) {
      try {
        sm.analytic_variance = analytic_variance(*pop, s);
        sm.are = are(*pop, s);
        sm.limit = limits->limit(s);
      } catch (const Error&) {
        sm.analytic_variance.reset();
        sm.are.reset();
      }
    }
    res.strategies.push_back(sm);
  }

  auto om = std::find_if(res.strategies.begin(), res.strategies.end(),
                         [](const StrategySummary& x) { return x.strategy == AdjustmentStrategy::OM; });
  if (om != res.strategies.end() && om->empirical_variance > 0.0) {
    for (auto& sm : res.strategies) {
      if (sm.empirical_variance > 0.0) sm.ere = om->empirical_variance / sm.empirical_variance;
    }
  }
  if (opt.log) {
    *opt.log << "[recal] " << config.name << ": " << R << " replicates done\n";
    for (const auto& w : res.warnings) *opt.log << "[recal] warning: " << w << '\n';
  }
  return res;
}

inline std::vector<SimResult> run_catalog(std::string_view filter,
                                          const std::vector<AdjustmentStrategy>& strategies =
                                              std::vector<AdjustmentStrategy>(kAllStrategies.begin(), kAllStrategies.end()),
                                          const RunOptions& opt = {}) {
  std::vector<SimResult> out;
  for (const auto& c : catalog()) {
    if (matches_filter(c, filter)) out.push_back(run_scenario(c, strategies, opt));
  }
  if (out.empty()) fail(Errc::InvalidArgument, "no catalog scenario matches '" + std::string(filter) + "'");
  return out;
}

enum class TableFormat { Csv, Markdown };

inline TableFormat parse_table_format(std::string_view s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  fail(Errc::InvalidArgument, "unknown table format '" + std::string(s) + "' (expected csv or markdown)");
}

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  std::string s(buf);
  if (s == "-0" || s == "-0.00" || s == "-0.0000") s.erase(0, 1);
  return s;
}

inline std::string opt_fmt(const char* f, const std::optional<double>& v) { return v ? fmt(f, *v) : "NA"; }

inline std::string emit(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                        TableFormat format) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == TableFormat::Csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    } else {
      os << '|';
      for (const auto& c : cells) os << ' ' << c << " |";
    }
    os << '\n';
  };
  line(header);
  if (format == TableFormat::Markdown) {
    os << '|';
    for (std::size_t i = 0; i < header.size(); ++i) os << " --- |";
    os << '\n';
  }
  for (const auto& r : rows) line(r);
  return os.str();
}

}  // namespace detail

/// One row per scenario × strategy. Variances are reported in units of 1e-3
/// (continuous) or 1e-2 (binary), as named in the var_unit column.
inline std::string summary_table(const std::vector<SimResult>& results, TableFormat format) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results) {
    const bool cont = r.config.outcome == OutcomeFamily::Continuous;
    const double scale = cont ? 1e3 : 1e2;
    for (const auto& s : r.strategies) {
      std::optional<double> are = cont ? s.are : std::nullopt;
      rows.push_back({r.scenario, std::string(to_string(s.strategy)), detail::fmt("%.0f", s.percent_bias),
                      detail::fmt("%.2f", s.empirical_variance * scale), detail::opt_fmt("%.2f", s.ere),
                      detail::opt_fmt("%.2f", are), detail::fmt("%.4f", s.mean), detail::fmt("%.4f", s.mean_se),
                      cont ? "1e-3" : "1e-2", std::to_string(s.failures)});
    }
  }
  return detail::emit({"scenario", "strategy", "bias_pct", "var", "ere", "are", "mean", "mean_se", "var_unit", "failures"},
                      rows, format);
}

/// Analytic versus empirical efficiency side by side (continuous scenarios).
inline std::string comparison_table(const std::vector<SimResult>& results, TableFormat format) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results) {
    if (r.config.outcome != OutcomeFamily::Continuous) continue;
    for (const auto& s : r.strategies) {
      std::optional<double> diff;
      if (s.are && s.ere) diff = *s.are - *s.ere;
      rows.push_back({r.scenario, std::string(to_string(s.strategy)), detail::opt_fmt("%.2f", s.are),
                      detail::opt_fmt("%.2f", s.ere), detail::opt_fmt("%.3f", diff),
                      detail::opt_fmt("%.2f", s.analytic_variance ? std::optional<double>(*s.analytic_variance * 1e3) : std::nullopt),
                      detail::fmt("%.2f", s.empirical_variance * 1e3)});
    }
  }
  return detail::emit({"scenario", "strategy", "are", "ere", "are_minus_ere", "analytic_var", "empirical_var"}, rows,
                      format);
}

}  // namespace recal
