#pragma once

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recal/advisor.hpp"
#include "recal/analytic.hpp"
#include "recal/error.hpp"
#include "recal/frame.hpp"
#include "recal/harness.hpp"
#include "recal/io/config.hpp"
#include "recal/rsw.hpp"

namespace recal::cli {

using nlohmann::json;

/// Renames the configured CSV columns to x / z / y and keeps the declared
/// covariates that are present.
inline Frame remap(const Frame& in, const io::AnalysisConfig& cfg, bool main_study) {
  Frame out;
  auto take = [&](const std::string& from, std::string_view to, bool required) {
    if (in.has(from)) {
      auto c = in.col(from);
      out.add(std::string(to), std::vector<double>(c.begin(), c.end()));
    } else if (required) {
      fail(Errc::SchemaError, std::string(main_study ? "main" : "validation") + " study lacks column '" + from + "'");
    }
  };
  take(cfg.surrogate_column, kSurrogate, true);
  if (main_study) {
    take(cfg.outcome_column, kOutcome, true);
    if (in.has(cfg.exposure_column)) fail(Errc::SchemaError, "main study must not carry the exposure column '" + cfg.exposure_column + "'");
  } else {
    take(cfg.exposure_column, kExposure, true);
    if (in.has(cfg.outcome_column)) fail(Errc::SchemaError, "validation study must not carry the outcome column '" + cfg.outcome_column + "'");
  }
  for (const auto& r : cfg.covariates) {
    const bool required = main_study || r.available_in_validation;
    if (in.has(r.name)) {
      auto c = in.col(r.name);
      out.add(r.name, std::vector<double>(c.begin(), c.end()));
    } else if (required) {
      fail(Errc::SchemaError, std::string(main_study ? "main" : "validation") + " study lacks covariate column '" +
                                  r.name + "'");
    }
  }
  return out;
}

struct StrategyReport {
  std::string label;
  AdjustmentStrategy strategy = AdjustmentStrategy::OM;
  std::optional<RswEstimate> estimate;
  std::optional<OddsRatio> odds_ratio;
  std::optional<SmallMeDiagnostic> small_me;
  std::vector<std::string> warnings;
  std::string error;
};

struct EstimateReport {
  Advice advice;
  OutcomeFamily outcome = OutcomeFamily::Continuous;
  double exposure_unit = 1.0;
  std::size_t n_main = 0;
  std::size_t n_validation = 0;
  StrategyReport recommended;
  std::vector<StrategyReport> forced;
  NaiveEstimate naive;
};

namespace detail {

inline StrategyReport run_one(const Frame& main, const Frame& valid, const std::string& label, AdjustmentStrategy s,
                              const std::vector<std::string>& out_covs, const std::vector<std::string>& mem_covs,
                              const io::AnalysisConfig& cfg) {
  StrategyReport r;
  r.label = label;
  r.strategy = s;
  try {
    auto e = estimate(main, valid, s, out_covs, mem_covs, cfg.outcome);
    auto mem = fit_mem(valid, mem_covs);
    r.small_me = small_me_diagnostic(mem, e.beta_hat, e.prevalence);
    if (r.small_me->warn) {
      r.warnings.push_back("small measurement error approximation may fail: var(X|Z,V)*beta^2 = " +
                           std::to_string(r.small_me->stat) + " >= 0.5 and the outcome is not rare");
    }
    if (cfg.outcome == OutcomeFamily::Binary) r.odds_ratio = odds_ratio(e, cfg.exposure_unit);
    r.estimate = std::move(e);
  } catch (const Error& err) {
    r.error = err.what();
  }
  return r;
}

}  // namespace detail

inline EstimateReport run_estimate(const Frame& main_raw, const Frame& valid_raw, const io::AnalysisConfig& cfg) {
  const Frame main = remap(main_raw, cfg, true);
  const Frame valid = remap(valid_raw, cfg, false);
  Dataset{main, valid}.check();

  EstimateReport rep;
  rep.advice = advise(cfg.covariates, cfg.outcome);
  rep.outcome = cfg.outcome;
  rep.exposure_unit = cfg.exposure_unit;
  rep.n_main = main.rows();
  rep.n_validation = valid.rows();

  const auto out_covs = rep.advice.outcome_covariates();
  const auto mem_covs = rep.advice.mem_covariates();
  const auto label = label_for(out_covs, mem_covs);
  rep.recommended = detail::run_one(main, valid, "recommended", label, out_covs, mem_covs, cfg);
  if (!rep.recommended.error.empty()) fail(Errc::InvalidArgument, "recommended estimate failed: " + rep.recommended.error);
  rep.naive = naive_estimate(main, out_covs, cfg.outcome);

  std::vector<std::string> all;
  for (const auto& c : rep.advice.covariates) all.push_back(c.name);
  for (auto s : cfg.strategies) {
    std::vector<std::string> o = adjusts_outcome(s) ? all : std::vector<std::string>{};
    std::vector<std::string> m;
    StrategyReport r;
    bool missing = false;
    if (adjusts_mem(s)) {
      for (const auto& c : rep.advice.covariates) {
        if (!c.available_in_validation) missing = true;
        m.push_back(c.name);
      }
    }
    if (missing) {
      r.label = "forced";
      r.strategy = s;
      r.error = "strategy " + std::string(to_string(s)) + " needs every covariate in the validation study";
    } else {
      r = detail::run_one(main, valid, "forced", s, o, m, cfg);
    }
    for (const auto& c : rep.advice.covariates) {
      if (validity_table(c.role, s).validity == Validity::Biased) {
        r.warnings.push_back("strategy " + std::string(to_string(s)) + " is biased for covariate '" + c.name + "' (" +
                             to_string(c.role) + ") per the validity table");
      }
    }
    rep.forced.push_back(std::move(r));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

inline json to_json(const Advice& a) {
  json j;
  j["outcome"] = std::string(to_string(a.outcome));
  j["minimal_set"] = a.minimal_set;
  j["outcome_model_covariates"] = a.outcome_covariates();
  j["mem_covariates"] = a.mem_covariates();
  j["covariates"] = json::array();
  for (const auto& c : a.covariates) {
    json cj;
    cj["name"] = c.name;
    cj["role"] = to_string(c.role);
    cj["recommended"] = std::string(to_string(c.recommended));
    cj["rationale"] = c.rationale;
    cj["available_in_validation"] = c.available_in_validation;
    json cells;
    for (auto s : kAllStrategies) {
      const auto cell = c.cells[static_cast<std::size_t>(s)];
      std::string text(to_string(cell.validity));
      if (cell.depends) text += " (efficiency depends on correlations)";
      cells[std::string(to_string(s))] = text;
    }
    cj["validity"] = cells;
    if (c.are) {
      json are;
      for (auto s : kAllStrategies) are[std::string(to_string(s))] = (*c.are)[static_cast<std::size_t>(s)];
      cj["are"] = are;
    }
    j["covariates"].push_back(cj);
  }
  j["warnings"] = a.warnings;
  return j;
}

inline std::string advice_text(const Advice& a) {
  std::ostringstream os;
  os << "Minimal adjustment set: ";
  if (a.minimal_set.empty()) os << "(none)";
  for (std::size_t i = 0; i < a.minimal_set.size(); ++i) os << (i ? ", " : "") << a.minimal_set[i];
  os << "\n";
  if (a.covariates.empty()) os << "No covariates declared.\n";
  for (const auto& c : a.covariates) {
    os << "\n" << c.name << " [" << to_string(c.role) << "]: " << to_string(c.recommended);
    if (c.recommended == AdjustmentStrategy::NoneNone) os << " (exclude from both models)";
    os << "\n  " << c.rationale << "\n  ";
    for (auto s : kAllStrategies) {
      const auto cell = c.cells[static_cast<std::size_t>(s)];
      os << to_string(s) << "=" << to_string(cell.validity) << (cell.depends ? "*" : "") << "  ";
    }
    os << "\n";
    if (c.are) {
      os << "  ARE:";
      for (auto s : kAllStrategies) os << " " << to_string(s) << "=" << num((*c.are)[static_cast<std::size_t>(s)], 4);
      os << "\n";
    }
  }
  if (!a.warnings.empty()) {
    os << "\nWarnings:\n";
    for (const auto& w : a.warnings) os << "  - " << w << "\n";
  }
  return os.str();
}

inline json to_json(const StrategyReport& r) {
  json j;
  j["label"] = r.label;
  j["strategy"] = std::string(to_string(r.strategy));
  if (r.estimate) {
    const auto& e = *r.estimate;
    j["beta_hat"] = e.beta_hat;
    j["se"] = e.se;
    j["ci"] = {e.ci_low, e.ci_high};
    j["gamma_hat"] = e.gamma_hat;
    j["gamma_se"] = e.gamma_se;
    j["alpha_hat"] = e.alpha_hat;
    j["alpha_se"] = e.alpha_se;
    j["outcome_covariates"] = e.outcome_covariates;
    j["mem_covariates"] = e.mem_covariates;
    if (e.prevalence) j["prevalence"] = *e.prevalence;
  }
  if (r.odds_ratio) j["odds_ratio"] = {{"estimate", r.odds_ratio->estimate}, {"ci", {r.odds_ratio->ci_low, r.odds_ratio->ci_high}}};
  if (r.small_me) {
    j["small_me"] = {{"stat", r.small_me->stat}, {"rare_disease_ok", r.small_me->rare_disease_ok}, {"warn", r.small_me->warn}};
  }
  j["warnings"] = r.warnings;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline json to_json(const EstimateReport& rep) {
  json j;
  j["outcome"] = std::string(to_string(rep.outcome));
  j["exposure_unit"] = rep.exposure_unit;
  j["n_main"] = rep.n_main;
  j["n_validation"] = rep.n_validation;
  j["advice"] = to_json(rep.advice);
  j["recommended"] = to_json(rep.recommended);
  j["forced"] = json::array();
  for (const auto& f : rep.forced) j["forced"].push_back(to_json(f));
  j["naive"] = {{"beta_hat", rep.naive.beta_hat}, {"se", rep.naive.se}, {"ci", {rep.naive.ci_low, rep.naive.ci_high}}};
  return j;
}

inline void strategy_text(std::ostringstream& os, const StrategyReport& r, double unit) {
  os << "[" << r.label << "] " << to_string(r.strategy);
  if (!r.error.empty()) {
    os << ": failed: " << r.error << "\n";
  } else {
    const auto& e = *r.estimate;
    os << "\n  outcome model covariates: ";
    if (e.outcome_covariates.empty()) os << "(none)";
    for (std::size_t i = 0; i < e.outcome_covariates.size(); ++i) os << (i ? ", " : "") << e.outcome_covariates[i];
    os << "\n  MEM covariates: ";
    if (e.mem_covariates.empty()) os << "(none)";
    for (std::size_t i = 0; i < e.mem_covariates.size(); ++i) os << (i ? ", " : "") << e.mem_covariates[i];
    os << "\n  beta = " << num(e.beta_hat) << "  SE = " << num(e.se) << "  95% CI (" << num(e.ci_low) << ", "
       << num(e.ci_high) << ")\n";
    os << "  gamma = " << num(e.gamma_hat) << " (SE " << num(e.gamma_se) << ")  alpha = " << num(e.alpha_hat)
       << " (SE " << num(e.alpha_se) << ")\n";
    if (r.odds_ratio) {
      os << "  OR per " << num(unit) << " units = " << num(r.odds_ratio->estimate, 4) << "  95% CI ("
         << num(r.odds_ratio->ci_low, 4) << ", " << num(r.odds_ratio->ci_high, 4) << ")\n";
    }
    if (r.small_me) {
      os << "  small-ME statistic var(X|Z,V)*beta^2 = " << num(r.small_me->stat, 4);
      if (e.prevalence) os << "  prevalence = " << num(*e.prevalence, 4);
      os << "\n";
    }
  }
  for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
}

inline std::string report_text(const EstimateReport& rep) {
  std::ostringstream os;
  os << "Outcome: " << to_string(rep.outcome) << "  main n = " << rep.n_main << "  validation n = " << rep.n_validation
     << "\n\n";
  os << advice_text(rep.advice) << "\n";
  strategy_text(os, rep.recommended, rep.exposure_unit);
  for (const auto& f : rep.forced) strategy_text(os, f, rep.exposure_unit);
  os << "[naive] uncorrected beta = " << num(rep.naive.beta_hat) << "  SE = " << num(rep.naive.se) << "  95% CI ("
     << num(rep.naive.ci_low) << ", " << num(rep.naive.ci_high) << ")\n";
  return os.str();
}

inline json to_json(const SimResult& r) {
  json j;
  j["scenario"] = r.scenario;
  j["outcome"] = std::string(to_string(r.config.outcome));
  j["replicates"] = r.config.replicates;
  j["seed"] = r.config.seed;
  j["truth"] = r.config.beta_x;
  j["strategies"] = json::array();
  for (const auto& s : r.strategies) {
    json sj{{"strategy", std::string(to_string(s.strategy))},
            {"mean", s.mean},
            {"mean_se", s.mean_se},
            {"percent_bias", s.percent_bias},
            {"percent_bias_se", s.percent_bias_se},
            {"empirical_variance", s.empirical_variance},
            {"mean_model_se", s.mean_model_se},
            {"replicates", s.replicates},
            {"failures", s.failures}};
    if (s.ere) sj["ere"] = *s.ere;
    if (s.analytic_variance) sj["analytic_variance"] = *s.analytic_variance;
    if (s.are) sj["are"] = *s.are;
    if (s.limit) sj["limit"] = *s.limit;
    j["strategies"].push_back(sj);
  }
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace recal::cli
