#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "recal/error.hpp"
#include "recal/frame.hpp"
#include "recal/regress.hpp"
#include "recal/types.hpp"

namespace recal {

inline constexpr double kZ975 = 1.959963984540054;

struct RswEstimate {
  double beta_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  AdjustmentStrategy strategy = AdjustmentStrategy::OM;
  double gamma_hat = 0.0;
  double gamma_se = 0.0;
  double alpha_hat = 0.0;
  double alpha_se = 0.0;
  double gamma_term = 0.0;  // Var(γ̂)/α̂²
  double alpha_term = 0.0;  // γ̂²·Var(α̂)/α̂⁴
  double mem_mse = 0.0;
  double small_me_stat = 0.0;
  OutcomeFamily outcome_family = OutcomeFamily::Continuous;
  std::optional<double> prevalence;  // binary outcomes only
  std::vector<std::string> outcome_covariates;
  std::vector<std::string> mem_covariates;
};

/// Delta-method variance of γ̂/α̂ for independent samples (zero covariance).
inline double delta_variance(double gamma_hat, double var_gamma, double alpha_hat, double var_alpha) {
  if (alpha_hat == 0.0) fail(Errc::ZeroSlope, "calibration slope is exactly zero");
  if (var_gamma < 0.0 || var_alpha < 0.0) fail(Errc::InvalidArgument, "variances must be nonnegative");
  const double a2 = alpha_hat * alpha_hat;
  return var_gamma / a2 + gamma_hat * gamma_hat * var_alpha / (a2 * a2);
}

struct SmallMeDiagnostic {
  double stat = 0.0;
  bool rare_disease_ok = false;
  bool warn = false;
};

/// var(X|Z,V)·β² from the MEM mean squared error. A warning is raised when the
/// statistic reaches 0.5 and the outcome is not rare (prevalence < 5%).
inline SmallMeDiagnostic small_me_diagnostic(const ModelFit& fit_mem, double beta_hat,
                                             std::optional<double> prevalence = std::nullopt) {
  if (fit_mem.family != Family::Linear) fail(Errc::InvalidArgument, "small-ME diagnostic needs a linear MEM");
  SmallMeDiagnostic d;
  d.stat = fit_mem.residual_variance * beta_hat * beta_hat;
  d.rare_disease_ok = prevalence.has_value() && *prevalence < 0.05;
  d.warn = d.stat >= 0.5 && !d.rare_disease_ok;
  return d;
}

inline Family family_of(OutcomeFamily f) { return f == OutcomeFamily::Continuous ? Family::Linear : Family::Logistic; }

inline ModelFit fit_outcome_model(const Frame& main, const std::vector<std::string>& covariates, OutcomeFamily family) {
  std::vector<std::string> regs{std::string(kSurrogate)};
  regs.insert(regs.end(), covariates.begin(), covariates.end());
  return fit(family_of(family), to_vector(main.col(kOutcome)), make_design(main, regs));
}

inline ModelFit fit_mem(const Frame& valid, const std::vector<std::string>& covariates) {
  std::vector<std::string> regs{std::string(kSurrogate)};
  regs.insert(regs.end(), covariates.begin(), covariates.end());
  return fit_ols(to_vector(valid.col(kExposure)), make_design(valid, regs));
}

/// Combines an outcome-model fit and a MEM fit into the ratio estimator γ̂₁/α̂₁.
inline RswEstimate combine(const ModelFit& outcome, const ModelFit& mem, AdjustmentStrategy strategy,
                           OutcomeFamily family) {
  RswEstimate e;
  e.strategy = strategy;
  e.outcome_family = family;
  e.gamma_hat = outcome.coef(kSurrogate);
  e.gamma_se = outcome.se(kSurrogate);
  e.alpha_hat = mem.coef(kSurrogate);
  e.alpha_se = mem.se(kSurrogate);
  if (std::abs(e.alpha_hat) < 1e-8 || std::abs(e.alpha_hat) < 2.0 * e.alpha_se) {
    fail(Errc::NearZeroCalibrationSlope, "calibration slope " + std::to_string(e.alpha_hat) + " (SE " +
                                             std::to_string(e.alpha_se) +
                                             ") is too close to zero for a stable correction");
  }
  const double a2 = e.alpha_hat * e.alpha_hat;
  e.beta_hat = e.gamma_hat / e.alpha_hat;
  e.gamma_term = e.gamma_se * e.gamma_se / a2;
  e.alpha_term = e.gamma_hat * e.gamma_hat * e.alpha_se * e.alpha_se / (a2 * a2);
  e.se = std::sqrt(e.gamma_term + e.alpha_term);
  e.ci_low = e.beta_hat - kZ975 * e.se;
  e.ci_high = e.beta_hat + kZ975 * e.se;
  e.mem_mse = mem.residual_variance;
  e.small_me_stat = mem.residual_variance * e.beta_hat * e.beta_hat;
  return e;
}

inline double prevalence_of(const Frame& main) {
  auto y = main.col(kOutcome);
  double s = 0.0;
  for (double v : y) s += v;
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

/// RSW estimator with explicit covariate sets for the outcome model (main
/// study) and the MEM (validation study). The strategy label must agree with
/// which sets are nonempty.
inline RswEstimate estimate(const Frame& main, const Frame& valid, AdjustmentStrategy strategy,
                            const std::vector<std::string>& covariates_outcome,
                            const std::vector<std::string>& covariates_mem, OutcomeFamily family) {
  if (adjusts_outcome(strategy) == covariates_outcome.empty() || adjusts_mem(strategy) == covariates_mem.empty()) {
    fail(Errc::InvalidArgument, "strategy " + std::string(to_string(strategy)) +
                                    " is inconsistent with the given covariate sets (outcome: " +
                                    std::to_string(covariates_outcome.size()) +
                                    ", MEM: " + std::to_string(covariates_mem.size()) + ")");
  }
  for (const auto& c : covariates_outcome) {
    if (!main.has(c)) fail(Errc::SchemaError, "outcome-model covariate '" + c + "' missing from main study");
  }
  for (const auto& c : covariates_mem) {
    if (!valid.has(c)) fail(Errc::SchemaError, "MEM covariate '" + c + "' missing from validation study");
  }
  RswEstimate e = combine(fit_outcome_model(main, covariates_outcome, family), fit_mem(valid, covariates_mem),
                          strategy, family);
  if (family == OutcomeFamily::Binary) e.prevalence = prevalence_of(main);
  e.outcome_covariates = covariates_outcome;
  e.mem_covariates = covariates_mem;
  return e;
}

/// Single covariate set placed according to the strategy.
inline RswEstimate estimate(const Frame& main, const Frame& valid, AdjustmentStrategy strategy,
                            const std::vector<std::string>& covariates, OutcomeFamily family) {
  static const std::vector<std::string> none;
  if (covariates.empty() && strategy != AdjustmentStrategy::NoneNone) {
    fail(Errc::InvalidArgument, "strategy " + std::string(to_string(strategy)) + " needs at least one covariate");
  }
  return estimate(main, valid, strategy, adjusts_outcome(strategy) ? covariates : none,
                  adjusts_mem(strategy) ? covariates : none, family);
}

/// Uncorrected slope of Y on Z (with the given outcome covariates).
struct NaiveEstimate {
  double beta_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline NaiveEstimate naive_estimate(const Frame& main, const std::vector<std::string>& covariates, OutcomeFamily family) {
  auto f = fit_outcome_model(main, covariates, family);
  NaiveEstimate n;
  n.beta_hat = f.coef(kSurrogate);
  n.se = f.se(kSurrogate);
  n.ci_low = n.beta_hat - kZ975 * n.se;
  n.ci_high = n.beta_hat + kZ975 * n.se;
  return n;
}

struct OddsRatio {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// exp(β̂·unit) with exp-transformed Wald limits.
inline OddsRatio odds_ratio(const RswEstimate& e, double unit = 1.0) {
  if (!(unit > 0.0)) fail(Errc::InvalidArgument, "exposure unit must be positive");
  return {std::exp(e.beta_hat * unit), std::exp(e.ci_low * unit), std::exp(e.ci_high * unit)};
}

// ---------------------------------------------------------------------------
// Effect modification

inline constexpr std::string_view kZV = "z:v";
inline constexpr std::string_view kV2 = "v^2";

struct EffectModEstimate {
  double beta_z_star = 0.0;
  double beta_v_star = 0.0;
  double beta_zv_star = 0.0;
  double beta_v2_star = 0.0;
  double beta_zv_star_se = 0.0;
  double alpha_z = 0.0;
  double alpha_v = 0.0;

  /// β(v) = (β_z* + β_zv*·v)/α_z
  double beta_at(double v) const { return (beta_z_star + beta_zv_star * v) / alpha_z; }
  double operator()(double v) const { return beta_at(v); }
};

/// Outcome model Y ~ Z + V + Z·V + V² on the main study, MEM X ~ Z + V on the
/// validation study.
inline EffectModEstimate estimate_effect_mod_parametric(const Frame& main, const Frame& valid,
                                                        const std::string& covariate) {
  if (!main.has(covariate) || !valid.has(covariate)) {
    fail(Errc::SchemaError, "covariate '" + covariate + "' must be present in both samples");
  }
  auto z = main.col(kSurrogate);
  auto v = main.col(covariate);
  const auto n = static_cast<Eigen::Index>(main.rows());
  Design d;
  d.X.resize(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = z[static_cast<std::size_t>(i)], vi = v[static_cast<std::size_t>(i)];
    d.X.row(i) << 1.0, zi, vi, zi * vi, vi * vi;
  }
  d.terms = {std::string(kIntercept), std::string(kSurrogate), covariate, std::string(kZV), std::string(kV2)};
  auto out = fit_ols(to_vector(main.col(kOutcome)), d);
  auto mem = fit_mem(valid, {covariate});

  EffectModEstimate e;
  e.beta_z_star = out.coefficients(1);
  e.beta_v_star = out.coefficients(2);
  e.beta_zv_star = out.coefficients(3);
  e.beta_v2_star = out.coefficients(4);
  e.beta_zv_star_se = std::sqrt(out.cov(3, 3));
  e.alpha_z = mem.coef(kSurrogate);
  e.alpha_v = mem.coef(covariate);
  if (e.alpha_z == 0.0) fail(Errc::ZeroSlope, "calibration slope is exactly zero");
  return e;
}

struct BinningOptions {
  int z_bins = 5;
  int v_bins = 3;
  std::size_t min_count = 30;
};

/// Equal-frequency interior cut points (k−1 of them for k bins), linear
/// interpolation between order statistics.
inline std::vector<double> quantile_edges(std::span<const double> values, int bins) {
  if (bins < 1) fail(Errc::InvalidArgument, "need at least one bin");
  if (values.empty()) fail(Errc::EmptyBin, "cannot bin an empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    const double h = static_cast<double>(s.size() - 1) * k / bins;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    edges.push_back(s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]));
  }
  return edges;
}

inline int bin_of(double value, const std::vector<double>& edges) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

/// Mean of `target` over rows whose Z falls in bin `zb` and (when `vb` >= 0)
/// whose covariate falls in bin `vb`.
inline double binned_mean(const Frame& f, std::string_view target, const std::vector<double>& z_edges, int zb,
                          const std::string& covariate, const std::vector<double>& v_edges, int vb,
                          std::size_t min_count, std::string_view sample) {
  auto t = f.col(target);
  auto z = f.col(kSurrogate);
  std::span<const double> v;
  if (vb >= 0) v = f.col(covariate);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    if (bin_of(z[i], z_edges) != zb) continue;
    if (vb >= 0 && bin_of(v[i], v_edges) != vb) continue;
    sum += t[i];
    ++count;
  }
  if (count < min_count) {
    fail(Errc::EmptyBin, std::string(sample) + " cell (z bin " + std::to_string(zb) +
                             (vb >= 0 ? ", v bin " + std::to_string(vb) : std::string()) + ") has " +
                             std::to_string(count) + " observations, need " + std::to_string(min_count));
  }
  return sum / static_cast<double>(count);
}

/// Ratio of binned conditional-mean differences between Z bins `z_hi` and
/// `z_lo`. The numerator (main study, Y) conditions on the covariate bin for
/// OM and ONone; the denominator (validation study, X) for OM and NoneM.
/// Bin edges for Z and the covariate come from the main study.
inline double estimate_nonparametric(const Frame& main, const Frame& valid, AdjustmentStrategy strategy,
                                     const std::string& covariate, int z_lo, int z_hi, int v_bin,
                                     const BinningOptions& opt = {}) {
  if (z_lo == z_hi) fail(Errc::InvalidArgument, "z_lo and z_hi must be different bins");
  if (z_lo < 0 || z_hi < 0 || z_lo >= opt.z_bins || z_hi >= opt.z_bins) {
    fail(Errc::InvalidArgument, "Z bin index out of range 0.." + std::to_string(opt.z_bins - 1));
  }
  const bool cond_y = adjusts_outcome(strategy), cond_x = adjusts_mem(strategy);
  if ((cond_y || cond_x) && (v_bin < 0 || v_bin >= opt.v_bins)) {
    fail(Errc::InvalidArgument, "covariate bin index out of range 0.." + std::to_string(opt.v_bins - 1));
  }
  const auto z_edges = quantile_edges(main.col(kSurrogate), opt.z_bins);
  std::vector<double> v_edges;
  if (cond_y || cond_x) v_edges = quantile_edges(main.col(covariate), opt.v_bins);

  const int vy = cond_y ? v_bin : -1, vx = cond_x ? v_bin : -1;
  const double num = binned_mean(main, kOutcome, z_edges, z_hi, covariate, v_edges, vy, opt.min_count, "main") -
                     binned_mean(main, kOutcome, z_edges, z_lo, covariate, v_edges, vy, opt.min_count, "main");
  const double den =
      binned_mean(valid, kExposure, z_edges, z_hi, covariate, v_edges, vx, opt.min_count, "validation") -
      binned_mean(valid, kExposure, z_edges, z_lo, covariate, v_edges, vx, opt.min_count, "validation");
  if (den == 0.0) fail(Errc::ZeroDenominator, "validation conditional means do not differ between Z bins");
  return num / den;
}

/// Mean covariate value within a covariate bin of the main study, for
/// comparing binned estimates against β(v).
inline double covariate_bin_mean(const Frame& main, const std::string& covariate, int v_bin,
                                 const BinningOptions& opt = {}) {
  auto v = main.col(covariate);
  const auto edges = quantile_edges(v, opt.v_bins);
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (bin_of(x, edges) == v_bin) {
      sum += x;
      ++count;
    }
  }
  if (count == 0) fail(Errc::EmptyBin, "covariate bin " + std::to_string(v_bin) + " is empty");
  return sum / static_cast<double>(count);
}

}  // namespace recal
