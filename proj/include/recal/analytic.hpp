#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recal/error.hpp"
#include "recal/rsw.hpp"
#include "recal/types.hpp"

namespace recal {

/// Marginal correlations and SDs of (V, X, Z, Y) plus sample sizes.
struct PopulationParams {
  double rho_xz = 0.0;
  double rho_vx = 0.0;
  double rho_vz = 0.0;
  double rho_yz = 0.0;
  double rho_vy = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double sigma_z = 1.0;
  double sigma_v = 1.0;
  double n_ms = 5000;
  double n_vs = 400;

  void validate() const;
};

inline double det3(double r12, double r13, double r23) {
  return 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
}

inline void PopulationParams::validate() const {
  auto in_open = [](double r) { return r > -1.0 && r < 1.0; };
  if (!(in_open(rho_xz) && in_open(rho_vx) && in_open(rho_vz) && in_open(rho_yz) && in_open(rho_vy))) {
    fail(Errc::InconsistentCorrelations, "correlations must lie in (-1, 1)");
  }
  if (!(sigma_x > 0 && sigma_y > 0 && sigma_z > 0 && sigma_v > 0)) {
    fail(Errc::InvalidArgument, "standard deviations must be positive");
  }
  if (!(n_ms > 0 && n_vs > 0)) fail(Errc::InvalidArgument, "sample sizes must be positive");
  if (det3(rho_vx, rho_vz, rho_xz) <= 1e-12) {
    fail(Errc::InconsistentCorrelations, "correlation matrix of (V, X, Z) is not positive definite");
  }
  if (det3(rho_vy, rho_vz, rho_yz) <= 1e-12) {
    fail(Errc::InconsistentCorrelations, "correlation matrix of (V, Y, Z) is not positive definite");
  }
}

/// ρ_AB|C from marginal correlations.
inline double partial_correlation(double rho_ab, double rho_ac, double rho_bc) {
  if (!(std::abs(rho_ac) < 1.0 && std::abs(rho_bc) < 1.0)) {
    fail(Errc::InconsistentCorrelations, "conditioning correlations must be strictly inside (-1, 1)");
  }
  const double r = (rho_ab - rho_ac * rho_bc) / (std::sqrt(1.0 - rho_ac * rho_ac) * std::sqrt(1.0 - rho_bc * rho_bc));
  if (!(std::abs(r) <= 1.0)) {
    fail(Errc::InconsistentCorrelations, "partial correlation " + std::to_string(r) + " outside [-1, 1]");
  }
  return r;
}

/// The conditional parameterization used by the simulation design: ρ_VX plus
/// the four partial correlations. Y is assumed independent of Z given (X, V).
struct ConditionalParams {
  double rho_vx = 0.0;
  double rho_xz_v = 0.0;
  double rho_vz_x = 0.0;
  double rho_xy_v = 0.0;
  double rho_vy_x = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double sigma_z = 1.0;
  double sigma_v = 1.0;
  double n_ms = 5000;
  double n_vs = 400;
};

/// Builds the Gaussian model with standardized V, X and
///   Z = p·X + q·V + e,  Y = b·X + c·V + e_y  (unit-variance errors)
/// whose partial correlations match, then reads off the marginals.
inline PopulationParams from_conditional(const ConditionalParams& c) {
  const double a = c.rho_vx;
  if (!(std::abs(a) < 1.0)) fail(Errc::InconsistentCorrelations, "rho_vx must lie in (-1, 1)");
  for (double r : {c.rho_xz_v, c.rho_vz_x, c.rho_xy_v, c.rho_vy_x}) {
    if (!(std::abs(r) < 1.0)) fail(Errc::InconsistentCorrelations, "partial correlations must lie in (-1, 1)");
  }
  const double k = 1.0 - a * a;
  auto slope = [k](double t) { return t / std::sqrt(k * (1.0 - t * t)); };
  const double p = slope(c.rho_xz_v), q = slope(c.rho_vz_x);
  const double b = slope(c.rho_xy_v), g = slope(c.rho_vy_x);

  const double var_z = p * p + q * q + 2.0 * p * q * a + 1.0;
  const double var_y = b * b + g * g + 2.0 * b * g * a + 1.0;
  const double cov_yz = b * p + b * q * a + g * p * a + g * q;

  PopulationParams out;
  out.rho_vx = a;
  out.rho_xz = (p + q * a) / std::sqrt(var_z);
  out.rho_vz = (p * a + q) / std::sqrt(var_z);
  out.rho_vy = (b * a + g) / std::sqrt(var_y);
  out.rho_yz = cov_yz / std::sqrt(var_y * var_z);
  out.sigma_x = c.sigma_x;
  out.sigma_y = c.sigma_y;
  out.sigma_z = c.sigma_z;
  out.sigma_v = c.sigma_v;
  out.n_ms = c.n_ms;
  out.n_vs = c.n_vs;
  out.validate();
  return out;
}

/// Inverse of from_conditional. ρ_XY is recovered from the surrogacy
/// constraint Y ⊥ Z | X, V.
inline ConditionalParams to_conditional(const PopulationParams& p) {
  p.validate();
  const double den = p.rho_xz - p.rho_vx * p.rho_vz;
  if (den == 0.0) fail(Errc::InconsistentCorrelations, "X and Z are conditionally uncorrelated given V");
  // Standardized Y = b·X + c·V + e.
  const double b = (p.rho_yz - p.rho_vy * p.rho_vz) / den;
  const double g = p.rho_vy - b * p.rho_vx;
  const double rho_xy = b + g * p.rho_vx;

  ConditionalParams c;
  c.rho_vx = p.rho_vx;
  c.rho_xz_v = partial_correlation(p.rho_xz, p.rho_vx, p.rho_vz);
  c.rho_vz_x = partial_correlation(p.rho_vz, p.rho_vx, p.rho_xz);
  c.rho_xy_v = partial_correlation(rho_xy, p.rho_vx, p.rho_vy);
  c.rho_vy_x = partial_correlation(p.rho_vy, p.rho_vx, rho_xy);
  c.sigma_x = p.sigma_x;
  c.sigma_y = p.sigma_y;
  c.sigma_z = p.sigma_z;
  c.sigma_v = p.sigma_v;
  c.n_ms = p.n_ms;
  c.n_vs = p.n_vs;
  return c;
}

/// Population regression coefficients and probability limits of the four
/// estimators.
struct AnalyticLimits {
  double gamma1 = 0.0;
  double gamma1_star = 0.0;
  double gamma2 = 0.0;
  double alpha1 = 0.0;
  double alpha1_star = 0.0;
  double alpha2 = 0.0;
  double lambda1 = 0.0;
  double beta = 0.0;  // γ₁/α₁
  double beta_prime_nn = 0.0;
  double beta_prime_nm = 0.0;
  double beta_prime_on = 0.0;

  double limit(AdjustmentStrategy s) const {
    switch (s) {
      case AdjustmentStrategy::OM: return beta;
      case AdjustmentStrategy::NoneNone: return beta_prime_nn;
      case AdjustmentStrategy::NoneM: return beta_prime_nm;
      case AdjustmentStrategy::ONone: return beta_prime_on;
    }
    return beta;
  }
};

inline AnalyticLimits population_coefficients(const PopulationParams& p) {
  p.validate();
  const double d = 1.0 - p.rho_vz * p.rho_vz;
  AnalyticLimits L;
  L.gamma1_star = p.rho_yz * p.sigma_y / p.sigma_z;
  L.alpha1_star = p.rho_xz * p.sigma_x / p.sigma_z;
  L.gamma1 = (p.rho_yz - p.rho_vy * p.rho_vz) * p.sigma_y / (d * p.sigma_z);
  L.alpha1 = (p.rho_xz - p.rho_vx * p.rho_vz) * p.sigma_x / (d * p.sigma_z);
  L.gamma2 = (p.rho_vy - p.rho_yz * p.rho_vz) * p.sigma_y / (d * p.sigma_v);
  L.alpha2 = (p.rho_vx - p.rho_xz * p.rho_vz) * p.sigma_x / (d * p.sigma_v);
  L.lambda1 = p.rho_vz * p.sigma_v / p.sigma_z;
  if (L.alpha1 == 0.0) fail(Errc::ZeroSlope, "conditional calibration slope alpha1 is zero");
  const double num_marg = L.gamma1 + L.gamma2 * L.lambda1;
  const double den_marg = L.alpha1 + L.alpha2 * L.lambda1;
  if (den_marg == 0.0) fail(Errc::ZeroSlope, "marginal calibration slope alpha1* is zero");
  L.beta = L.gamma1 / L.alpha1;
  L.beta_prime_nn = num_marg / den_marg;
  L.beta_prime_nm = num_marg / L.alpha1;
  L.beta_prime_on = L.gamma1 / den_marg;
  return L;
}

/// Sampling variances of the four slope estimators.
struct SamplingVariances {
  double gamma1 = 0.0;
  double gamma1_star = 0.0;
  double alpha1 = 0.0;
  double alpha1_star = 0.0;
};

inline SamplingVariances sampling_variances(const PopulationParams& p) {
  p.validate();
  const double sz2 = p.sigma_z * p.sigma_z;
  const double d = 1.0 - p.rho_vz * p.rho_vz;
  SamplingVariances v;
  v.gamma1_star = (1.0 - p.rho_yz * p.rho_yz) * p.sigma_y * p.sigma_y / (sz2 * p.n_ms);
  v.alpha1_star = (1.0 - p.rho_xz * p.rho_xz) * p.sigma_x * p.sigma_x / (sz2 * p.n_vs);
  v.gamma1 = p.sigma_y * p.sigma_y * det3(p.rho_vy, p.rho_vz, p.rho_yz) / (p.n_ms * sz2 * d * d);
  v.alpha1 = p.sigma_x * p.sigma_x * det3(p.rho_xz, p.rho_vz, p.rho_vx) / (p.n_vs * sz2 * d * d);
  return v;
}

/// Delta-method asymptotic variance of the strategy's estimator.
inline double analytic_variance(const PopulationParams& p, AdjustmentStrategy s) {
  const auto L = population_coefficients(p);
  const auto V = sampling_variances(p);
  const bool o = adjusts_outcome(s), m = adjusts_mem(s);
  return delta_variance(o ? L.gamma1 : L.gamma1_star, o ? V.gamma1 : V.gamma1_star, m ? L.alpha1 : L.alpha1_star,
                        m ? V.alpha1 : V.alpha1_star);
}

/// Var(OM)/Var(strategy); values above 1 mean the strategy is more efficient.
inline double are(const PopulationParams& p, AdjustmentStrategy s) {
  if (s == AdjustmentStrategy::OM) return 1.0;
  return analytic_variance(p, AdjustmentStrategy::OM) / analytic_variance(p, s);
}

// ---------------------------------------------------------------------------
// Grids

/// Conditional-parameter names accepted in sweeps.
inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names{"rho_vx", "rho_xz_v", "rho_vz_x", "rho_xy_v", "rho_vy_x"};
  return names;
}

inline double& conditional_field(ConditionalParams& c, const std::string& name) {
  if (name == "rho_vx") return c.rho_vx;
  if (name == "rho_xz_v") return c.rho_xz_v;
  if (name == "rho_vz_x") return c.rho_vz_x;
  if (name == "rho_xy_v") return c.rho_xy_v;
  if (name == "rho_vy_x") return c.rho_vy_x;
  fail(Errc::InvalidArgument, "unknown sweep parameter '" + name +
                                  "' (expected rho_vx, rho_xz_v, rho_vz_x, rho_xy_v or rho_vy_x)");
}

/// Parameters that a DAG forces to zero.
inline std::vector<std::string> dag_zero_parameters(DagId dag) {
  const auto f = flags_of(role_of(dag));
  std::vector<std::string> zero;
  if (!f.x) zero.emplace_back("rho_vx");
  if (!f.z) zero.emplace_back("rho_vz_x");
  if (!f.y) zero.emplace_back("rho_vy_x");
  return zero;
}

inline ConditionalParams impose_dag(ConditionalParams c, DagId dag) {
  for (const auto& name : dag_zero_parameters(dag)) conditional_field(c, name) = 0.0;
  return c;
}

struct Sweep {
  std::string param;
  std::vector<double> values;
};

struct GridCell {
  double value1 = 0.0;
  double value2 = 0.0;
  AdjustmentStrategy strategy = AdjustmentStrategy::OM;
  std::optional<double> variance;  // empty when the grid point is infeasible
  std::optional<double> are;
};

struct AreGrid {
  DagId dag = DagId::Dag1;
  std::string param1;
  std::string param2;
  std::vector<GridCell> cells;
};

/// Evaluates every strategy that is valid under `dag` on the product of two
/// sweeps. Infeasible points are kept with empty values.
inline AreGrid are_grid(DagId dag, const Sweep& s1, const Sweep& s2, const ConditionalParams& fixed) {
  const auto zero = dag_zero_parameters(dag);
  for (const auto* s : {&s1, &s2}) {
    ConditionalParams probe;
    (void)conditional_field(probe, s->param);
    for (const auto& z : zero) {
      if (z == s->param) {
        fail(Errc::InvalidArgument, "parameter '" + s->param + "' is fixed at 0 under DAG " +
                                        std::to_string(index(dag)) + " and cannot be swept");
      }
    }
  }
  if (s1.param == s2.param) fail(Errc::InvalidArgument, "the two sweeps must use different parameters");

  AreGrid g{dag, s1.param, s2.param, {}};
  std::vector<AdjustmentStrategy> strategies;
  for (auto s : kAllStrategies) {
    if (is_valid(validity_table(role_of(dag), s).validity)) strategies.push_back(s);
  }
  for (double v1 : s1.values) {
    for (double v2 : s2.values) {
      ConditionalParams c = impose_dag(fixed, dag);
      conditional_field(c, s1.param) = v1;
      conditional_field(c, s2.param) = v2;
      std::optional<PopulationParams> p;
      try {
        p = from_conditional(c);
        (void)population_coefficients(*p);
      } catch (const Error&) {
        p.reset();
      }
      for (auto s : strategies) {
        GridCell cell{v1, v2, s, std::nullopt, std::nullopt};
        if (p) {
          try {
            cell.variance = analytic_variance(*p, s);
            cell.are = are(*p, s);
          } catch (const Error&) {
            cell.variance.reset();
            cell.are.reset();
          }
        }
        g.cells.push_back(cell);
      }
    }
  }
  return g;
}

inline std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) v.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  return v;
}

/// Default grids: DAG 1 sweeps ρ_VY|X against ρ_XZ|V, DAG 8 sweeps ρ_VX
/// against ρ_VZ|X at ρ_XZ|V = 0.7. Other DAGs have no default grid.
struct DefaultGrid {
  Sweep s1;
  Sweep s2;
  ConditionalParams fixed;
};

inline DefaultGrid default_grid(DagId dag) {
  std::vector<double> tenths;
  for (int i = 1; i <= 9; ++i) tenths.push_back(i / 10.0);
  ConditionalParams fixed;
  fixed.rho_xy_v = 0.45;
  fixed.rho_xz_v = 0.7;
  if (dag == DagId::Dag1) {
    return {{"rho_vy_x", tenths}, {"rho_xz_v", tenths}, fixed};
  }
  if (dag == DagId::Dag8) {
    return {{"rho_vx", tenths}, {"rho_vz_x", tenths}, fixed};
  }
  fail(Errc::InvalidArgument, "no default grid for DAG " + std::to_string(index(dag)) +
                                  "; pass two sweeps explicitly");
}

inline std::string grid_csv(const AreGrid& g) {
  std::ostringstream os;
  os.precision(10);
  os << "dag," << g.param1 << ',' << g.param2 << ",strategy,variance,are\n";
  for (const auto& c : g.cells) {
    os << index(g.dag) << ',' << c.value1 << ',' << c.value2 << ',' << to_string(c.strategy) << ',';
    if (c.variance) {
      os << *c.variance << ',' << *c.are;
    } else {
      os << "NA,NA";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace recal
