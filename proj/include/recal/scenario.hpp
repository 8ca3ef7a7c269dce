#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "recal/analytic.hpp"
#include "recal/error.hpp"
#include "recal/frame.hpp"
#include "recal/random.hpp"
#include "recal/types.hpp"

namespace recal {

inline constexpr std::uint64_t kDefaultSeed = 2024;
inline constexpr std::string_view kCovariate = "v";

enum class VDist { StdNormal, Bernoulli };

constexpr std::string_view to_string(VDist d) { return d == VDist::StdNormal ? "normal" : "bernoulli"; }

inline VDist parse_vdist(std::string_view s) {
  if (s == "normal" || s == "std_normal") return VDist::StdNormal;
  if (s == "bernoulli" || s == "binary") return VDist::Bernoulli;
  fail(Errc::InvalidConfig, "unknown v_dist '" + std::string(s) + "' (expected normal or bernoulli)");
}

/// Data-generating process:
///   V ~ N(0,1) or Bernoulli(v_prob)
///   X = eta_v·V + e_x
///   Z = theta_x·X + theta_v·V + e_z
///   Y = beta_x·X + beta_v·V + beta_xv·X·V + e_y            (continuous)
///   logit P(Y=1) = logistic_intercept + beta_x·X + beta_v·V + beta_xv·X·V  (binary)
struct ScenarioConfig {
  std::string name = "custom";
  DagId dag = DagId::Dag1;
  double eta_v = 0.0;
  double theta_x = 0.5;
  double theta_v = 0.0;
  double beta_x = 0.5;
  double beta_v = 0.8;
  double beta_xv = 0.0;
  double logistic_intercept = -5.0;
  double noise_sd_x = 1.0;
  double noise_sd_z = 0.5;
  double noise_sd_y = 1.0;
  VDist v_dist = VDist::StdNormal;
  double v_prob = 0.4;
  OutcomeFamily outcome = OutcomeFamily::Continuous;
  std::size_t n_ms = 4600;
  std::size_t n_vs = 400;
  std::size_t replicates = 1000;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    auto bad = [this](const std::string& what) { fail(Errc::InvalidConfig, "scenario '" + name + "': " + what); };
    if (n_ms == 0 || n_vs == 0) bad("sample sizes must be positive");
    if (replicates == 0) bad("replicates must be positive");
    if (!(noise_sd_x > 0 && noise_sd_z > 0 && noise_sd_y > 0)) bad("noise standard deviations must be positive");
    if (v_dist == VDist::Bernoulli && !(v_prob > 0 && v_prob < 1)) bad("v_prob must lie in (0, 1)");
    const RoleFlags want = flags_of(role_of(dag));
    const RoleFlags got{eta_v != 0.0, theta_v != 0.0, beta_v != 0.0 || beta_xv != 0.0};
    if (!(want == got)) {
      bad("coefficient pattern (eta_v " + std::string(got.x ? "!= 0" : "= 0") + ", theta_v " +
          (got.z ? "!= 0" : "= 0") + ", beta_v/beta_xv " + (got.y ? "!= 0" : "= 0") + ") does not match DAG " +
          std::to_string(index(dag)));
    }
  }

  double v_variance() const { return v_dist == VDist::StdNormal ? 1.0 : v_prob * (1.0 - v_prob); }
};

struct GeneratedSample {
  Frame main;        // z, v, y
  Frame validation;  // x, z, v
  double truth = 0.0;
};

/// Draws one replicate. The first n_vs rows form the validation study.
inline GeneratedSample generate(const ScenarioConfig& cfg, std::uint64_t replicate) {
  cfg.validate();
  Stream rng(cfg.seed, fnv1a(cfg.name), replicate);
  const std::size_t n = cfg.n_vs + cfg.n_ms;
  std::vector<double> vx, zx, vv, zm, vm, ym;
  vx.reserve(cfg.n_vs);
  zx.reserve(cfg.n_vs);
  vv.reserve(cfg.n_vs);
  zm.reserve(cfg.n_ms);
  vm.reserve(cfg.n_ms);
  ym.reserve(cfg.n_ms);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = cfg.v_dist == VDist::StdNormal ? rng.normal() : (rng.bernoulli(cfg.v_prob) ? 1.0 : 0.0);
    const double x = cfg.eta_v * v + cfg.noise_sd_x * rng.normal();
    const double z = cfg.theta_x * x + cfg.theta_v * v + cfg.noise_sd_z * rng.normal();
    const double lin = cfg.beta_x * x + cfg.beta_v * v + cfg.beta_xv * x * v;
    double y;
    if (cfg.outcome == OutcomeFamily::Continuous) {
      y = lin + cfg.noise_sd_y * rng.normal();
    } else {
      const double p = 1.0 / (1.0 + std::exp(-(cfg.logistic_intercept + lin)));
      y = rng.uniform() < p ? 1.0 : 0.0;
    }
    if (i < cfg.n_vs) {
      vx.push_back(x);
      zx.push_back(z);
      vv.push_back(v);
    } else {
      zm.push_back(z);
      vm.push_back(v);
      ym.push_back(y);
    }
  }
  GeneratedSample s;
  s.validation.add(std::string(kExposure), std::move(vx));
  s.validation.add(std::string(kSurrogate), std::move(zx));
  s.validation.add(std::string(kCovariate), std::move(vv));
  s.main.add(std::string(kSurrogate), std::move(zm));
  s.main.add(std::string(kCovariate), std::move(vm));
  s.main.add(std::string(kOutcome), std::move(ym));
  s.truth = cfg.beta_x;
  return s;
}

/// Population covariance algebra of the linear DGP.
inline PopulationParams implied_correlations(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.outcome != OutcomeFamily::Continuous) {
    fail(Errc::InvalidConfig, "implied correlations are defined for continuous outcomes only");
  }
  if (cfg.beta_xv != 0.0) fail(Errc::InvalidConfig, "implied correlations need beta_xv = 0 (no interaction)");
  const double vv = cfg.v_variance();
  const double cvx = cfg.eta_v * vv;
  const double var_x = cfg.eta_v * cfg.eta_v * vv + cfg.noise_sd_x * cfg.noise_sd_x;
  const double tx = cfg.theta_x, tv = cfg.theta_v, bx = cfg.beta_x, bv = cfg.beta_v;
  const double cvz = tx * cvx + tv * vv;
  const double cxz = tx * var_x + tv * cvx;
  const double var_z = tx * tx * var_x + tv * tv * vv + 2 * tx * tv * cvx + cfg.noise_sd_z * cfg.noise_sd_z;
  const double cvy = bx * cvx + bv * vv;
  const double var_y = bx * bx * var_x + bv * bv * vv + 2 * bx * bv * cvx + cfg.noise_sd_y * cfg.noise_sd_y;
  const double cyz = bx * cxz + bv * cvz;

  PopulationParams p;
  p.sigma_v = std::sqrt(vv);
  p.sigma_x = std::sqrt(var_x);
  p.sigma_z = std::sqrt(var_z);
  p.sigma_y = std::sqrt(var_y);
  p.rho_vx = cvx / (p.sigma_v * p.sigma_x);
  p.rho_vz = cvz / (p.sigma_v * p.sigma_z);
  p.rho_xz = cxz / (p.sigma_x * p.sigma_z);
  p.rho_vy = cvy / (p.sigma_v * p.sigma_y);
  p.rho_yz = cyz / (p.sigma_y * p.sigma_z);
  p.n_ms = static_cast<double>(cfg.n_ms);
  p.n_vs = static_cast<double>(cfg.n_vs);
  p.validate();
  return p;
}

namespace detail {

struct CatalogRow {
  int dag;
  const char* variant;
  double eta_v, theta_x, theta_v, beta_x, beta_v;
  bool binary_v;
};

// Columns: eta_v, theta_x, theta_v, beta_x, beta_v.
inline const std::vector<CatalogRow>& catalog_rows() {
  static const std::vector<CatalogRow> rows{
      {1, "base", 0, .5, 0, .5, .8, false},
      {1, "small_rho_xz_v", 0, .2, 0, .5, .8, false},
      {1, "small_beta_x", 0, .5, 0, .1, .8, false},
      {1, "weak_v", 0, .5, 0, .5, .2, false},
      {1, "binary_v", 0, .5, 0, .5, .8, true},
      {2, "base", 0, .5, .1, .5, .8, false},
      {2, "small_rho_xz_v", 0, .2, .1, .5, .8, false},
      {2, "small_beta_x", 0, .5, .1, .1, .8, false},
      {2, "large_me", 0, .5, 2, .5, .8, false},
      {2, "weak_v", 0, .5, .1, .5, .2, false},
      {2, "binary_v", 0, .5, .1, .5, .8, true},
      {3, "base", .4, .5, 0, .5, .8, false},
      {3, "small_rho_xz_v", .4, .2, 0, .5, .8, false},
      {3, "small_beta_x", .4, .5, 0, .1, .8, false},
      {3, "negative_rho_vx", -.4, .5, 0, .5, .8, false},
      {3, "small_rho_vx", .2, .5, 0, .5, .8, false},
      {3, "weak_v", .4, .5, 0, .5, .2, false},
      {3, "binary_v", .4, .5, 0, .5, .8, true},
      {4, "base", .4, .5, .1, .5, .8, false},
      {4, "small_rho_xz_v", .4, .2, .1, .5, .8, false},
      {4, "small_beta_x", .4, .5, .1, .1, .8, false},
      {4, "negative_rho_vx", -.4, .5, .1, .5, .8, false},
      {4, "small_rho_vx", .2, .5, .1, .5, .8, false},
      {4, "large_me", .4, .5, 2, .5, .8, false},
      {4, "weak_v", .4, .5, .1, .5, .2, false},
      {4, "binary_v", .4, .5, .1, .5, .8, true},
      {5, "base", 0, .5, 0, .5, 0, false},
      {5, "small_rho_xz_v", 0, .2, 0, .5, 0, false},
      {5, "small_beta_x", 0, .5, 0, .1, 0, false},
      {5, "binary_v", 0, .5, 0, .5, 0, true},
      {6, "base", 0, .5, .1, .5, 0, false},
      {6, "small_rho_xz_v", 0, .2, .1, .5, 0, false},
      {6, "small_beta_x", 0, .5, .1, .1, 0, false},
      {6, "large_me", 0, .5, 2, .5, 0, false},
      {6, "binary_v", 0, .5, .1, .5, 0, true},
      {7, "base", .4, .5, 0, .5, 0, false},
      {7, "small_rho_xz_v", .4, .2, 0, .5, 0, false},
      {7, "small_beta_x", .4, .5, 0, .1, 0, false},
      {7, "negative_rho_vx", -.4, .5, 0, .5, 0, false},
      {7, "small_rho_vx", .2, .5, 0, .5, 0, false},
      {7, "binary_v", .4, .5, 0, .5, 0, true},
      {8, "base", .4, .5, .1, .5, 0, false},
      {8, "small_rho_xz_v", .4, .2, .1, .5, 0, false},
      {8, "small_beta_x", .4, .5, .1, .1, 0, false},
      {8, "negative_rho_vx", -.4, .5, .1, .5, 0, false},
      {8, "small_rho_vx", .2, .5, .1, .5, 0, false},
      {8, "large_me", .4, .5, 2, .5, 0, false},
      {8, "binary_v", .4, .5, .1, .5, 0, true},
  };
  return rows;
}

inline ScenarioConfig make_config(const CatalogRow& r, OutcomeFamily outcome, std::string_view size_variant) {
  ScenarioConfig c;
  c.dag = dag_from_index(r.dag);
  c.eta_v = r.eta_v;
  c.theta_x = r.theta_x;
  c.theta_v = r.theta_v;
  c.beta_x = r.beta_x;
  c.beta_v = r.beta_v;
  c.v_dist = r.binary_v ? VDist::Bernoulli : VDist::StdNormal;
  c.outcome = outcome;
  c.n_vs = 400;
  const std::size_t total = outcome == OutcomeFamily::Continuous ? 5000 : 10000;
  c.n_ms = total - c.n_vs;
  if (size_variant == "small_ms") c.n_ms = (outcome == OutcomeFamily::Continuous ? 2000 : 5000) - c.n_vs;
  if (size_variant == "small_vs") {
    c.n_vs = 150;
    c.n_ms = total - c.n_vs;
  }
  std::string variant = r.variant;
  if (!size_variant.empty()) variant = std::string(size_variant);
  c.name = "dag" + std::to_string(r.dag) + "." + variant + "." +
           (outcome == OutcomeFamily::Continuous ? "continuous" : "binary");
  c.replicates = 1000;
  c.seed = kDefaultSeed;
  return c;
}

}  // namespace detail

/// Every simulation-design row for both outcome families, plus the reduced
/// main-study and validation-study size variants of each base case. Names
/// look like "dag4.base.continuous" or "dag2.small_vs.binary".
inline std::vector<ScenarioConfig> catalog() {
  std::vector<ScenarioConfig> out;
  for (auto outcome : {OutcomeFamily::Continuous, OutcomeFamily::Binary}) {
    for (const auto& r : detail::catalog_rows()) {
      out.push_back(detail::make_config(r, outcome, ""));
      if (std::string_view(r.variant) == "base") {
        out.push_back(detail::make_config(r, outcome, "small_ms"));
        out.push_back(detail::make_config(r, outcome, "small_vs"));
      }
    }
  }
  return out;
}

inline ScenarioConfig find_scenario(std::string_view name) {
  auto all = catalog();
  for (const auto& c : all) {
    if (c.name == name) return c;
  }
  std::string msg = "unknown scenario '" + std::string(name) + "'; valid names:";
  for (const auto& c : all) msg += "\n  " + c.name;
  fail(Errc::InvalidArgument, msg);
}

inline ScenarioConfig base_case(int dag, OutcomeFamily outcome = OutcomeFamily::Continuous) {
  return find_scenario("dag" + std::to_string(dag) + ".base." +
                       (outcome == OutcomeFamily::Continuous ? "continuous" : "binary"));
}

/// Glob-free filter: a scenario matches when every dot-separated token of
/// `filter` appears among its name's tokens ("dag4", "base", "binary", ...).
inline bool matches_filter(const ScenarioConfig& c, std::string_view filter) {
  auto tokens = [](std::string_view s) {
    std::vector<std::string> t;
    std::size_t start = 0;
    while (start <= s.size()) {
      auto end = s.find('.', start);
      if (end == std::string_view::npos) end = s.size();
      if (end > start) t.emplace_back(s.substr(start, end - start));
      start = end + 1;
    }
    return t;
  };
  const auto have = tokens(c.name);
  for (const auto& want : tokens(filter)) {
    bool found = false;
    for (const auto& h : have) found = found || h == want;
    if (!found) return false;
  }
  return true;
}

}  // namespace recal
