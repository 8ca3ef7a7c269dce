#pragma once

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recal/advisor.hpp"
#include "recal/error.hpp"
#include "recal/scenario.hpp"
#include "recal/types.hpp"

namespace recal::io {

/// One analysis, declared in a single YAML file:
///
///   outcome: binary            # continuous | binary
///   exposure_unit: 10          # odds ratios reported per this many units of X
///   columns:                   # CSV header names of the fixed columns
///     exposure: fiber_dr
///     surrogate: fiber_ffq
///     outcome: cvd
///   covariates:
///     - name: age
///       role: V4               # or: affects: [x, z, y]
///     - name: sleep
///       role: V2
///       available_in_validation: false
///   strategies: [NoneM]        # extra strategies to report besides the recommendation
struct AnalysisConfig {
  OutcomeFamily outcome = OutcomeFamily::Continuous;
  double exposure_unit = 1.0;
  std::string exposure_column{kExposure};
  std::string surrogate_column{kSurrogate};
  std::string outcome_column{kOutcome};
  std::vector<CovariateRole> covariates;
  std::vector<AdjustmentStrategy> strategies;
};

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& source) {
  const auto m = n.Mark();
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1);
}

[[noreturn]] inline void bad(const YAML::Node& n, const std::string& source, const std::string& what) {
  fail(Errc::SchemaError, where(n, source) + ": " + what);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& source, const std::string& key) {
  if (!n.IsScalar()) bad(n, source, "'" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(n, source, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
  }
}

inline void check_keys(const YAML::Node& map, const std::vector<std::string>& allowed, const std::string& source) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) bad(kv.first, source, "unknown key '" + key + "'");
  }
}

inline CovariateRole parse_covariate(const YAML::Node& n, const std::string& source) {
  if (!n.IsMap()) bad(n, source, "each covariate must be a mapping with at least 'name' and 'role' or 'affects'");
  check_keys(n, {"name", "role", "affects", "available_in_validation", "affected_by_x"}, source);
  if (!n["name"]) bad(n, source, "covariate is missing 'name'");
  CovariateRole r;
  r.name = scalar<std::string>(n["name"], source, "name");
  const bool has_role = static_cast<bool>(n["role"]), has_affects = static_cast<bool>(n["affects"]);
  if (has_role == has_affects) bad(n, source, "covariate '" + r.name + "' needs exactly one of 'role' or 'affects'");
  if (has_role) {
    const auto text = scalar<std::string>(n["role"], source, "role");
    Role role;
    try {
      role = parse_role(text);
    } catch (const Error& e) {
      bad(n["role"], source, e.what());
    }
    const auto f = flags_of(role);
    r.affects_x = f.x;
    r.affects_z = f.z;
    r.affects_y = f.y;
  } else {
    const auto a = n["affects"];
    if (!a.IsSequence()) bad(a, source, "'affects' must be a list drawn from [x, z, y]");
    for (const auto& item : a) {
      const auto t = scalar<std::string>(item, source, "affects");
      if (t == "x") {
        r.affects_x = true;
      } else if (t == "z") {
        r.affects_z = true;
      } else if (t == "y") {
        r.affects_y = true;
      } else {
        bad(item, source, "unknown arrow target '" + t + "' (expected x, z or y)");
      }
    }
  }
  if (n["available_in_validation"]) {
    r.available_in_validation = scalar<bool>(n["available_in_validation"], source, "available_in_validation");
  }
  if (n["affected_by_x"]) r.affected_by_x = scalar<bool>(n["affected_by_x"], source, "affected_by_x");
  return r;
}

inline YAML::Node load(std::istream& in, const std::string& source) {
  try {
    return YAML::Load(in);
  } catch (const YAML::Exception& e) {
    fail(Errc::SchemaError, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

}  // namespace detail

inline std::vector<CovariateRole> parse_covariates(const YAML::Node& node, const std::string& source) {
  std::vector<CovariateRole> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) detail::bad(node, source, "'covariates' must be a list");
  for (const auto& item : node) out.push_back(detail::parse_covariate(item, source));
  return out;
}

inline AnalysisConfig parse_analysis_config(std::istream& in, const std::string& source = "<config>") {
  const auto root = detail::load(in, source);
  AnalysisConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) detail::bad(root, source, "top level must be a mapping");
  detail::check_keys(root, {"outcome", "exposure_unit", "columns", "covariates", "strategies"}, source);
  if (root["outcome"]) {
    const auto t = detail::scalar<std::string>(root["outcome"], source, "outcome");
    try {
      cfg.outcome = parse_outcome(t);
    } catch (const Error& e) {
      detail::bad(root["outcome"], source, e.what());
    }
  }
  if (root["exposure_unit"]) {
    cfg.exposure_unit = detail::scalar<double>(root["exposure_unit"], source, "exposure_unit");
    if (!(cfg.exposure_unit > 0)) detail::bad(root["exposure_unit"], source, "'exposure_unit' must be positive");
  }
  if (const auto c = root["columns"]) {
    if (!c.IsMap()) detail::bad(c, source, "'columns' must be a mapping");
    detail::check_keys(c, {"exposure", "surrogate", "outcome"}, source);
    if (c["exposure"]) cfg.exposure_column = detail::scalar<std::string>(c["exposure"], source, "exposure");
    if (c["surrogate"]) cfg.surrogate_column = detail::scalar<std::string>(c["surrogate"], source, "surrogate");
    if (c["outcome"]) cfg.outcome_column = detail::scalar<std::string>(c["outcome"], source, "outcome");
  }
  cfg.covariates = parse_covariates(root["covariates"], source);
  if (const auto s = root["strategies"]) {
    if (!s.IsSequence()) detail::bad(s, source, "'strategies' must be a list");
    for (const auto& item : s) {
      const auto t = detail::scalar<std::string>(item, source, "strategies");
      try {
        cfg.strategies.push_back(parse_strategy(t));
      } catch (const Error& e) {
        detail::bad(item, source, e.what());
      }
    }
  }
  return cfg;
}

inline AnalysisConfig load_analysis_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::SchemaError, "cannot open '" + path + "'");
  return parse_analysis_config(in, path);
}

/// A roles file is an analysis config of which only `covariates` (and
/// optionally `outcome`) are read. An empty file yields no covariates.
inline AnalysisConfig load_roles(const std::string& path) { return load_analysis_config(path); }

// ---------------------------------------------------------------------------
// Scenario configs

inline ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<scenario>") {
  const auto root = detail::load(in, source);
  if (!root || !root.IsMap()) fail(Errc::InvalidConfig, source + ": scenario file must be a mapping");
  const auto n = root["scenario"] ? root["scenario"] : root;
  detail::check_keys(n,
                     {"name", "dag", "eta_v", "theta_x", "theta_v", "beta_x", "beta_v", "beta_xv", "logistic_intercept",
                      "noise_sd_x", "noise_sd_z", "noise_sd_y", "v_dist", "v_prob", "outcome", "n_ms", "n_vs",
                      "replicates", "seed"},
                     source);
  ScenarioConfig c;
  auto num = [&](const char* key, double& field) {
    if (n[key]) field = detail::scalar<double>(n[key], source, key);
  };
  auto count = [&](const char* key, std::size_t& field) {
    if (n[key]) field = detail::scalar<std::size_t>(n[key], source, key);
  };
  if (n["name"]) c.name = detail::scalar<std::string>(n["name"], source, "name");
  if (n["dag"]) {
    const int d = detail::scalar<int>(n["dag"], source, "dag");
    if (d < 1 || d > 8) detail::bad(n["dag"], source, "'dag' must be 1..8");
    c.dag = dag_from_index(d);
  }
  num("eta_v", c.eta_v);
  num("theta_x", c.theta_x);
  num("theta_v", c.theta_v);
  num("beta_x", c.beta_x);
  num("beta_v", c.beta_v);
  num("beta_xv", c.beta_xv);
  num("logistic_intercept", c.logistic_intercept);
  num("noise_sd_x", c.noise_sd_x);
  num("noise_sd_z", c.noise_sd_z);
  num("noise_sd_y", c.noise_sd_y);
  num("v_prob", c.v_prob);
  if (n["v_dist"]) c.v_dist = parse_vdist(detail::scalar<std::string>(n["v_dist"], source, "v_dist"));
  if (n["outcome"]) {
    try {
      c.outcome = parse_outcome(detail::scalar<std::string>(n["outcome"], source, "outcome"));
    } catch (const Error& e) {
      detail::bad(n["outcome"], source, e.what());
    }
  }
  count("n_ms", c.n_ms);
  count("n_vs", c.n_vs);
  count("replicates", c.replicates);
  if (n["seed"]) c.seed = detail::scalar<std::uint64_t>(n["seed"], source, "seed");
  c.validate();
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open '" + path + "'");
  return parse_scenario(in, path);
}

inline std::string to_yaml(const ScenarioConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "dag" << YAML::Value << index(c.dag);
  e << YAML::Key << "eta_v" << YAML::Value << c.eta_v;
  e << YAML::Key << "theta_x" << YAML::Value << c.theta_x;
  e << YAML::Key << "theta_v" << YAML::Value << c.theta_v;
  e << YAML::Key << "beta_x" << YAML::Value << c.beta_x;
  e << YAML::Key << "beta_v" << YAML::Value << c.beta_v;
  e << YAML::Key << "beta_xv" << YAML::Value << c.beta_xv;
  e << YAML::Key << "logistic_intercept" << YAML::Value << c.logistic_intercept;
  e << YAML::Key << "noise_sd_x" << YAML::Value << c.noise_sd_x;
  e << YAML::Key << "noise_sd_z" << YAML::Value << c.noise_sd_z;
  e << YAML::Key << "noise_sd_y" << YAML::Value << c.noise_sd_y;
  e << YAML::Key << "v_dist" << YAML::Value << std::string(to_string(c.v_dist));
  e << YAML::Key << "v_prob" << YAML::Value << c.v_prob;
  e << YAML::Key << "outcome" << YAML::Value << std::string(to_string(c.outcome));
  e << YAML::Key << "n_ms" << YAML::Value << c.n_ms;
  e << YAML::Key << "n_vs" << YAML::Value << c.n_vs;
  e << YAML::Key << "replicates" << YAML::Value << c.replicates;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace recal::io
