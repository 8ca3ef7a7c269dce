#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recal/analytic.hpp"
#include "recal/error.hpp"
#include "recal/types.hpp"

namespace recal {

/// A user-declared covariate role. Arrows are asserted from subject-matter
/// knowledge, not tested from data.
struct CovariateRole {
  std::string name;
  bool affects_x = false;
  bool affects_z = false;  // given X
  bool affects_y = false;  // given X
  bool available_in_validation = true;
  bool affected_by_x = false;  // mediator-type structures are rejected

  static CovariateRole of(std::string name, Role r, bool available = true) {
    const auto f = flags_of(r);
    return {std::move(name), f.x, f.z, f.y, available, false};
  }
};

inline Role classify(const CovariateRole& r) { return classify(RoleFlags{r.affects_x, r.affects_z, r.affects_y}); }

struct CovariateAdvice {
  std::string name;
  Role role = Role::V5;
  AdjustmentStrategy recommended = AdjustmentStrategy::NoneNone;
  std::string rationale;
  std::array<TableCell, 4> cells{};            // indexed by AdjustmentStrategy
  std::optional<std::array<double, 4>> are;    // filled by quantify()
  bool available_in_validation = true;

  bool in_outcome() const { return adjusts_outcome(recommended); }
  bool in_mem() const { return adjusts_mem(recommended); }
};

struct Advice {
  std::vector<std::string> minimal_set;
  std::vector<CovariateAdvice> covariates;
  std::vector<std::string> warnings;
  OutcomeFamily outcome = OutcomeFamily::Continuous;

  std::vector<std::string> outcome_covariates() const {
    std::vector<std::string> out;
    for (const auto& c : covariates) {
      if (c.in_outcome()) out.push_back(c.name);
    }
    return out;
  }
  std::vector<std::string> mem_covariates() const {
    std::vector<std::string> out;
    for (const auto& c : covariates) {
      if (c.in_mem()) out.push_back(c.name);
    }
    return out;
  }
  const CovariateAdvice& at(const std::string& name) const {
    for (const auto& c : covariates) {
      if (c.name == name) return c;
    }
    fail(Errc::InvalidArgument, "no advice for covariate '" + name + "'");
  }
};

/// Strategy label for a pair of covariate sets.
inline AdjustmentStrategy label_for(const std::vector<std::string>& outcome, const std::vector<std::string>& mem) {
  if (!outcome.empty()) return mem.empty() ? AdjustmentStrategy::ONone : AdjustmentStrategy::OM;
  return mem.empty() ? AdjustmentStrategy::NoneNone : AdjustmentStrategy::NoneM;
}

inline const char* kFallbackWarning =
    "is in the minimal adjustment set but is not available in the validation study; it should still be "
    "adjusted for at least in the outcome model only, provided it is not strongly correlated with the "
    "measurement error. The resulting estimate may be biased.";

inline const char* kDependsWarning =
    "relative efficiency of OM versus NoneNone depends on the strength and direction of rho_vx, rho_xz|v, "
    "rho_vz|x and rho_xy|v and on the main and validation sample sizes; NoneNone is recommended by default "
    "because efficiency gains from adjusting require a covariate that is very weakly related to the exposure "
    "and strongly related to the measurement error. Supply population parameters to quantify.";

inline const char* kBinaryCaveat =
    "efficiency labels are derived for linear outcome models. With a logistic outcome the odds ratio is "
    "non-collapsible: estimators adjusting the outcome model (OM, ONone) and those that do not (NoneNone, NoneM) "
    "target different parameters, and efficiency comparisons do not carry over.";

namespace detail {

inline CovariateAdvice advise_one(const CovariateRole& r, OutcomeFamily outcome, std::vector<std::string>& warnings) {
  CovariateAdvice a;
  a.name = r.name;
  a.role = classify(r);
  a.available_in_validation = r.available_in_validation;
  for (auto s : kAllStrategies) a.cells[static_cast<std::size_t>(s)] = validity_table(a.role, s);
  const bool linear = outcome == OutcomeFamily::Continuous;
  switch (a.role) {
    case Role::V2:
    case Role::V3:
    case Role::V4:
      if (r.available_in_validation) {
        a.recommended = AdjustmentStrategy::OM;
        a.rationale = "member of the minimal adjustment set; must enter both the outcome model and the MEM, "
                      "every other placement is biased";
      } else {
        a.recommended = AdjustmentStrategy::ONone;
        a.rationale = "member of the minimal adjustment set but missing from the validation study; "
                      "adjusted in the outcome model only as a fallback (biased)";
        warnings.push_back(r.name + " " + kFallbackWarning);
      }
      break;
    case Role::V1:
      a.recommended = AdjustmentStrategy::ONone;
      a.rationale = linear ? "outcome risk factor independent of exposure and measurement error; all placements "
                             "are valid and including it in the outcome model (OM or ONone) is most efficient"
                           : "outcome risk factor independent of exposure and measurement error; all placements "
                             "are valid, outcome-model inclusion suggested but no efficiency gain is guaranteed "
                             "for a logistic outcome";
      break;
    case Role::V5:
      a.recommended = AdjustmentStrategy::NoneNone;
      a.rationale = "unrelated to exposure, measurement error and outcome; every placement is valid with equal "
                    "efficiency, left out";
      break;
    case Role::V6:
      if (r.available_in_validation) {
        a.recommended = AdjustmentStrategy::OM;
        a.rationale = "determinant of measurement error only; OM and NoneNone are valid and OM is most efficient";
      } else {
        a.recommended = AdjustmentStrategy::NoneNone;
        a.rationale = "determinant of measurement error only and missing from the validation study; "
                      "left out (NoneNone is valid, single-model placements are biased)";
      }
      break;
    case Role::V7:
      a.recommended = AdjustmentStrategy::NoneNone;
      a.rationale = "related to the exposure but not a risk factor; NoneNone is valid and most efficient, "
                    "single-model placements are biased";
      break;
    case Role::V8:
      a.recommended = AdjustmentStrategy::NoneNone;
      a.rationale = "related to exposure and measurement error but not a risk factor; OM and NoneNone are valid";
      warnings.push_back(r.name + ": " + kDependsWarning);
      break;
  }
  return a;
}

}  // namespace detail

/// Per-covariate placement following the validity table and the practical
/// guidance for incomplete validation data.
inline Advice advise(const std::vector<CovariateRole>& roles, OutcomeFamily outcome = OutcomeFamily::Continuous) {
  std::vector<CovariateRole> unique;
  for (const auto& r : roles) {
    if (r.name.empty()) fail(Errc::InvalidArgument, "covariate name must not be empty");
    if (r.affected_by_x) {
      fail(Errc::InvalidArgument, "covariate '" + r.name +
                                      "' is declared as affected by the exposure (mediator-type structure); "
                                      "such structures are out of scope");
    }
    auto it = std::find_if(unique.begin(), unique.end(), [&](const CovariateRole& u) { return u.name == r.name; });
    if (it == unique.end()) {
      unique.push_back(r);
    } else if (classify(*it) != classify(r) || it->available_in_validation != r.available_in_validation) {
      fail(Errc::InvalidArgument, "covariate '" + r.name + "' declared twice with conflicting roles");
    }
  }

  Advice adv;
  adv.outcome = outcome;
  bool any_efficiency_claim = false;
  for (const auto& r : unique) {
    adv.covariates.push_back(detail::advise_one(r, outcome, adv.warnings));
    const Role role = adv.covariates.back().role;
    if (role == Role::V2 || role == Role::V3 || role == Role::V4) adv.minimal_set.push_back(r.name);
    if (role == Role::V1 || role == Role::V6 || role == Role::V7 || role == Role::V8) any_efficiency_claim = true;
  }
  std::sort(adv.minimal_set.begin(), adv.minimal_set.end());
  if (outcome == OutcomeFamily::Binary && any_efficiency_claim) adv.warnings.emplace_back(kBinaryCaveat);
  return adv;
}

/// Replaces qualitative efficiency flags with analytic AREs for covariates
/// that have population parameters. For V8 the recommendation follows the
/// computed ARE(NoneNone). Continuous outcomes only.
inline Advice quantify(const std::vector<CovariateRole>& roles, const std::map<std::string, PopulationParams>& params,
                       OutcomeFamily outcome = OutcomeFamily::Continuous) {
  if (outcome != OutcomeFamily::Continuous) {
    fail(Errc::InvalidArgument, "analytic AREs are available for continuous outcomes only");
  }
  Advice adv = advise(roles, outcome);
  for (auto& c : adv.covariates) {
    std::array<double, 4> a{};
    if (c.role == Role::V5) {
      a.fill(1.0);
      c.are = a;
      continue;
    }
    auto it = params.find(c.name);
    if (it == params.end()) continue;
    for (auto s : kAllStrategies) a[static_cast<std::size_t>(s)] = are(it->second, s);
    c.are = a;
    if (c.role == Role::V8) {
      const double nn = a[static_cast<std::size_t>(AdjustmentStrategy::NoneNone)];
      c.recommended = nn >= 1.0 ? AdjustmentStrategy::NoneNone : AdjustmentStrategy::OM;
      c.rationale = "related to exposure and measurement error but not a risk factor; analytic ARE(NoneNone) = " +
                    std::to_string(nn) + (nn >= 1.0 ? ", leaving it out is more efficient" : ", adjusting in both models is more efficient");
      const std::string prefix = c.name + ": ";
      adv.warnings.erase(std::remove_if(adv.warnings.begin(), adv.warnings.end(),
                                        [&](const std::string& w) { return w.rfind(prefix, 0) == 0 && w.find("rho_vx") != std::string::npos; }),
                         adv.warnings.end());
    }
  }
  return adv;
}

}  // namespace recal
