#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "recal/advisor.hpp"
#include "recal/scenario.hpp"

using namespace recal;

namespace {

using S = AdjustmentStrategy;
constexpr char E = 'E', O = 'O', B = 'B', N = 'N';

// Literal transcription of the validity/efficiency table, columns OM, NoneNone, NoneM, ONone.
const char kTable[8][4] = {
    {E, O, O, E}, {O, B, B, B}, {O, B, B, B}, {O, B, B, B},
    {O, O, O, O}, {E, O, B, B}, {O, E, B, B}, {N, N, B, B},
};

char code(TableCell c) {
  if (c.depends) return N;
  switch (c.validity) {
    case Validity::Efficient: return E;
    case Validity::Valid: return O;
    case Validity::Biased: return B;
  }
  return '?';
}

bool has_warning(const Advice& a, const std::string& needle) {
  return std::any_of(a.warnings.begin(), a.warnings.end(),
                     [&](const std::string& w) { return w.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Table, AllThirtyTwoCells) {
  for (int r = 1; r <= 8; ++r) {
    for (auto s : kAllStrategies) {
      EXPECT_EQ(code(validity_table(role_from_index(r), s)), kTable[r - 1][static_cast<int>(s)])
          << "V" << r << " " << to_string(s);
    }
  }
}

TEST(Classify, AllArrowPatterns) {
  for (int r = 1; r <= 8; ++r) {
    const Role role = role_from_index(r);
    EXPECT_EQ(classify(flags_of(role)), role);
    EXPECT_EQ(classify(CovariateRole::of("c", role)), role);
  }
  EXPECT_EQ(classify(RoleFlags{true, true, true}), Role::V4);
  EXPECT_EQ(classify(RoleFlags{false, false, true}), Role::V1);
  EXPECT_EQ(classify(RoleFlags{true, false, false}), Role::V7);
}

TEST(Advise, FiberExample) {
  // age affects everything; marital status only the outcome; sunscreen use only exposure.
  auto a = advise({CovariateRole::of("age", Role::V4), CovariateRole::of("marital", Role::V1),
                   CovariateRole::of("sunscreen", Role::V7)});
  EXPECT_EQ(a.minimal_set, std::vector<std::string>{"age"});
  EXPECT_EQ(a.at("age").recommended, S::OM);
  EXPECT_EQ(a.at("marital").recommended, S::ONone);
  EXPECT_EQ(a.at("sunscreen").recommended, S::NoneNone);
  EXPECT_EQ(a.outcome_covariates(), (std::vector<std::string>{"age", "marital"}));
  EXPECT_EQ(a.mem_covariates(), std::vector<std::string>{"age"});
  EXPECT_EQ(label_for(a.outcome_covariates(), a.mem_covariates()), S::OM);
  EXPECT_TRUE(a.warnings.empty());
}

TEST(Advise, EmptyInput) {
  auto a = advise({});
  EXPECT_TRUE(a.minimal_set.empty());
  EXPECT_TRUE(a.covariates.empty());
  EXPECT_EQ(label_for(a.outcome_covariates(), a.mem_covariates()), S::NoneNone);
}

TEST(Advise, ConfounderMissingFromValidation) {
  auto a = advise({CovariateRole::of("sleep", Role::V2, false)});
  EXPECT_EQ(a.at("sleep").recommended, S::ONone);
  EXPECT_EQ(a.minimal_set, std::vector<std::string>{"sleep"});
  EXPECT_TRUE(has_warning(a, "not available in the validation study"));
}

TEST(Advise, ErrorOnlyDeterminantMissingFromValidation) {
  auto a = advise({CovariateRole::of("device", Role::V6, false)});
  EXPECT_EQ(a.at("device").recommended, S::NoneNone);
  auto b = advise({CovariateRole::of("device", Role::V6)});
  EXPECT_EQ(b.at("device").recommended, S::OM);
}

TEST(Advise, RecommendationIsNeverBiased) {
  for (int r = 1; r <= 8; ++r) {
    auto a = advise({CovariateRole::of("c", role_from_index(r))});
    EXPECT_TRUE(is_valid(a.at("c").cells[static_cast<int>(a.at("c").recommended)].validity)) << r;
  }
}

TEST(Advise, Dag8CarriesDependsWarning) {
  auto a = advise({CovariateRole::of("c", Role::V8)});
  EXPECT_EQ(a.at("c").recommended, S::NoneNone);
  EXPECT_TRUE(has_warning(a, "rho_vx"));
}

TEST(Advise, BinaryCaveat) {
  EXPECT_TRUE(has_warning(advise({CovariateRole::of("c", Role::V7)}, OutcomeFamily::Binary), "non-collapsible"));
  EXPECT_FALSE(has_warning(advise({CovariateRole::of("c", Role::V4)}, OutcomeFamily::Binary), "non-collapsible"));
  EXPECT_FALSE(has_warning(advise({CovariateRole::of("c", Role::V7)}), "non-collapsible"));
}

TEST(Advise, OrderAndDuplicateInvariance) {
  std::vector<CovariateRole> roles;
  for (int r = 1; r <= 8; ++r) roles.push_back(CovariateRole::of("c" + std::to_string(r), role_from_index(r)));
  auto ref = advise(roles);
  std::mt19937 g(3);
  for (int k = 0; k < 20; ++k) {
    auto shuffled = roles;
    shuffled.push_back(roles[static_cast<std::size_t>(k % 8)]);
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    auto a = advise(shuffled);
    EXPECT_EQ(a.minimal_set, ref.minimal_set);
    EXPECT_EQ(a.covariates.size(), 8u);
    for (const auto& c : ref.covariates) EXPECT_EQ(a.at(c.name).recommended, c.recommended);
  }
}

TEST(Advise, ConflictingDuplicateRejected) {
  EXPECT_THROW(advise({CovariateRole::of("c", Role::V1), CovariateRole::of("c", Role::V7)}), Error);
}

TEST(Advise, MediatorRejected) {
  auto r = CovariateRole::of("m", Role::V1);
  r.affected_by_x = true;
  EXPECT_THROW(advise({r}), Error);
}

TEST(Quantify, UnrelatedCovariateHasUnitEfficiency) {
  auto a = quantify({CovariateRole::of("c", Role::V5)}, {});
  ASSERT_TRUE(a.at("c").are.has_value());
  for (double x : *a.at("c").are) EXPECT_EQ(x, 1.0);
}

TEST(Quantify, Dag8FollowsAnalyticEfficiency) {
  auto large = implied_correlations(find_scenario("dag8.large_me.continuous"));
  large.n_ms = 5000;
  auto a = quantify({CovariateRole::of("c", Role::V8)}, {{"c", large}});
  EXPECT_EQ(a.at("c").recommended, S::OM);  // ARE(NoneNone) ≈ 0.52
  EXPECT_FALSE(has_warning(a, "rho_vx"));

  auto base = implied_correlations(base_case(8));
  base.n_ms = 5000;
  auto b = quantify({CovariateRole::of("c", Role::V8)}, {{"c", base}});
  EXPECT_EQ(b.at("c").recommended, S::NoneNone);  // ARE(NoneNone) ≈ 1.29
  EXPECT_NEAR((*b.at("c").are)[static_cast<int>(S::NoneNone)], are(base, S::NoneNone), 1e-15);
}

TEST(Quantify, BinaryRejected) {
  EXPECT_THROW(quantify({CovariateRole::of("c", Role::V1)}, {}, OutcomeFamily::Binary), Error);
}
