#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "recal/error.hpp"

namespace recal {

/// Which of the two models receives the covariate(s).
///   OM       : outcome model and measurement error model (MEM)
///   NoneNone : neither
///   NoneM    : MEM only
///   ONone    : outcome model only
enum class AdjustmentStrategy { OM, NoneNone, NoneM, ONone };

inline constexpr std::array<AdjustmentStrategy, 4> kAllStrategies{
    AdjustmentStrategy::OM, AdjustmentStrategy::NoneNone, AdjustmentStrategy::NoneM,
    AdjustmentStrategy::ONone};

constexpr std::string_view to_string(AdjustmentStrategy s) {
  switch (s) {
    case AdjustmentStrategy::OM: return "OM";
    case AdjustmentStrategy::NoneNone: return "NoneNone";
    case AdjustmentStrategy::NoneM: return "NoneM";
    case AdjustmentStrategy::ONone: return "ONone";
  }
  return "?";
}

constexpr bool adjusts_outcome(AdjustmentStrategy s) {
  return s == AdjustmentStrategy::OM || s == AdjustmentStrategy::ONone;
}
constexpr bool adjusts_mem(AdjustmentStrategy s) {
  return s == AdjustmentStrategy::OM || s == AdjustmentStrategy::NoneM;
}

// Accepts the long names and the dash notation ("--", "-M", "O-").
inline AdjustmentStrategy parse_strategy(std::string_view text) {
  if (text == "OM") return AdjustmentStrategy::OM;
  if (text == "NoneNone" || text == "--") return AdjustmentStrategy::NoneNone;
  if (text == "NoneM" || text == "-M") return AdjustmentStrategy::NoneM;
  if (text == "ONone" || text == "O-") return AdjustmentStrategy::ONone;
  fail(Errc::InvalidArgument, "unknown adjustment strategy '" + std::string(text) +
                                  "' (expected OM, NoneNone, NoneM or ONone)");
}

/// The eight single-covariate measurement error structures.
enum class DagId { Dag1 = 1, Dag2, Dag3, Dag4, Dag5, Dag6, Dag7, Dag8 };

constexpr int index(DagId d) { return static_cast<int>(d); }

inline DagId dag_from_index(int i) {
  if (i < 1 || i > 8) fail(Errc::InvalidArgument, "DAG id must be 1..8, got " + std::to_string(i));
  return static_cast<DagId>(i);
}

/// Covariate role V1..V8; role Vk is the covariate of DAG k.
enum class Role { V1 = 1, V2, V3, V4, V5, V6, V7, V8 };

constexpr int index(Role r) { return static_cast<int>(r); }
constexpr DagId dag_of(Role r) { return static_cast<DagId>(index(r)); }
constexpr Role role_of(DagId d) { return static_cast<Role>(index(d)); }

inline Role role_from_index(int i) {
  if (i < 1 || i > 8) fail(Errc::InvalidArgument, "role must be V1..V8, got V" + std::to_string(i));
  return static_cast<Role>(i);
}

inline std::string to_string(Role r) { return "V" + std::to_string(index(r)); }

inline Role parse_role(std::string_view text) {
  if (text.size() == 2 && (text[0] == 'V' || text[0] == 'v') && text[1] >= '1' && text[1] <= '8') {
    return static_cast<Role>(text[1] - '0');
  }
  fail(Errc::InvalidArgument, "unknown role '" + std::string(text) + "' (expected V1..V8)");
}

/// Arrow pattern of a role: does V point into X, into Z (given X), into Y (given X)?
struct RoleFlags {
  bool x = false;
  bool z = false;
  bool y = false;
  bool operator==(const RoleFlags&) const = default;
};

constexpr Role classify(RoleFlags f) {
  if (f.y) {
    if (f.x) return f.z ? Role::V4 : Role::V3;
    return f.z ? Role::V2 : Role::V1;
  }
  if (f.x) return f.z ? Role::V8 : Role::V7;
  return f.z ? Role::V6 : Role::V5;
}

constexpr RoleFlags flags_of(Role r) {
  switch (r) {
    case Role::V1: return {false, false, true};
    case Role::V2: return {false, true, true};
    case Role::V3: return {true, false, true};
    case Role::V4: return {true, true, true};
    case Role::V5: return {false, false, false};
    case Role::V6: return {false, true, false};
    case Role::V7: return {true, false, false};
    case Role::V8: return {true, true, false};
  }
  return {};
}

enum class Validity { Valid, Efficient, Biased };

constexpr std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::Valid: return "valid";
    case Validity::Efficient: return "valid (efficient)";
    case Validity::Biased: return "biased";
  }
  return "?";
}

constexpr bool is_valid(Validity v) { return v != Validity::Biased; }

/// One cell of the validity/efficiency table for linear models.
/// `depends` marks cells whose relative efficiency depends on the correlations
/// and sample sizes (the DAG 8 note).
struct TableCell {
  Validity validity = Validity::Valid;
  bool depends = false;
  bool operator==(const TableCell&) const = default;
};

constexpr TableCell validity_table(Role r, AdjustmentStrategy s) {
  using V = Validity;
  constexpr TableCell E{V::Efficient, false}, O{V::Valid, false}, B{V::Biased, false}, N{V::Valid, true};
  constexpr TableCell grid[8][4] = {
      {E, O, O, E},  // V1
      {O, B, B, B},  // V2
      {O, B, B, B},  // V3
      {O, B, B, B},  // V4
      {O, O, O, O},  // V5
      {E, O, B, B},  // V6
      {O, E, B, B},  // V7
      {N, N, B, B},  // V8
  };
  return grid[index(r) - 1][static_cast<int>(s)];
}

enum class OutcomeFamily { Continuous, Binary };

constexpr std::string_view to_string(OutcomeFamily f) {
  return f == OutcomeFamily::Continuous ? "continuous" : "binary";
}

inline OutcomeFamily parse_outcome(std::string_view text) {
  if (text == "continuous" || text == "linear") return OutcomeFamily::Continuous;
  if (text == "binary" || text == "logistic") return OutcomeFamily::Binary;
  fail(Errc::InvalidArgument, "unknown outcome family '" + std::string(text) +
                                  "' (expected continuous or binary)");
}

}  // namespace recal
