#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace recal {

enum class Errc {
  DimensionMismatch,
  RankDeficient,
  Separation,
  NonConvergence,
  NearZeroCalibrationSlope,
  ZeroSlope,
  InconsistentCorrelations,
  InvalidConfig,
  InvalidArgument,
  EmptyBin,
  ZeroDenominator,
  TooManyFailures,
  SchemaError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::Separation: return "Separation";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NearZeroCalibrationSlope: return "NearZeroCalibrationSlope";
    case Errc::ZeroSlope: return "ZeroSlope";
    case Errc::InconsistentCorrelations: return "InconsistentCorrelations";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptyBin: return "EmptyBin";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::TooManyFailures: return "TooManyFailures";
    case Errc::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the simulation harness in particular) can count and classify
/// failed replicates without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace recal
