#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recal/error.hpp"

namespace recal {

// Column names with a fixed meaning. Everything else in a frame is a covariate.
inline constexpr std::string_view kExposure = "x";
inline constexpr std::string_view kSurrogate = "z";
inline constexpr std::string_view kOutcome = "y";

/// Minimal column store: named, equal-length columns of doubles.
class Frame {
 public:
  Frame() = default;

  void add(std::string name, std::vector<double> values) {
    if (has(name)) fail(Errc::SchemaError, "duplicate column '" + name + "'");
    if (!names_.empty() && values.size() != rows_) {
      fail(Errc::DimensionMismatch, "column '" + name + "' has " + std::to_string(values.size()) +
                                        " rows, expected " + std::to_string(rows_));
    }
    rows_ = values.size();
    names_.push_back(std::move(name));
    cols_.push_back(std::move(values));
  }

  bool has(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  std::span<const double> col(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(Errc::SchemaError, "missing column '" + std::string(name) + "'");
    return cols_[static_cast<std::size_t>(it - names_.begin())];
  }

  std::vector<double>& mutable_col(std::string_view name) {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(Errc::SchemaError, "missing column '" + std::string(name) + "'");
    return cols_[static_cast<std::size_t>(it - names_.begin())];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  /// Covariate columns: everything except x, z, y.
  std::vector<std::string> covariates() const {
    std::vector<std::string> out;
    for (const auto& n : names_) {
      if (n != kExposure && n != kSurrogate && n != kOutcome) out.push_back(n);
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
  std::size_t rows_ = 0;
};

/// Main study carries (z, y, covariates); validation study carries (x, z, covariates).
struct Dataset {
  Frame main;
  Frame validation;

  void check() const {
    if (!main.has(kSurrogate) || !validation.has(kSurrogate)) {
      fail(Errc::SchemaError, "surrogate column 'z' must be present in both samples");
    }
    if (!main.has(kOutcome)) fail(Errc::SchemaError, "main study lacks outcome column 'y'");
    if (main.has(kExposure)) fail(Errc::SchemaError, "main study must not carry the true exposure 'x'");
    if (!validation.has(kExposure)) fail(Errc::SchemaError, "validation study lacks exposure column 'x'");
    if (validation.has(kOutcome)) fail(Errc::SchemaError, "validation study must not carry the outcome 'y'");
  }
};

}  // namespace recal
