#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recal/error.hpp"
#include "recal/frame.hpp"

namespace recal {

enum class Family { Linear, Logistic };

inline constexpr std::string_view kIntercept = "(Intercept)";

/// Design matrix with an intercept in column 0 and named columns.
struct Design {
  Eigen::MatrixXd X;
  std::vector<std::string> terms;
};

inline Design make_design(const Frame& frame, const std::vector<std::string>& regressors) {
  for (std::size_t i = 0; i < regressors.size(); ++i) {
    for (std::size_t j = i + 1; j < regressors.size(); ++j) {
      if (regressors[i] == regressors[j]) fail(Errc::InvalidArgument, "regressor '" + regressors[i] + "' listed twice");
    }
  }
  const auto n = static_cast<Eigen::Index>(frame.rows());
  Design d;
  d.X.resize(n, static_cast<Eigen::Index>(regressors.size() + 1));
  d.X.col(0).setOnes();
  d.terms.emplace_back(kIntercept);
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    auto c = frame.col(regressors[j]);
    d.X.col(static_cast<Eigen::Index>(j + 1)) = Eigen::Map<const Eigen::VectorXd>(c.data(), n);
    d.terms.push_back(regressors[j]);
  }
  return d;
}

inline Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct ModelFit {
  std::vector<std::string> terms;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd cov;
  double residual_variance = 0.0;  // linear fits only
  std::size_t n_obs = 0;
  bool converged = true;           // meaningful for logistic fits
  int iterations = 0;
  Family family = Family::Linear;

  Eigen::Index index(std::string_view term) const {
    auto it = std::find(terms.begin(), terms.end(), term);
    if (it == terms.end()) fail(Errc::InvalidArgument, "model has no term '" + std::string(term) + "'");
    return static_cast<Eigen::Index>(it - terms.begin());
  }
  double coef(std::string_view term) const { return coefficients(index(term)); }
  double var(std::string_view term) const {
    auto i = index(term);
    return cov(i, i);
  }
  double se(std::string_view term) const { return std::sqrt(var(term)); }
};

namespace detail {

inline void check_shape(Eigen::Index n, const Eigen::MatrixXd& X, const std::vector<std::string>& terms) {
  if (X.rows() != n) {
    fail(Errc::DimensionMismatch, "response has " + std::to_string(n) + " rows, design has " + std::to_string(X.rows()));
  }
  if (!terms.empty() && static_cast<Eigen::Index>(terms.size()) != X.cols()) {
    fail(Errc::DimensionMismatch, "term names do not match design columns");
  }
  if (X.rows() <= X.cols()) {
    fail(Errc::DimensionMismatch, "need more rows (" + std::to_string(X.rows()) + ") than columns (" +
                                      std::to_string(X.cols()) + ")");
  }
}

inline std::vector<std::string> default_terms(const Eigen::MatrixXd& X, std::vector<std::string> terms) {
  if (!terms.empty()) return terms;
  for (Eigen::Index j = 0; j < X.cols(); ++j) terms.push_back(j == 0 ? std::string(kIntercept) : "x" + std::to_string(j));
  return terms;
}

// (AᵀA)⁻¹ from a column-pivoted QR of A: P R⁻¹ R⁻ᵀ Pᵀ.
inline Eigen::MatrixXd inverse_gram(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
  const Eigen::Index p = qr.cols();
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  Eigen::MatrixXd out = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  return 0.5 * (out + out.transpose());
}

inline Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factor(const Eigen::MatrixXd& A) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.rows(), A.cols());
  qr.setThreshold(1e-10);
  qr.compute(A);
  if (qr.rank() < A.cols()) {
    fail(Errc::RankDeficient, "design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(A.cols()) +
                                  " columns");
  }
  return qr;
}

}  // namespace detail

/// Ordinary least squares via Householder QR with column pivoting.
inline ModelFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::vector<std::string> terms = {}) {
  detail::check_shape(y.size(), X, terms);
  auto qr = detail::factor(X);
  ModelFit fit;
  fit.family = Family::Linear;
  fit.terms = detail::default_terms(X, std::move(terms));
  fit.coefficients = qr.solve(y);
  const Eigen::VectorXd r = y - X * fit.coefficients;
  const auto n = X.rows(), p = X.cols();
  fit.n_obs = static_cast<std::size_t>(n);
  fit.residual_variance = r.squaredNorm() / static_cast<double>(n - p);
  fit.cov = fit.residual_variance * detail::inverse_gram(qr);
  return fit;
}

inline ModelFit fit_ols(const Eigen::VectorXd& y, const Design& d) { return fit_ols(y, d.X, d.terms); }

/// Logistic regression by iteratively reweighted least squares from zero.
inline ModelFit fit_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::vector<std::string> terms = {},
                             int max_iter = 100, double tol = 1e-9) {
  detail::check_shape(y.size(), X, terms);
  std::size_t ones = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) {
      ++ones;
    } else if (y(i) != 0.0) {
      fail(Errc::InvalidArgument, "logistic response must be 0/1, row " + std::to_string(i + 1) + " is " +
                                      std::to_string(y(i)));
    }
  }
  if (ones == 0 || ones == static_cast<std::size_t>(y.size())) {
    fail(Errc::Separation, "logistic response has a single class");
  }

  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu(n), w(n);
  auto update_weights = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = X * b;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    return eta;
  };

  ModelFit fit;
  fit.family = Family::Logistic;
  fit.terms = detail::default_terms(X, std::move(terms));
  fit.n_obs = static_cast<std::size_t>(n);
  fit.converged = false;

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd eta = update_weights(beta);
    if (w.maxCoeff() < 1e-300) fail(Errc::Separation, "IRLS weights collapsed");
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd A = sw.asDiagonal() * X;
    const Eigen::VectorXd zw = sw.cwiseProduct(eta) + (y - mu).cwiseQuotient(sw);
    auto qr = detail::factor(A);
    const Eigen::VectorXd next = qr.solve(zw);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 30.0) {
      fail(Errc::Separation, "coefficients diverge (|beta| > 30), likely quasi-complete separation");
    }
    const double step = (next - beta).cwiseAbs().maxCoeff();
    const double scale = next.cwiseAbs().maxCoeff();
    beta = next;
    fit.iterations = it;
    if (step == 0.0 || step < tol * scale) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) fail(Errc::NonConvergence, "IRLS did not converge in " + std::to_string(max_iter) + " iterations");

  update_weights(beta);
  const Eigen::MatrixXd A = w.cwiseSqrt().asDiagonal() * X;
  fit.coefficients = beta;
  fit.cov = detail::inverse_gram(detail::factor(A));
  return fit;
}

inline ModelFit fit_logistic(const Eigen::VectorXd& y, const Design& d) { return fit_logistic(y, d.X, d.terms); }

inline ModelFit fit(Family family, const Eigen::VectorXd& y, const Design& d) {
  return family == Family::Linear ? fit_ols(y, d) : fit_logistic(y, d);
}

/// Gradient of the Bernoulli log-likelihood, Xᵀ(y − μ).
inline Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd r(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) r(i) = y(i) - 1.0 / (1.0 + std::exp(-eta(i)));
  return X.transpose() * r;
}

}  // namespace recal
