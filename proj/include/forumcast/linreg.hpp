#pragma once

// Ordinary least squares with rank diagnostics, shared by the stationarity
// screens and the forecasting models.

#include <Eigen/Dense>

#include "core.hpp"

namespace forumcast::linreg {

struct OlsFit {
  Eigen::VectorXd coef;       // zero entries for pivoted-out columns
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  int rank = 0;
  bool rank_deficient = false;
};

// Rank-revealing least squares via column-pivoted Householder QR. Exactly
// dependent columns receive zero coefficients.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size() || X.rows() == 0) {
    throw ComputationError("regression design/response size mismatch");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  OlsFit fit;
  fit.coef = qr.solve(y);
  fit.rank = static_cast<int>(qr.rank());
  fit.rank_deficient = fit.rank < X.cols();
  fit.residuals = y - X * fit.coef;
  fit.ssr = fit.residuals.squaredNorm();
  return fit;
}

// Heteroskedasticity-naive standard errors: sqrt(s2 * diag((X'X)^-1)) with
// s2 = SSR/(n - rank). Requires a full-rank design.
inline Eigen::VectorXd ols_standard_errors(const Eigen::MatrixXd& X,
                                           const OlsFit& fit) {
  const auto n = X.rows();
  const auto k = X.cols();
  if (fit.rank_deficient) {
    throw ComputationError("standard errors need a full-rank design");
  }
  if (n <= k) throw ComputationError("no residual degrees of freedom");
  const double s2 = fit.ssr / static_cast<double>(n - k);
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(
          Eigen::MatrixXd::Identity(k, k));
  return (s2 * xtx_inv.diagonal().array()).sqrt();
}

// Gaussian BIC with the n*ln(ssr/n) + k*ln(n) convention (k counts every
// estimated regression coefficient, intercept included).
inline double bic_gaussian(double ssr, int n, int k) {
  const double s2 = std::max(ssr / static_cast<double>(n), 1e-300);
  return static_cast<double>(n) * std::log(s2) +
         static_cast<double>(k) * std::log(static_cast<double>(n));
}

}  // namespace forumcast::linreg
