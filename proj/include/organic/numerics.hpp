#pragma once

#include <Eigen/Dense>

#include "organic/error.hpp"

namespace organic {

struct RegressionFit {
  Eigen::VectorXd coefficients;
  double dispersion = 0.0;      // residual variance (OLS); 1 for logistic
  Eigen::MatrixXd covariance;   // p x p coefficient covariance
  bool converged = true;
  int iterations = 0;
};

struct LogisticOptions {
  int max_iter = 100;
  double tol = 1e-8;
};

/// Least squares via singular value decomposition. Throws RankDeficient when
/// the smallest singular value falls below 1e-10 times the largest.
RegressionFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Logistic regression by iteratively reweighted least squares with
/// step-halving. Converged means the score norm ||X'(y - p)||_inf < tol.
/// Throws Separation when ||beta||_inf exceeds 1e4 before convergence,
/// NotConverged when max_iter runs out.
RegressionFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LogisticOptions& options = {});

double logistic_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta);

/// Score vector X'(y - p) of the logistic log-likelihood.
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta);

}  // namespace organic
