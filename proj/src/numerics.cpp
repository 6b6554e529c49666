#include "organic/numerics.hpp"

#include <cmath>

#include "organic/stats.hpp"

namespace organic {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kSeparationThreshold = 1e4;
constexpr double kWeightFloor = 1e-10;

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw Error("InvalidArgument", "X and y row counts differ");
  if (X.rows() < X.cols()) throw Error("RankDeficient", "fewer rows than columns");
  if (!X.allFinite() || !y.allFinite()) throw Error("InvalidArgument", "non-finite design entries");
}

Eigen::VectorXd fitted_probabilities(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  return (X * beta).unaryExpr([](double eta) { return stats::sigmoid(eta); });
}

}  // namespace

RegressionFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_shapes(X, y);
  const auto n = X.rows();
  const auto p = X.cols();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(p - 1) < kRankTolerance * sv(0)) {
    throw Error("RankDeficient", "smallest singular value " + std::to_string(sv(p - 1)) +
                                     " below tolerance");
  }

  const Eigen::VectorXd beta = svd.solve(y);
  const Eigen::VectorXd residuals = y - X * beta;
  const auto dof = n - p;
  const double dispersion = dof > 0 ? residuals.squaredNorm() / static_cast<double>(dof) : 0.0;

  // cov = dispersion * (X'X)^-1 = dispersion * V S^-2 V'
  const Eigen::MatrixXd v_scaled = svd.matrixV() * sv.cwiseInverse().asDiagonal();
  RegressionFit fit;
  fit.coefficients = beta;
  fit.dispersion = dispersion;
  fit.covariance = dispersion * (v_scaled * v_scaled.transpose());
  fit.converged = true;
  fit.iterations = 0;
  return fit;
}

double logistic_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += y(i) * eta(i) - stats::softplus(eta(i));
  }
  return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta) {
  return X.transpose() * (y - fitted_probabilities(X, beta));
}

RegressionFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LogisticOptions& options) {
  check_shapes(X, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw Error("NonBinaryOutcome", "y(" + std::to_string(i) + ") = " + std::to_string(y(i)));
    }
  }
  const auto p = X.cols();
  {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(p - 1) < kRankTolerance * sv(0)) throw Error("RankDeficient", "design not full rank");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = logistic_log_likelihood(X, y, beta);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd probs = fitted_probabilities(X, beta);
    const Eigen::VectorXd score = X.transpose() * (y - probs);
    if (score.lpNorm<Eigen::Infinity>() < options.tol) {
      const Eigen::VectorXd w =
          (probs.array() * (1.0 - probs.array())).cwiseMax(kWeightFloor);
      const Eigen::MatrixXd hessian = X.transpose() * w.asDiagonal() * X;
      RegressionFit fit;
      fit.coefficients = beta;
      fit.dispersion = 1.0;
      fit.covariance = hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
      fit.converged = true;
      fit.iterations = iter - 1;
      return fit;
    }

    const Eigen::VectorXd w = (probs.array() * (1.0 - probs.array())).cwiseMax(kWeightFloor);
    const Eigen::MatrixXd hessian = X.transpose() * w.asDiagonal() * X;
    const Eigen::VectorXd delta = hessian.ldlt().solve(score);
    if (!delta.allFinite()) throw Error("RankDeficient", "singular weighted normal equations");

    // step-halving keeps the log-likelihood non-decreasing
    double step = 1.0;
    Eigen::VectorXd candidate = beta + delta;
    double candidate_ll = logistic_log_likelihood(X, y, candidate);
    while (candidate_ll < ll && step > 1e-10) {
      step *= 0.5;
      candidate = beta + step * delta;
      candidate_ll = logistic_log_likelihood(X, y, candidate);
    }
    beta = candidate;
    ll = candidate_ll;

    if (beta.lpNorm<Eigen::Infinity>() > kSeparationThreshold) {
      throw Error("Separation", "coefficient norm exceeded " + std::to_string(kSeparationThreshold));
    }
  }
  throw Error("NotConverged", "IRLS did not reach tolerance in " +
                                  std::to_string(options.max_iter) + " iterations");
}

}  // namespace organic
