#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "gvh/kernel.hpp"
#include "gvh/model.hpp"
#include "gvh/payoff.hpp"

namespace gvh {

// All indices below are grid indices 0..N; u is the conditioning time.

/// Prediction weights Psi(t, . | u) on cells 1..u, solving
/// K* Psi = K(u, .) - K(t, .) on [0, u). With this sign the conditional mean
/// is X_u - sum_j Psi_j dX_j.
Eigen::VectorXd psi_weights(const DiscreteKernel& kernel, std::size_t t, std::size_t u);

/// E[X_t | F_u] through the prediction weights: X_u - sum_{j<=u} Psi_j dX_j.
double conditional_mean_x(const DiscreteKernel& kernel,
                          const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u,
                          std::size_t t);

/// E[X_t | F_u] through the fundamental martingale: sum_{j<=u} L[t][j] zeta_j.
double conditional_mean_x_innovations(const DiscreteKernel& kernel,
                                      const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                      std::size_t u, std::size_t t);

/// Cov[X_t, X_s | F_u] = sum_{u<j<=min(t,s)} L[t][j] L[s][j], i.e. the grid
/// covariance L L^T minus the part already revealed by time u.
double conditional_cov(const DiscreteKernel& kernel, std::size_t t, std::size_t s, std::size_t u);

/// sqrt of the conditional variance of X_t given F_u.
double rho_hat(const DiscreteKernel& kernel, std::size_t t, std::size_t u);

/// Conditional law of the whole path after u.
struct PredictionLaw {
  std::size_t u_index;
  Eigen::VectorXd mean;     ///< X_t for t <= u, conditional mean after
  Eigen::MatrixXd cov;      ///< conditional covariance on grid indices 0..N
  Eigen::VectorXd rho_hat;  ///< sqrt of the diagonal of cov
};

PredictionLaw prediction_law(const DiscreteKernel& kernel,
                             const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u);

/// One-step prediction data for a fixed pair (u, t), independent of the path.
struct ConditionalStep {
  std::size_t from;
  std::size_t to;
  Eigen::VectorXd psi;
  double rho_hat;

  /// dX_hat_t(u) = E[X_t | F_u] - X_u = -sum_j Psi_j dX_j.
  double mean_increment(const Eigen::Ref<const Eigen::VectorXd>& x_path) const;
};

ConditionalStep conditional_step(const DiscreteKernel& kernel, std::size_t u, std::size_t t);

/// E[f(S_t) | F_u] = E[f(S_u exp(beta(u,t) + dX_hat + rho_hat Z))] by
/// Gauss-Hermite quadrature, splitting at the given kinks of f.
double conditional_expectation(const MarketModel& market, const DiscreteKernel& kernel,
                               const QuadraticVariation& q2,
                               const std::function<double(double)>& f,
                               std::span<const double> kinks,
                               const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u,
                               std::size_t t, int order);

double conditional_functional_expectation(const MarketModel& market, const DiscreteKernel& kernel,
                                          const QuadraticVariation& q2,
                                          const EuropeanPayoff& payoff,
                                          const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                          std::size_t u, std::size_t t, int order);

}  // namespace gvh
