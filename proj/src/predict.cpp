#include "gvh/predict.hpp"

#include <algorithm>
#include <cmath>

#include "gvh/errors.hpp"
#include "gvh/quadrature.hpp"

namespace gvh {

namespace {

void check_pair(const DiscreteKernel& kernel, std::size_t u, std::size_t t) {
  if (u > t) throw DomainError("prediction needs u <= t");
  if (t > static_cast<std::size_t>(kernel.dim())) throw DomainError("prediction time off the grid");
}

void check_history(const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u) {
  if (static_cast<std::size_t>(x_path.size()) <= u)
    throw DomainError("path is not observed through the conditioning time");
}

Eigen::VectorXd path_increments(const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u) {
  const auto n = static_cast<Eigen::Index>(u);
  return x_path.segment(1, n) - x_path.head(n);
}

}  // namespace

Eigen::VectorXd psi_weights(const DiscreteKernel& kernel, std::size_t t, std::size_t u) {
  check_pair(kernel, u, t);
  const auto n = static_cast<Eigen::Index>(u);
  if (n == 0 || t == u) return Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd& l = kernel.factor();
  const Eigen::VectorXd target =
      (l.row(n - 1).head(n) - l.row(static_cast<Eigen::Index>(t) - 1).head(n)).transpose().cwiseQuotient(
          kernel.bracket_increments().head(n).cwiseSqrt());
  return solve_kstar(kernel, target);
}

double conditional_mean_x(const DiscreteKernel& kernel,
                          const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u,
                          std::size_t t) {
  check_pair(kernel, u, t);
  check_history(x_path, u);
  if (u == 0) return 0.0;
  const Eigen::VectorXd psi = psi_weights(kernel, t, u);
  return x_path[static_cast<Eigen::Index>(u)] - psi.dot(path_increments(x_path, u));
}

double conditional_mean_x_innovations(const DiscreteKernel& kernel,
                                      const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                      std::size_t u, std::size_t t) {
  check_pair(kernel, u, t);
  check_history(x_path, u);
  if (u == 0) return 0.0;
  const auto n = static_cast<Eigen::Index>(u);
  const Eigen::VectorXd zeta = recover_innovations(kernel, x_path.head(n + 1));
  return kernel.factor().row(static_cast<Eigen::Index>(t) - 1).head(n).dot(zeta);
}

double conditional_cov(const DiscreteKernel& kernel, std::size_t t, std::size_t s, std::size_t u) {
  const std::size_t lo = std::min(t, s);
  if (u > lo) throw DomainError("conditional_cov needs u <= min(t, s)");
  if (std::max(t, s) > static_cast<std::size_t>(kernel.dim()))
    throw DomainError("conditional_cov index off the grid");
  if (lo == u) return 0.0;
  const auto a = static_cast<Eigen::Index>(u);
  const auto len = static_cast<Eigen::Index>(lo - u);
  const Eigen::MatrixXd& l = kernel.factor();
  return l.row(static_cast<Eigen::Index>(t) - 1)
      .segment(a, len)
      .dot(l.row(static_cast<Eigen::Index>(s) - 1).segment(a, len));
}

double rho_hat(const DiscreteKernel& kernel, std::size_t t, std::size_t u) {
  return std::sqrt(std::max(conditional_cov(kernel, t, t, u), 0.0));
}

PredictionLaw prediction_law(const DiscreteKernel& kernel,
                             const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u) {
  check_pair(kernel, u, static_cast<std::size_t>(kernel.dim()));
  check_history(x_path, u);
  const Eigen::Index size = kernel.dim() + 1;
  PredictionLaw law{u, Eigen::VectorXd(size), Eigen::MatrixXd::Zero(size, size),
                    Eigen::VectorXd::Zero(size)};
  const auto ui = static_cast<Eigen::Index>(u);
  law.mean.head(ui + 1) = x_path.head(ui + 1);
  for (Eigen::Index t = ui + 1; t < size; ++t)
    law.mean[t] = conditional_mean_x(kernel, x_path, u, static_cast<std::size_t>(t));
  for (Eigen::Index t = ui + 1; t < size; ++t)
    for (Eigen::Index s = ui + 1; s <= t; ++s) {
      const double c =
          conditional_cov(kernel, static_cast<std::size_t>(t), static_cast<std::size_t>(s), u);
      law.cov(t, s) = c;
      law.cov(s, t) = c;
    }
  law.rho_hat = law.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return law;
}

double ConditionalStep::mean_increment(const Eigen::Ref<const Eigen::VectorXd>& x_path) const {
  check_history(x_path, from);
  if (from == 0) return 0.0;
  return -psi.dot(path_increments(x_path, from));
}

ConditionalStep conditional_step(const DiscreteKernel& kernel, std::size_t u, std::size_t t) {
  return {u, t, psi_weights(kernel, t, u), rho_hat(kernel, t, u)};
}

double conditional_expectation(const MarketModel& market, const DiscreteKernel& kernel,
                               const QuadraticVariation& q2,
                               const std::function<double(double)>& f,
                               std::span<const double> kinks,
                               const Eigen::Ref<const Eigen::VectorXd>& x_path, std::size_t u,
                               std::size_t t, int order) {
  detail::check_order(order);
  check_pair(kernel, u, t);
  check_history(x_path, u);
  const TimeGrid& grid = kernel.grid();
  const double tu = grid[u];
  const double tt = grid[t];
  const double x_u = x_path[static_cast<Eigen::Index>(u)];
  const double s_u = market.s0 * std::exp(market.drift(tu) - 0.5 * q2(tu) + x_u);
  const double dx_hat = conditional_mean_x(kernel, x_path, u, t) - x_u;
  return lognormal_expectation(f, kinks, s_u, beta(market, q2, tu, tt) + dx_hat,
                               rho_hat(kernel, t, u), order);
}

double conditional_functional_expectation(const MarketModel& market, const DiscreteKernel& kernel,
                                          const QuadraticVariation& q2,
                                          const EuropeanPayoff& payoff,
                                          const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                          std::size_t u, std::size_t t, int order) {
  return conditional_expectation(
      market, kernel, q2, [&payoff](double x) { return payoff(x); }, payoff.kinks(), x_path, u, t,
      order);
}

}  // namespace gvh
