#include "gvh/valuation.hpp"

#include <cmath>

#include "gvh/errors.hpp"
#include "gvh/quadrature.hpp"

namespace gvh {

namespace {

double normal_cdf(double d) { return 0.5 * std::erfc(-d / std::sqrt(2.0)); }

void require_positive_price(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("price must be positive and finite");
}

}  // namespace

double lognormal_value(const EuropeanPayoff& payoff, double x, double total_variance, int order) {
  require_positive_price(x);
  if (total_variance < 0.0) throw DomainError("total variance must be nonnegative");
  if (total_variance == 0.0) return payoff(x);
  const double sd = std::sqrt(total_variance);
  return lognormal_expectation([&](double y) { return payoff(y); }, payoff.kinks(), x,
                               -0.5 * total_variance, sd, order);
}

double lognormal_delta(const EuropeanPayoff& payoff, double x, double total_variance, int order) {
  require_positive_price(x);
  if (total_variance < 0.0) throw DomainError("total variance must be nonnegative");
  if (total_variance == 0.0) return payoff.derivative(x);
  if (!payoff.has_analytic_derivative()) {
    const double h = 1e-5 * x;
    return (lognormal_value(payoff, x + h, total_variance, order) -
            lognormal_value(payoff, x - h, total_variance, order)) /
           (2.0 * h);
  }
  // d/dx E[f(x G)] = E[f'(x G) G] with G = exp(-v/2 + sd Z).
  const double sd = std::sqrt(total_variance);
  return lognormal_expectation([&](double y) { return payoff.derivative_a_e(y) * (y / x); },
                               payoff.kinks(), x, -0.5 * total_variance, sd, order);
}

double frictionless_value(const EuropeanPayoff& payoff, const QuadraticVariation& q2, double t,
                          double x, int order) {
  if (t > q2.horizon()) throw DomainError("valuation time beyond maturity");
  return lognormal_value(payoff, x, q2.increment(t, q2.horizon()), order);
}

double delta(const EuropeanPayoff& payoff, const QuadraticVariation& q2, double t, double x,
             int order) {
  if (t > q2.horizon()) throw DomainError("valuation time beyond maturity");
  return lognormal_delta(payoff, x, q2.increment(t, q2.horizon()), order);
}

ClosedForm bs_closed_form(double strike, double x, double total_variance) {
  if (!(strike > 0.0)) throw DomainError("strike must be positive");
  require_positive_price(x);
  if (total_variance < 0.0) throw DomainError("total variance must be nonnegative");
  if (total_variance == 0.0) return {std::max(x - strike, 0.0), x > strike ? 1.0 : 0.0};
  const double sd = std::sqrt(total_variance);
  const double d1 = (std::log(x / strike) + 0.5 * total_variance) / sd;
  const double d2 = d1 - sd;
  return {x * normal_cdf(d1) - strike * normal_cdf(d2), normal_cdf(d1)};
}

Eigen::VectorXd hedge_value_path(const EuropeanPayoff& payoff, const QuadraticVariation& q2,
                                 const Eigen::Ref<const Eigen::VectorXd>& s_path,
                                 const TimeGrid& grid, int order) {
  if (static_cast<std::size_t>(s_path.size()) != grid.size())
    throw DomainError("hedge_value_path: path does not match the grid");
  Eigen::VectorXd v(s_path.size());
  const Eigen::Index last = s_path.size() - 1;
  for (Eigen::Index i = 0; i < last; ++i)
    v[i] = frictionless_value(payoff, q2, grid[static_cast<std::size_t>(i)], s_path[i], order);
  v[last] = payoff(s_path[last]);
  return v;
}

}  // namespace gvh
