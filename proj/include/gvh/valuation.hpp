#pragma once

#include <Eigen/Dense>

#include "gvh/model.hpp"
#include "gvh/payoff.hpp"

namespace gvh {

inline constexpr int kDefaultQuadOrder = 64;

/// E[f(x exp(-v/2 + sqrt(v) Z))]: the frictionless value with total
/// variance v = q^2(t, T) left to maturity.
double lognormal_value(const EuropeanPayoff& payoff, double x, double total_variance,
                       int order = kDefaultQuadOrder);

/// d/dx of lognormal_value. Call, put, identity and constant payoffs
/// differentiate under the integral; custom payoffs use a central difference
/// with relative step 1e-5. With zero variance this is f'(x).
double lognormal_delta(const EuropeanPayoff& payoff, double x, double total_variance,
                       int order = kDefaultQuadOrder);

/// v(t, x) of the replicating strategy. Equals f(x) when q^2(t, T) = 0.
double frictionless_value(const EuropeanPayoff& payoff, const QuadraticVariation& q2, double t,
                          double x, int order = kDefaultQuadOrder);

/// Delta hedge dv/dx(t, x).
double delta(const EuropeanPayoff& payoff, const QuadraticVariation& q2, double t, double x,
             int order = kDefaultQuadOrder);

struct ClosedForm {
  double value;
  double delta;
};

/// Zero-rate lognormal call with aggregate variance total_variance.
ClosedForm bs_closed_form(double strike, double x, double total_variance);

/// V^pi_{t_i} = v(t_i, S_{t_i}) along a price path; the last point is f(S_T).
Eigen::VectorXd hedge_value_path(const EuropeanPayoff& payoff, const QuadraticVariation& q2,
                                 const Eigen::Ref<const Eigen::VectorXd>& s_path,
                                 const TimeGrid& grid, int order = kDefaultQuadOrder);

}  // namespace gvh
