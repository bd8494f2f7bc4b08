#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gvh/time_grid.hpp"

namespace gvh {

enum class NoiseKind { brownian, fractional, mixed_fractional, custom };

using CovarianceFunction = std::function<double(double, double)>;

/// Centered Gaussian noise X with X_0 = 0, described by its covariance and,
/// where one is known in closed form, its Volterra kernel K with bracket m.
///
/// Brownian motion has K = 1, m(t) = t. Fractional Brownian motion with
/// H in (1/2, 1) uses the Molchan-Golosov kernel with m(t) = t; H = 1/2 falls
/// back to the Brownian kernel. Mixed fBm and custom covariances only have a
/// numerical (Cholesky) kernel.
class NoiseModel {
public:
  static NoiseModel brownian();
  static NoiseModel fractional(double hurst);
  static NoiseModel mixed_fractional(double hurst);
  static NoiseModel custom(std::string name, CovarianceFunction covariance);

  NoiseKind kind() const noexcept { return kind_; }
  double hurst() const noexcept { return hurst_; }
  const std::string& name() const noexcept { return name_; }
  bool has_analytic_kernel() const noexcept;

  /// True when q^2 is known in closed form (every kind except custom).
  bool has_analytic_quadratic_variation() const noexcept { return kind_ != NoiseKind::custom; }

  const CovarianceFunction& covariance_function() const noexcept { return covariance_; }

private:
  NoiseModel(NoiseKind kind, double hurst, std::string name, CovarianceFunction cov)
      : kind_(kind), hurst_(hurst), name_(std::move(name)), covariance_(std::move(cov)) {}

  NoiseKind kind_;
  double hurst_;
  std::string name_;
  CovarianceFunction covariance_;
};

/// R(t, s) = E[X_t X_s].
double covariance(const NoiseModel& model, double t, double s);

/// Volterra kernel K(t, s) for 0 < s <= t. Throws UnsupportedKernelError for
/// models whose kernel is only available numerically.
double analytic_kernel(const NoiseModel& model, double t, double s);

/// Bracket m(t) of the fundamental martingale paired with analytic_kernel.
double bracket(const NoiseModel& model, double t);

/// Molchan-Golosov kernel of fBm for H in [1/2, 1).
double molchan_golosov_kernel(double hurst, double t, double s);

/// Named covariances accepted by the config schema for NoiseKind::custom.
/// Known names: "brownian_covariance" (min(t,s)), "time_changed_brownian"
/// (min(t,s)^2, a Gaussian martingale with bracket t^2).
NoiseModel named_custom_model(const std::string& name);
std::vector<std::string> named_custom_models();

/// Excess return mu(t): continuous, bounded variation, mu(0) = 0.
class Drift {
public:
  static Drift constant_rate(double rate);
  /// Knots (t, mu(t)) with t strictly increasing, first knot (0, 0).
  /// Linear between knots and flat after the last one.
  static Drift piecewise_linear(std::vector<std::pair<double, double>> knots);

  double operator()(double t) const;
  double increment(double u, double t) const { return (*this)(t) - (*this)(u); }

  bool is_constant_rate() const noexcept { return knots_.empty(); }
  double rate() const noexcept { return rate_; }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

private:
  Drift() = default;
  double rate_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

/// Discounted asset dS/S = dmu + dX on [0, T].
struct MarketModel {
  MarketModel(NoiseModel noise, double s0, Drift drift, double maturity);

  NoiseModel noise;
  double s0;
  Drift drift;
  double maturity;
};

/// Deterministic quadratic variation q^2(t) of the noise, nondecreasing,
/// q^2(0) = 0. Either closed form or tabulated on a grid (linear in between).
class QuadraticVariation {
public:
  static QuadraticVariation closed_form(std::function<double(double)> q2, double horizon);
  static QuadraticVariation tabulated(const TimeGrid& grid, std::vector<double> values);

  double operator()(double t) const;
  /// q^2(s, t) = q^2(t) - q^2(s) for s <= t.
  double increment(double s, double t) const;
  double horizon() const noexcept { return horizon_; }
  /// True when q^2 vanishes identically on [0, T].
  bool vanishes() const noexcept { return vanishes_; }

private:
  QuadraticVariation() = default;
  std::function<double(double)> closed_;
  std::vector<double> times_;
  std::vector<double> values_;
  double horizon_ = 0.0;
  bool vanishes_ = false;
};

/// Closed-form q^2 where known; otherwise the cumulative squared diagonal of
/// the Cholesky kernel on the given grid.
QuadraticVariation quadratic_variation(const NoiseModel& model, const TimeGrid& grid);

/// beta(u, t) = mu(u, t) - q^2(u, t) / 2.
double beta(const MarketModel& market, const QuadraticVariation& q2, double u, double t);

/// gamma(s, t, T) = beta(s, t) - q^2(t, T) / 2.
double gamma(const MarketModel& market, const QuadraticVariation& q2, double s, double t,
             double horizon);

}  // namespace gvh
