#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gvh {

enum class PayoffKind { call, put, identity, constant, custom };
enum class Convexity { convex, concave };

/// European payoff f(S_T) with its derivative and the points where f is not
/// smooth. Payoffs grow at most linearly so every lognormal expectation is finite.
class EuropeanPayoff {
public:
  static EuropeanPayoff call(double strike);
  static EuropeanPayoff put(double strike);
  static EuropeanPayoff identity();
  static EuropeanPayoff constant(double value);
  /// `growth` bounds |f(x)| <= growth * (1 + x).
  static EuropeanPayoff custom(std::string name, std::function<double(double)> f,
                               std::function<double(double)> derivative, Convexity convexity,
                               double growth, std::vector<double> kinks = {});

  PayoffKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double strike() const noexcept { return strike_; }
  Convexity convexity() const noexcept { return convexity_; }
  double growth_bound() const noexcept { return growth_; }
  const std::vector<double>& kinks() const noexcept { return kinks_; }

  double operator()(double x) const;
  /// f'(x); throws UndefinedDerivativeError at a kink.
  double derivative(double x) const;
  /// f'(x) away from kinks, with the right derivative at a kink. Used inside
  /// quadrature where kinks are measure-zero.
  double derivative_a_e(double x) const;
  bool has_analytic_derivative() const noexcept { return kind_ != PayoffKind::custom; }

private:
  EuropeanPayoff() = default;

  PayoffKind kind_ = PayoffKind::identity;
  std::string name_;
  double strike_ = 0.0;
  double constant_ = 0.0;
  Convexity convexity_ = Convexity::convex;
  double growth_ = 1.0;
  std::vector<double> kinks_;
  std::function<double(double)> f_;
  std::function<double(double)> df_;
};

}  // namespace gvh
