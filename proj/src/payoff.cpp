#include "gvh/payoff.hpp"

#include <algorithm>
#include <cmath>

#include "gvh/errors.hpp"

namespace gvh {

EuropeanPayoff EuropeanPayoff::call(double strike) {
  if (!(strike > 0.0)) throw ConfigError("call strike must be positive");
  EuropeanPayoff p;
  p.kind_ = PayoffKind::call;
  p.name_ = "call";
  p.strike_ = strike;
  p.kinks_ = {strike};
  return p;
}

EuropeanPayoff EuropeanPayoff::put(double strike) {
  if (!(strike > 0.0)) throw ConfigError("put strike must be positive");
  EuropeanPayoff p;
  p.kind_ = PayoffKind::put;
  p.name_ = "put";
  p.strike_ = strike;
  p.kinks_ = {strike};
  return p;
}

EuropeanPayoff EuropeanPayoff::identity() {
  EuropeanPayoff p;
  p.kind_ = PayoffKind::identity;
  p.name_ = "identity";
  return p;
}

EuropeanPayoff EuropeanPayoff::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError("constant payoff must be finite");
  EuropeanPayoff p;
  p.kind_ = PayoffKind::constant;
  p.name_ = "constant";
  p.constant_ = value;
  p.growth_ = std::abs(value);
  return p;
}

EuropeanPayoff EuropeanPayoff::custom(std::string name, std::function<double(double)> f,
                                      std::function<double(double)> derivative,
                                      Convexity convexity, double growth,
                                      std::vector<double> kinks) {
  if (!f) throw ConfigError("custom payoff needs a function");
  if (!(growth >= 0.0) || !std::isfinite(growth))
    throw ConfigError("custom payoff needs a finite linear growth bound");
  EuropeanPayoff p;
  p.kind_ = PayoffKind::custom;
  p.name_ = std::move(name);
  p.f_ = std::move(f);
  p.df_ = std::move(derivative);
  p.convexity_ = convexity;
  p.growth_ = growth;
  std::sort(kinks.begin(), kinks.end());
  p.kinks_ = std::move(kinks);
  return p;
}

double EuropeanPayoff::operator()(double x) const {
  switch (kind_) {
    case PayoffKind::call: return std::max(x - strike_, 0.0);
    case PayoffKind::put: return std::max(strike_ - x, 0.0);
    case PayoffKind::identity: return x;
    case PayoffKind::constant: return constant_;
    case PayoffKind::custom: return f_(x);
  }
  return 0.0;
}

double EuropeanPayoff::derivative_a_e(double x) const {
  switch (kind_) {
    case PayoffKind::call: return x >= strike_ ? 1.0 : 0.0;
    case PayoffKind::put: return x >= strike_ ? 0.0 : -1.0;
    case PayoffKind::identity: return 1.0;
    case PayoffKind::constant: return 0.0;
    case PayoffKind::custom:
      if (df_) return df_(x);
      {
        const double h = 1e-5 * std::max(1.0, std::abs(x));
        return (f_(x + h) - f_(x - h)) / (2.0 * h);
      }
  }
  return 0.0;
}

double EuropeanPayoff::derivative(double x) const {
  if (std::find(kinks_.begin(), kinks_.end(), x) != kinks_.end())
    throw UndefinedDerivativeError("payoff '" + name_ + "' has no derivative at its kink x = " +
                                   std::to_string(x));
  return derivative_a_e(x);
}

}  // namespace gvh
