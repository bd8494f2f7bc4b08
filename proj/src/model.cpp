#include "gvh/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/special_functions/beta.hpp>

#include "gvh/errors.hpp"
#include "gvh/kernel.hpp"

namespace gvh {

namespace {

double fbm_covariance(double hurst, double t, double s) {
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

void require_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw DomainError(std::string(what) + " must be a finite nonnegative time");
}

}  // namespace

NoiseModel NoiseModel::brownian() {
  return NoiseModel(NoiseKind::brownian, 0.5, "brownian",
                    [](double t, double s) { return std::min(t, s); });
}

NoiseModel NoiseModel::fractional(double hurst) {
  if (!(hurst >= 0.5 && hurst < 1.0))
    throw ModelError("fractional Brownian motion requires H in [1/2, 1), got " +
                     std::to_string(hurst));
  return NoiseModel(NoiseKind::fractional, hurst, "fbm",
                    [hurst](double t, double s) { return fbm_covariance(hurst, t, s); });
}

NoiseModel NoiseModel::mixed_fractional(double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw ModelError("mixed fractional Brownian motion requires H in (1/2, 1), got " +
                     std::to_string(hurst));
  return NoiseModel(NoiseKind::mixed_fractional, hurst, "mixed_fbm", [hurst](double t, double s) {
    return std::min(t, s) + fbm_covariance(hurst, t, s);
  });
}

NoiseModel NoiseModel::custom(std::string name, CovarianceFunction covariance) {
  if (!covariance) throw ModelError("custom noise model needs a covariance function");
  return NoiseModel(NoiseKind::custom, 0.0, std::move(name), std::move(covariance));
}

bool NoiseModel::has_analytic_kernel() const noexcept {
  return kind_ == NoiseKind::brownian || kind_ == NoiseKind::fractional;
}

double covariance(const NoiseModel& model, double t, double s) {
  require_time(t, "t");
  require_time(s, "s");
  return model.covariance_function()(t, s);
}

double molchan_golosov_kernel(double hurst, double t, double s) {
  if (!(s > 0.0) || !(s <= t)) throw DomainError("kernel needs 0 < s <= t");
  if (hurst == 0.5) return 1.0;
  if (s == t) return 0.0;
  const double a = hurst - 0.5;
  // c_H s^{-a} \int_s^t (u-s)^{a-1} u^a du. With x = s/u and one integration
  // by parts the integral is s^{2a} [a B_c(2-2H, a; z) + z^{-2a} (1-z)^a] / (2a),
  // z = s/t, where B_c is the upper incomplete beta function.
  const double norm = std::sqrt(hurst * (2.0 * hurst - 1.0) / std::beta(2.0 - 2.0 * hurst, a));
  const double z = s / t;
  const double j = (a * boost::math::betac(2.0 - 2.0 * hurst, a, z) +
                    std::pow(z, -2.0 * a) * std::pow(1.0 - z, a)) /
                   (2.0 * a);
  return norm * std::pow(s, a) * j;
}

double analytic_kernel(const NoiseModel& model, double t, double s) {
  switch (model.kind()) {
    case NoiseKind::brownian:
      if (!(s > 0.0) || !(s <= t)) throw DomainError("kernel needs 0 < s <= t");
      return 1.0;
    case NoiseKind::fractional:
      return molchan_golosov_kernel(model.hurst(), t, s);
    default:
      throw UnsupportedKernelError("model '" + model.name() +
                                   "' has no analytic Volterra kernel; use the numerical "
                                   "Cholesky kernel (KernelMethod::cholesky)");
  }
}

double bracket(const NoiseModel& model, double t) {
  if (!model.has_analytic_kernel())
    throw UnsupportedKernelError("model '" + model.name() + "' has no analytic bracket");
  require_time(t, "t");
  return t;
}

NoiseModel named_custom_model(const std::string& name) {
  if (name == "brownian_covariance")
    return NoiseModel::custom(name, [](double t, double s) { return std::min(t, s); });
  if (name == "time_changed_brownian")
    return NoiseModel::custom(name, [](double t, double s) {
      const double m = std::min(t, s);
      return m * m;
    });
  throw ModelError("unknown custom covariance '" + name + "'");
}

std::vector<std::string> named_custom_models() {
  return {"brownian_covariance", "time_changed_brownian"};
}

// --- Drift -----------------------------------------------------------------

Drift Drift::constant_rate(double rate) {
  if (!std::isfinite(rate)) throw ModelError("drift rate must be finite");
  Drift d;
  d.rate_ = rate;
  return d;
}

Drift Drift::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw ModelError("piecewise-linear drift needs at least one knot");
  if (knots.front().first != 0.0 || knots.front().second != 0.0)
    throw ModelError("piecewise-linear drift must start at knot (0, 0)");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first))
      throw ModelError("drift knot times must be strictly increasing");
    if (!std::isfinite(knots[i].second)) throw ModelError("drift knot values must be finite");
  }
  Drift d;
  d.knots_ = std::move(knots);
  return d;
}

double Drift::operator()(double t) const {
  if (knots_.empty()) return rate_ * t;
  if (t <= 0.0) return 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  if (it == knots_.end()) return knots_.back().second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

MarketModel::MarketModel(NoiseModel noise_, double s0_, Drift drift_, double maturity_)
    : noise(std::move(noise_)), s0(s0_), drift(std::move(drift_)), maturity(maturity_) {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw ModelError("S0 must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ModelError("maturity must be positive");
}

// --- Quadratic variation ----------------------------------------------------

QuadraticVariation QuadraticVariation::closed_form(std::function<double(double)> q2,
                                                   double horizon) {
  QuadraticVariation qv;
  qv.closed_ = std::move(q2);
  qv.horizon_ = horizon;
  qv.vanishes_ = qv.closed_(horizon) == 0.0;
  return qv;
}

QuadraticVariation QuadraticVariation::tabulated(const TimeGrid& grid, std::vector<double> values) {
  if (values.size() != grid.size()) throw DomainError("q^2 table must match the grid size");
  if (values.front() != 0.0) throw DomainError("q^2(0) must be 0");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1]) throw DomainError("q^2 must be nondecreasing");
  QuadraticVariation qv;
  qv.times_.assign(grid.points().begin(), grid.points().end());
  qv.values_ = std::move(values);
  qv.horizon_ = grid.horizon();
  qv.vanishes_ = qv.values_.back() == 0.0;
  return qv;
}

double QuadraticVariation::operator()(double t) const {
  if (closed_) return closed_(t);
  if (t <= 0.0) return 0.0;
  if (t >= times_.back()) return values_.back();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto hi = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[hi - 1]) / (times_[hi] - times_[hi - 1]);
  return values_[hi - 1] + w * (values_[hi] - values_[hi - 1]);
}

double QuadraticVariation::increment(double s, double t) const {
  if (s > t) throw DomainError("q^2(s, t) needs s <= t");
  return (*this)(t) - (*this)(s);
}

QuadraticVariation quadratic_variation(const NoiseModel& model, const TimeGrid& grid) {
  switch (model.kind()) {
    case NoiseKind::brownian:
    case NoiseKind::mixed_fractional:
      return QuadraticVariation::closed_form([](double t) { return t; }, grid.horizon());
    case NoiseKind::fractional:
      if (model.hurst() == 0.5)
        return QuadraticVariation::closed_form([](double t) { return t; }, grid.horizon());
      return QuadraticVariation::closed_form([](double) { return 0.0; }, grid.horizon());
    case NoiseKind::custom:
      break;
  }
  return kernel_quadratic_variation(build_kernel(model, grid, KernelMethod::cholesky));
}

double beta(const MarketModel& market, const QuadraticVariation& q2, double u, double t) {
  if (u > t) throw DomainError("beta(u, t) needs u <= t");
  return market.drift.increment(u, t) - 0.5 * q2.increment(u, t);
}

double gamma(const MarketModel& market, const QuadraticVariation& q2, double s, double t,
             double horizon) {
  if (s > t || t > horizon) throw DomainError("gamma(s, t, T) needs s <= t <= T");
  return beta(market, q2, s, t) - 0.5 * q2.increment(t, horizon);
}

}  // namespace gvh
