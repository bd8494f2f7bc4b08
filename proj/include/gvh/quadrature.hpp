#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gvh {

/// Nodes and weights of an n-point Gaussian rule.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Hermite rule for the standard normal density: sum_i w_i g(x_i)
/// approximates E[g(Z)], Z ~ N(0, 1). Weights sum to one. Rules are cached.
const GaussRule& gauss_hermite(int order);

/// Gauss-Legendre rule on [-1, 1] (weights sum to 2). Rules are cached.
const GaussRule& gauss_legendre(int order);

/// Half-width of the truncated domain used when an integrand has kinks.
inline constexpr double kNormalTruncation = 10.0;

namespace detail {
void check_order(int order);
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace detail

/// E[g(Z)] for Z ~ N(0, 1).
///
/// Smooth integrands use Gauss-Hermite of the given order. When g has kinks
/// (points where it or its derivative jumps) inside the truncated domain,
/// the domain [-10, 10] is split at the kinks and every piece gets its own
/// Gauss-Legendre rule of the same order against the normal density.
template <typename F>
double normal_expectation(F&& g, std::span<const double> kinks, int order) {
  detail::check_order(order);
  std::vector<double> cuts;
  for (double k : kinks)
    if (std::isfinite(k) && k > -kNormalTruncation && k < kNormalTruncation) cuts.push_back(k);

  if (cuts.empty()) {
    const GaussRule& rule = gauss_hermite(order);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(rule.nodes[i]);
    return acc;
  }

  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.insert(cuts.begin(), -kNormalTruncation);
  cuts.push_back(kNormalTruncation);

  const GaussRule& rule = gauss_legendre(order);
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = cuts[p + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double piece = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      const double z = mid + half * rule.nodes[i];
      piece += rule.weights[i] * g(z) * std::exp(-0.5 * z * z);
    }
    acc += half * piece;
  }
  return acc * detail::kInvSqrt2Pi;
}

/// E[f(x exp(drift + sd Z))]. kinks_x are the points where f is not smooth;
/// they are mapped to z-space before splitting. sd == 0 evaluates f directly.
template <typename F>
double lognormal_expectation(F&& f, std::span<const double> kinks_x, double x, double drift,
                             double sd, int order) {
  if (sd == 0.0) return f(x * std::exp(drift));
  std::vector<double> kz;
  kz.reserve(kinks_x.size());
  for (double k : kinks_x)
    if (k > 0.0) kz.push_back((std::log(k / x) - drift) / sd);
  return normal_expectation([&](double z) { return f(x * std::exp(drift + sd * z)); }, kz, order);
}

}  // namespace gvh
