#include "gvh/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "gvh/errors.hpp"

namespace gvh {

namespace detail {

void check_order(int order) {
  if (order < 2) throw ConfigError("quadrature order must be at least 2, got " + std::to_string(order));
}

}  // namespace detail

namespace {

// Orthonormal three-term recurrence x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}
// (a_k = 0 for both families here). Golub-Welsch gives the nodes; a few Newton
// steps on the recurrence polish them, and the Christoffel numbers
// w_i = 1 / sum_k p_k(x_i)^2 give weights without relying on eigenvector accuracy.
template <typename OffDiag>
GaussRule golub_welsch(int n, OffDiag offdiag, double mass) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = offdiag(k);
    jacobi(k - 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  Eigen::VectorXd x = solver.eigenvalues();

  // p_0 = 1/sqrt(mass); returns (sum p_k^2, p_n, p_n') at x.
  auto evaluate = [&](double xi, double& sum_sq, double& pn, double& dpn) {
    double p_prev = 0.0, p = 1.0 / std::sqrt(mass);
    double d_prev = 0.0, d = 0.0;
    sum_sq = p * p;
    for (int k = 0; k < n; ++k) {
      const double b_next = offdiag(k + 1);
      const double b_k = k > 0 ? offdiag(k) : 0.0;
      const double p_next = (xi * p - b_k * p_prev) / b_next;
      const double d_next = (p + xi * d - b_k * d_prev) / b_next;
      p_prev = p;
      p = p_next;
      d_prev = d;
      d = d_next;
      if (k + 1 < n) sum_sq += p * p;
    }
    pn = p;
    dpn = d;
  };

  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double xi = x[i], sum_sq = 0.0, pn = 0.0, dpn = 0.0;
    for (int it = 0; it < 3; ++it) {
      evaluate(xi, sum_sq, pn, dpn);
      if (dpn == 0.0) break;
      xi -= pn / dpn;
    }
    evaluate(xi, sum_sq, pn, dpn);
    rule.nodes[i] = xi;
    rule.weights[i] = 1.0 / sum_sq;
  }
  return rule;
}

GaussRule make_hermite(int n) {
  // Probabilists' Hermite: b_k = sqrt(k), total mass 1 under the normal density.
  return golub_welsch(n, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

GaussRule make_legendre(int n) {
  // b_k = k / sqrt(4k^2 - 1), total mass 2 on [-1, 1].
  return golub_welsch(
      n,
      [](int k) {
        const double kk = static_cast<double>(k);
        return kk / std::sqrt(4.0 * kk * kk - 1.0);
      },
      2.0);
}

template <typename Make>
const GaussRule& cached(std::map<int, std::unique_ptr<GaussRule>>& cache, std::mutex& mu, int order,
                        Make make) {
  detail::check_order(order);
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussRule>(make(order));
  return *slot;
}

}  // namespace

const GaussRule& gauss_hermite(int order) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, order, make_hermite);
}

const GaussRule& gauss_legendre(int order) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, order, make_legendre);
}

}  // namespace gvh
