#include "gvh/kernel.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gvh/csv.hpp"
#include "gvh/errors.hpp"
#include "gvh/quadrature.hpp"

namespace gvh {

namespace {

void check_pivot(double pivot, double scale, Eigen::Index j) {
  if (!(std::abs(pivot) > 1e-14 * scale)) throw SingularKernelError(static_cast<std::size_t>(j + 1));
}

double pivot_scale(const Eigen::MatrixXd& lower) {
  const double s = lower.diagonal().cwiseAbs().maxCoeff();
  return s > 0.0 ? s : 1.0;
}

// Left-looking Cholesky. Returns the index of the failing column or -1.
Eigen::Index cholesky_in_place(const Eigen::MatrixXd& a, double jitter, Eigen::MatrixXd& l) {
  const Eigen::Index n = a.rows();
  l.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = a(j, j) + jitter - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return j;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (a.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return -1;
}

}  // namespace

DiscreteKernel::DiscreteKernel(TimeGrid grid, Eigen::MatrixXd lower,
                               Eigen::VectorXd bracket_increments, KernelSource source,
                               double jitter)
    : grid_(std::move(grid)),
      lower_(std::move(lower)),
      dm_(std::move(bracket_increments)),
      source_(source),
      jitter_(jitter) {
  const auto n = static_cast<Eigen::Index>(grid_.steps());
  if (lower_.rows() != n || lower_.cols() != n)
    throw DomainError("kernel matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (dm_.size() != n) throw DomainError("bracket increments must have one entry per cell");
  if ((dm_.array() <= 0.0).any()) throw DomainError("bracket increments must be positive");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (lower_(i, j) != 0.0) throw DomainError("kernel matrix must be lower triangular");
  increments_ = lower_;
  if (n > 1) increments_.bottomRows(n - 1) -= lower_.topRows(n - 1);
}

double DiscreteKernel::kernel_value(std::size_t i, std::size_t j) const {
  if (j < 1 || j > i || i > grid_.steps()) throw DomainError("kernel_value needs 1 <= j <= i <= N");
  const auto r = static_cast<Eigen::Index>(i - 1);
  const auto c = static_cast<Eigen::Index>(j - 1);
  return lower_(r, c) / std::sqrt(dm_[c]);
}

Eigen::MatrixXd covariance_matrix(const NoiseModel& model, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.steps());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = covariance(model, grid[i + 1], grid[j + 1]);
      r(i, j) = v;
      r(j, i) = v;
    }
  return r;
}

DiscreteKernel cholesky_kernel(const Eigen::MatrixXd& cov, const TimeGrid& grid) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n || n != static_cast<Eigen::Index>(grid.steps()))
    throw DomainError("covariance matrix does not match the grid");
  Eigen::VectorXd dm(n);
  for (Eigen::Index j = 0; j < n; ++j) dm[j] = grid.dt(static_cast<std::size_t>(j + 1));

  Eigen::MatrixXd l;
  double jitter = 0.0;
  Eigen::Index failed = cholesky_in_place(cov, jitter, l);
  const double base = 1e-12 * cov.diagonal().cwiseAbs().maxCoeff();
  for (int escalation = 0; failed >= 0 && escalation <= 3; ++escalation) {
    jitter = base * std::pow(10.0, escalation);
    failed = cholesky_in_place(cov, jitter, l);
  }
  if (failed >= 0) throw NotPositiveDefiniteError(static_cast<std::size_t>(failed + 1), jitter);
  return DiscreteKernel(grid, std::move(l), std::move(dm), KernelSource::numerical_cholesky, jitter);
}

DiscreteKernel analytic_kernel_matrix(const NoiseModel& model, const TimeGrid& grid) {
  if (!model.has_analytic_kernel())
    throw UnsupportedKernelError("model '" + model.name() +
                                 "' has no analytic Volterra kernel; use KernelMethod::cholesky");
  const auto n = static_cast<Eigen::Index>(grid.steps());
  Eigen::VectorXd dm(n);
  for (Eigen::Index j = 0; j < n; ++j)
    dm[j] = bracket(model, grid[j + 1]) - bracket(model, grid[j]);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);

  const bool constant_kernel = model.kind() == NoiseKind::brownian || model.hurst() == 0.5;
  if (constant_kernel) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = std::sqrt(dm[j]);
    return DiscreteKernel(grid, std::move(l), std::move(dm), KernelSource::analytic_quadrature);
  }

  // m(t) = t for the Molchan-Golosov kernel. Cells touching u = 0 or u = t
  // carry the kernel's endpoint singularities and go to tanh-sinh; every other
  // cell is smooth and a fixed Gauss-Legendre rule is enough.
  const double hurst = model.hurst();
  const GaussRule& gl = gauss_legendre(12);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = grid[i + 1];
    auto k2 = [&](double u) {
      if (!(u > 0.0) || u >= t) return 0.0;
      const double k = molchan_golosov_kernel(hurst, t, u);
      return k * k;
    };
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double lo = grid[j];
      const double hi = grid[j + 1];
      double mass = 0.0;
      if (j == 0 || j == i) {
        mass = ts.integrate(k2, lo, hi, 1e-10);
      } else {
        const double half = 0.5 * (hi - lo);
        const double mid = 0.5 * (hi + lo);
        for (Eigen::Index q = 0; q < gl.nodes.size(); ++q) mass += gl.weights[q] * k2(mid + half * gl.nodes[q]);
        mass *= half;
      }
      l(i, j) = std::sqrt(mass);
    }
  }
  return DiscreteKernel(grid, std::move(l), std::move(dm), KernelSource::analytic_quadrature);
}

DiscreteKernel build_kernel(const NoiseModel& model, const TimeGrid& grid, KernelMethod method) {
  if (method == KernelMethod::automatic)
    method = model.has_analytic_kernel() ? KernelMethod::analytic : KernelMethod::cholesky;
  if (method == KernelMethod::analytic) return analytic_kernel_matrix(model, grid);
  return cholesky_kernel(covariance_matrix(model, grid), grid);
}

double factorization_error(const DiscreteKernel& kernel, const NoiseModel& model) {
  const Eigen::MatrixXd& l = kernel.factor();
  const Eigen::MatrixXd llt = l * l.transpose();
  return (llt - covariance_matrix(model, kernel.grid())).cwiseAbs().maxCoeff();
}

QuadraticVariation kernel_quadratic_variation(const DiscreteKernel& kernel) {
  const Eigen::Index n = kernel.dim();
  std::vector<double> q2(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = kernel.factor()(j, j);
    q2[static_cast<std::size_t>(j) + 1] = q2[static_cast<std::size_t>(j)] + d * d;
  }
  return QuadraticVariation::tabulated(kernel.grid(), std::move(q2));
}

Eigen::VectorXd apply_kstar(const DiscreteKernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& f) {
  const Eigen::Index n = f.size();
  if (n > kernel.dim()) throw DomainError("apply_kstar: function longer than the kernel");
  Eigen::VectorXd out =
      kernel.increments().topLeftCorner(n, n).triangularView<Eigen::Lower>().transpose() * f;
  return out.cwiseQuotient(kernel.bracket_increments().head(n).cwiseSqrt());
}

Eigen::VectorXd solve_kstar(const DiscreteKernel& kernel,
                            const Eigen::Ref<const Eigen::VectorXd>& target) {
  const Eigen::Index n = target.size();
  if (n > kernel.dim()) throw DomainError("solve_kstar: target longer than the kernel");
  const double scale = pivot_scale(kernel.factor());
  for (Eigen::Index j = 0; j < n; ++j) check_pivot(kernel.increments()(j, j), scale, j);
  Eigen::VectorXd rhs = target.cwiseProduct(kernel.bracket_increments().head(n).cwiseSqrt());
  kernel.increments().topLeftCorner(n, n).triangularView<Eigen::Lower>().transpose().solveInPlace(rhs);
  return rhs;
}

Eigen::VectorXd recover_innovations(const DiscreteKernel& kernel,
                                    const Eigen::Ref<const Eigen::VectorXd>& x_path) {
  if (x_path.size() < 1 || x_path.size() > kernel.dim() + 1)
    throw DomainError("recover_innovations: path length must be in [1, N + 1]");
  const Eigen::Index n = x_path.size() - 1;
  const double scale = pivot_scale(kernel.factor());
  for (Eigen::Index j = 0; j < n; ++j) check_pivot(kernel.factor()(j, j), scale, j);
  Eigen::VectorXd zeta = x_path.tail(n);
  kernel.factor().topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(zeta);
  return zeta;
}

Eigen::VectorXd reconstruct_noise(const DiscreteKernel& kernel,
                                  const Eigen::Ref<const Eigen::VectorXd>& innovations) {
  if (innovations.size() != kernel.dim())
    throw DomainError("reconstruct_noise: expected " + std::to_string(kernel.dim()) +
                      " innovations, got " + std::to_string(innovations.size()));
  Eigen::VectorXd x(kernel.dim() + 1);
  x[0] = 0.0;
  x.tail(kernel.dim()).noalias() = kernel.factor().triangularView<Eigen::Lower>() * innovations;
  return x;
}

void write_kernel_csv(std::ostream& out, const DiscreteKernel& kernel, const Eigen::MatrixXd& cov) {
  out << "i,j,t_i,t_j,L,R\n";
  const TimeGrid& g = kernel.grid();
  for (Eigen::Index i = 0; i < kernel.dim(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      out << (i + 1) << ',' << (j + 1) << ',' << format_double(g[i + 1]) << ','
          << format_double(g[j + 1]) << ',' << format_double(kernel.factor()(i, j)) << ','
          << format_double(cov(i, j)) << '\n';
}

}  // namespace gvh
