#pragma once

#include <cstddef>
#include <iosfwd>

#include <Eigen/Dense>

#include "gvh/model.hpp"
#include "gvh/time_grid.hpp"

namespace gvh {

enum class KernelSource { analytic_quadrature, numerical_cholesky };

enum class KernelMethod {
  automatic,  ///< analytic kernel when the model has one, Cholesky otherwise
  analytic,
  cholesky,
};

/// Lower-triangular grid representation of a Volterra kernel.
///
/// Row i (0-based) is the noise level X at grid time t_{i+1}; column j is the
/// unit-variance innovation on the cell (t_j, t_{j+1}]. factor()(i, j) is
/// K(t_{i+1}, .) over that cell scaled by sqrt(dm_j), so X = L zeta and the
/// fundamental martingale increments are dM_j = zeta_j sqrt(dm_j).
class DiscreteKernel {
public:
  DiscreteKernel(TimeGrid grid, Eigen::MatrixXd lower, Eigen::VectorXd bracket_increments,
                 KernelSource source, double jitter = 0.0);

  const TimeGrid& grid() const noexcept { return grid_; }
  /// Number of innovations, N = grid().steps().
  Eigen::Index dim() const noexcept { return lower_.rows(); }
  const Eigen::MatrixXd& factor() const noexcept { return lower_; }
  /// Row differences L_i - L_{i-1} (row -1 is zero); the matrix of K*.
  const Eigen::MatrixXd& increments() const noexcept { return increments_; }
  /// dm_j, the bracket mass of each cell.
  const Eigen::VectorXd& bracket_increments() const noexcept { return dm_; }
  KernelSource source() const noexcept { return source_; }
  /// Diagonal jitter that was needed for the Cholesky factorization.
  double jitter() const noexcept { return jitter_; }

  /// Discrete K(t_i, cell j) for grid index i >= j >= 1.
  double kernel_value(std::size_t i, std::size_t j) const;

private:
  TimeGrid grid_;
  Eigen::MatrixXd lower_;
  Eigen::MatrixXd increments_;
  Eigen::VectorXd dm_;
  KernelSource source_;
  double jitter_;
};

/// Covariance matrix R(t_i, t_j) for i, j = 1..N (the origin is excluded).
Eigen::MatrixXd covariance_matrix(const NoiseModel& model, const TimeGrid& grid);

/// Cholesky factor with the jitter policy: on failure add 1e-12 * max(diag)
/// to the diagonal and escalate by x10 at most three times.
DiscreteKernel cholesky_kernel(const Eigen::MatrixXd& covariance, const TimeGrid& grid);

/// Discretizes the analytic kernel: entry (i, j) is
/// sqrt( \int_{cell j} K(t_i, u)^2 dm(u) ), the root-mean-square kernel mass
/// of the cell. Requires K >= 0 (true for every analytic kernel here).
DiscreteKernel analytic_kernel_matrix(const NoiseModel& model, const TimeGrid& grid);

DiscreteKernel build_kernel(const NoiseModel& model, const TimeGrid& grid,
                            KernelMethod method = KernelMethod::automatic);

/// sup-norm of L L^T - R on the grid.
double factorization_error(const DiscreteKernel& kernel, const NoiseModel& model);

/// Cumulative squared diagonal of the kernel, tabulated on its grid.
QuadraticVariation kernel_quadratic_variation(const DiscreteKernel& kernel);

/// Discrete adjoint K*: f holds step values f_i on cells 1..n (n <= N);
/// returns (K* f)_j = sum_{i>=j} f_i [K(t_i, cell j) - K(t_{i-1}, cell j)].
Eigen::VectorXd apply_kstar(const DiscreteKernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& f);

/// Solves K* f = target by back substitution on the leading target.size()
/// block. Throws SingularKernelError on a zero pivot.
Eigen::VectorXd solve_kstar(const DiscreteKernel& kernel,
                            const Eigen::Ref<const Eigen::VectorXd>& target);

/// Solves L zeta = X. x_path holds X at grid indices 0..n (X_0 = 0 is
/// ignored); only the prefix is used, so the result has n entries.
Eigen::VectorXd recover_innovations(const DiscreteKernel& kernel,
                                    const Eigen::Ref<const Eigen::VectorXd>& x_path);

/// X = L zeta with X_0 = 0 prepended; result has N + 1 entries.
Eigen::VectorXd reconstruct_noise(const DiscreteKernel& kernel,
                                  const Eigen::Ref<const Eigen::VectorXd>& innovations);

/// Writes L and the grid covariance as long-format CSV (i, j, t_i, t_j, L, R).
void write_kernel_csv(std::ostream& out, const DiscreteKernel& kernel, const Eigen::MatrixXd& cov);

}  // namespace gvh
