#include <cmath>

#include <gtest/gtest.h>

#include "gvh/errors.hpp"
#include "gvh/kernel.hpp"
#include "gvh/model.hpp"
#include "gvh/simulate.hpp"
#include "gvh/time_grid.hpp"

using namespace gvh;

namespace {

double fbm_cov(double h, double t, double s) {
  return 0.5 * (std::pow(t, 2 * h) + std::pow(s, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

double max_cov_error(const DiscreteKernel& k, double h) {
  const Eigen::MatrixXd r = k.factor() * k.factor().transpose();
  const TimeGrid& g = k.grid();
  double err = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      err = std::max(err, std::abs(r(i, j) - fbm_cov(h, g[i + 1], g[j + 1])));
  return err;
}

Eigen::VectorXd indicator(Eigen::Index n, Eigen::Index k) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  f.head(k).setOnes();
  return f;
}

}  // namespace

TEST(TimeGridTest, Validation) {
  EXPECT_THROW(TimeGrid({0.0}), DomainError);
  EXPECT_THROW(TimeGrid({0.1, 0.5}), DomainError);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5}), DomainError);
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  EXPECT_DOUBLE_EQ(g.dt(1), 0.25);
  EXPECT_EQ(g.nearest_index(0.3), 1u);
  EXPECT_FALSE(g.index_of(0.3).has_value());
  EXPECT_EQ(g.coarsen(2).steps(), 2u);
  EXPECT_THROW(g.coarsen(3), DomainError);
}

TEST(BuildKernel, BrownianTwoPointHandCholesky) {
  const TimeGrid g({0.0, 0.5, 1.0});
  const DiscreteKernel k = build_kernel(NoiseModel::brownian(), g, KernelMethod::cholesky);
  const double r = std::sqrt(0.5);
  EXPECT_NEAR(k.factor()(0, 0), r, 1e-15);
  EXPECT_NEAR(k.factor()(0, 1), 0.0, 0.0);
  EXPECT_NEAR(k.factor()(1, 0), r, 1e-15);
  EXPECT_NEAR(k.factor()(1, 1), r, 1e-15);
  const DiscreteKernel a = build_kernel(NoiseModel::brownian(), g, KernelMethod::analytic);
  EXPECT_NEAR((a.factor() - k.factor()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(BuildKernel, SinglePointGrid) {
  const TimeGrid g({0.0, 0.7});
  for (const auto& m : {NoiseModel::brownian(), NoiseModel::fractional(0.75),
                        NoiseModel::mixed_fractional(0.6)}) {
    const DiscreteKernel k = build_kernel(m, g, KernelMethod::cholesky);
    ASSERT_EQ(k.dim(), 1);
    EXPECT_NEAR(k.factor()(0, 0), std::sqrt(covariance(m, 0.7, 0.7)), 1e-14);
  }
}

TEST(BuildKernel, FractionalBothRoutesOn64Grid) {
  const TimeGrid g = TimeGrid::uniform(1.0, 64);
  const auto m = NoiseModel::fractional(0.75);
  EXPECT_LE(max_cov_error(build_kernel(m, g, KernelMethod::cholesky), 0.75), 1e-10);
  EXPECT_LE(max_cov_error(build_kernel(m, g, KernelMethod::analytic), 0.75), 1e-3);
  EXPECT_EQ(build_kernel(m, g).source(), KernelSource::analytic_quadrature);
}

TEST(BuildKernel, AnalyticUnsupportedForMixed) {
  EXPECT_THROW(build_kernel(NoiseModel::mixed_fractional(0.75), TimeGrid::uniform(1.0, 4),
                            KernelMethod::analytic),
               UnsupportedKernelError);
}

TEST(BuildKernel, NotPositiveDefiniteNamesMinor) {
  // Off-diagonal larger than the diagonal: the 2x2 minor is negative and no
  // small jitter can rescue it.
  const auto bad =
      NoiseModel::custom("indefinite", [](double t, double s) { return t == s ? 1.0 : 2.0; });
  try {
    build_kernel(bad, TimeGrid::uniform(1.0, 3), KernelMethod::cholesky);
    FAIL() << "expected NotPositiveDefiniteError";
  } catch (const NotPositiveDefiniteError& e) {
    EXPECT_EQ(e.minor(), 2u);
  }
}

TEST(Kstar, BrownianIndicatorIsFixed) {
  const auto k = build_kernel(NoiseModel::brownian(), TimeGrid::uniform(1.0, 10));
  const Eigen::VectorXd f = indicator(10, 4);
  EXPECT_LE((apply_kstar(k, f) - f).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((solve_kstar(k, f) - f).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Kstar, ZeroMapsToZero) {
  const auto k = build_kernel(NoiseModel::fractional(0.75), TimeGrid::uniform(1.0, 16));
  EXPECT_EQ(apply_kstar(k, Eigen::VectorXd::Zero(16)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(solve_kstar(k, Eigen::VectorXd::Zero(9)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Kstar, FractionalInversePair) {
  const auto k = build_kernel(NoiseModel::fractional(0.75), TimeGrid::uniform(1.0, 64),
                              KernelMethod::cholesky);
  const Eigen::VectorXd f = standard_normals(7, StreamDomain::verification, 0, 64);
  EXPECT_LE((solve_kstar(k, apply_kstar(k, f)) - f).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd target = indicator(40, 17);
  const Eigen::VectorXd g = solve_kstar(k, target);
  EXPECT_LE((apply_kstar(k, g) - target).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kstar, PrefixSolveUsesLeadingBlock) {
  // A solve on the first n cells must not depend on later rows.
  const auto k = build_kernel(NoiseModel::fractional(0.6), TimeGrid::uniform(1.0, 32),
                              KernelMethod::cholesky);
  const Eigen::VectorXd f = standard_normals(3, StreamDomain::verification, 0, 12);
  const Eigen::VectorXd g = solve_kstar(k, f);
  EXPECT_EQ(g.size(), 12);
}

TEST(Innovations, BrownianAreScaledIncrements) {
  const TimeGrid g({0.0, 0.1, 0.4, 0.5, 1.0});
  const auto k = build_kernel(NoiseModel::brownian(), g, KernelMethod::cholesky);
  Eigen::VectorXd x(5);
  x << 0.0, 0.3, -0.2, 0.1, 0.9;
  const Eigen::VectorXd z = recover_innovations(k, x);
  for (Eigen::Index j = 1; j <= 4; ++j)
    EXPECT_NEAR(z[j - 1], (x[j] - x[j - 1]) / std::sqrt(g.dt(static_cast<std::size_t>(j))), 1e-13);
}

TEST(Innovations, ZeroPathAndZeroInnovations) {
  const auto k = build_kernel(NoiseModel::mixed_fractional(0.75), TimeGrid::uniform(1.0, 8));
  EXPECT_EQ(recover_innovations(k, Eigen::VectorXd::Zero(9)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(reconstruct_noise(k, Eigen::VectorXd::Zero(8)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Innovations, BrownianUnitInnovationsAccumulate) {
  const TimeGrid g({0.0, 0.25, 0.5, 1.0});
  const auto k = build_kernel(NoiseModel::brownian(), g, KernelMethod::cholesky);
  const Eigen::VectorXd x = reconstruct_noise(k, Eigen::VectorXd::Ones(3));
  EXPECT_NEAR(x[0], 0.0, 0.0);
  EXPECT_NEAR(x[1], 0.5, 1e-15);
  EXPECT_NEAR(x[2], 1.0, 1e-15);
  EXPECT_NEAR(x[3], 1.0 + std::sqrt(0.5), 1e-15);
}

TEST(Innovations, RoundTrip) {
  for (const auto& m : {NoiseModel::brownian(), NoiseModel::fractional(0.9),
                        NoiseModel::mixed_fractional(0.75)}) {
    const auto k = build_kernel(m, TimeGrid::uniform(1.0, 64), KernelMethod::cholesky);
    const Eigen::VectorXd z = standard_normals(11, StreamDomain::verification, 0, 64);
    const Eigen::VectorXd x = reconstruct_noise(k, z);
    EXPECT_LE((reconstruct_noise(k, recover_innovations(k, x)) - x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((recover_innovations(k, x) - z).cwiseAbs().maxCoeff(), 1e-9);
  }
}
