#include <cmath>

#include <gtest/gtest.h>

#include "gvh/errors.hpp"
#include "gvh/kernel.hpp"
#include "gvh/predict.hpp"
#include "gvh/simulate.hpp"

using namespace gvh;

namespace {

MarketModel market(NoiseModel m, double rate) {
  return MarketModel(std::move(m), 100.0, Drift::constant_rate(rate), 1.0);
}

struct Fixture {
  explicit Fixture(NoiseModel m, std::size_t n = 32, double rate = 0.0, std::uint64_t seed = 1)
      : mk(market(std::move(m), rate)),
        grid(TimeGrid::uniform(1.0, n)),
        kernel(build_kernel(mk.noise, grid, KernelMethod::cholesky)),
        q2(quadratic_variation(mk.noise, grid)),
        x(simulate_paths(mk, kernel, q2, 1, seed).x.row(0).transpose()) {}
  MarketModel mk;
  TimeGrid grid;
  DiscreteKernel kernel;
  QuadraticVariation q2;
  Eigen::VectorXd x;
};

}  // namespace

TEST(PsiWeights, BrownianAndDiagonalVanish) {
  Fixture bm(NoiseModel::brownian());
  EXPECT_LE(psi_weights(bm.kernel, 30, 10).cwiseAbs().maxCoeff(), 1e-14);
  Fixture fb(NoiseModel::fractional(0.75));
  EXPECT_EQ(psi_weights(fb.kernel, 12, 12).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PsiWeights, ForwardResidual) {
  Fixture fb(NoiseModel::fractional(0.75), 64);
  const std::size_t u = 20, t = 50;
  const Eigen::VectorXd psi = psi_weights(fb.kernel, t, u);
  const Eigen::MatrixXd& l = fb.kernel.factor();
  const Eigen::VectorXd target = (l.row(u - 1).head(u) - l.row(t - 1).head(u)).transpose().cwiseQuotient(
      fb.kernel.bracket_increments().head(u).cwiseSqrt());
  EXPECT_LE((apply_kstar(fb.kernel, psi) - target).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ConditionalMean, BrownianPredictsItself) {
  Fixture bm(NoiseModel::brownian());
  EXPECT_NEAR(conditional_mean_x(bm.kernel, bm.x, 9, 27), bm.x[9], 1e-13);
}

TEST(ConditionalMean, NoHistoryIsZero) {
  Fixture fb(NoiseModel::fractional(0.75));
  EXPECT_EQ(conditional_mean_x(fb.kernel, fb.x, 0, 20), 0.0);
  EXPECT_EQ(conditional_mean_x_innovations(fb.kernel, fb.x, 0, 20), 0.0);
}

TEST(ConditionalMean, TwoRoutesAgree) {
  for (const auto& m : {NoiseModel::brownian(), NoiseModel::fractional(0.75),
                        NoiseModel::mixed_fractional(0.75)}) {
    Fixture f(m, 64, 0.0, 5);
    double err = 0.0;
    for (std::size_t u = 1; u < 64; u += 3)
      for (std::size_t t = u; t <= 64; ++t)
        err = std::max(err, std::abs(conditional_mean_x(f.kernel, f.x, u, t) -
                                     conditional_mean_x_innovations(f.kernel, f.x, u, t)));
    EXPECT_LE(err, 1e-10);
  }
}

TEST(ConditionalMean, MatchesContinuationMonteCarlo) {
  Fixture fb(NoiseModel::fractional(0.75), 32, 0.0, 13);
  const std::size_t u = 16;
  const PathMatrix c = conditional_simulate(fb.kernel, fb.x.head(u + 1), 10000, 31);
  const Eigen::VectorXd xt = c.col(32);
  const double mean = xt.mean();
  const double var = (xt.array() - mean).square().sum() / 9999.0;
  const double v = conditional_cov(fb.kernel, 32, 32, u);
  EXPECT_LE(std::abs(mean - conditional_mean_x(fb.kernel, fb.x, u, 32)), 3.0 * std::sqrt(v / 1e4));
  EXPECT_LE(std::abs(var - v), 3.0 * v * std::sqrt(2.0 / 9999.0));
}

TEST(ConditionalCov, Examples) {
  Fixture fb(NoiseModel::fractional(0.75));
  const double r = covariance(fb.mk.noise, fb.grid[10], fb.grid[25]);
  EXPECT_NEAR(conditional_cov(fb.kernel, 10, 25, 0), r, 1e-12);
  EXPECT_EQ(conditional_cov(fb.kernel, 7, 7, 7), 0.0);

  Fixture bm(NoiseModel::brownian());
  EXPECT_NEAR(conditional_cov(bm.kernel, 20, 28, 8), bm.grid[20] - bm.grid[8], 1e-13);
  EXPECT_THROW(conditional_cov(bm.kernel, 5, 20, 8), DomainError);
}

TEST(PredictionLawTest, ObservedPrefixAndSymmetry) {
  Fixture fb(NoiseModel::mixed_fractional(0.75), 16);
  const PredictionLaw law = prediction_law(fb.kernel, fb.x, 6);
  EXPECT_EQ(law.mean.head(7), fb.x.head(7));
  EXPECT_EQ(law.cov.topLeftCorner(7, 17).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((law.cov - law.cov.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(law.rho_hat[16], rho_hat(fb.kernel, 16, 6), 1e-15);
}

TEST(FunctionalExpectation, ConstantIsOne) {
  Fixture fb(NoiseModel::fractional(0.75));
  const double one = conditional_expectation(fb.mk, fb.kernel, fb.q2, [](double) { return 1.0; }, {},
                                             fb.x, 10, 30, 32);
  EXPECT_NEAR(one, 1.0, 1e-13);
}

TEST(FunctionalExpectation, BrownianPriceIsMartingale) {
  Fixture bm(NoiseModel::brownian());
  const double su = 100.0 * std::exp(-0.5 * bm.grid[12] + bm.x[12]);
  const double e = conditional_functional_expectation(bm.mk, bm.kernel, bm.q2, EuropeanPayoff::identity(),
                                                      bm.x, 12, 32, 64);
  EXPECT_NEAR(e, su, 1e-10 * su);
}

TEST(FunctionalExpectation, CallMatchesMonteCarlo) {
  Fixture fb(NoiseModel::fractional(0.75), 32, 0.0, 17);
  const std::size_t u = 16;
  const auto call = EuropeanPayoff::call(100.0);
  const double quad = conditional_functional_expectation(fb.mk, fb.kernel, fb.q2, call, fb.x, u, 32, 64);
  const PathMatrix c = conditional_simulate(fb.kernel, fb.x.head(u + 1), 10000, 99);
  Eigen::VectorXd f(10000);
  for (Eigen::Index p = 0; p < 10000; ++p) f[p] = call(100.0 * std::exp(c(p, 32)));
  const double mean = f.mean();
  const double se = std::sqrt((f.array() - mean).square().sum() / 9999.0 / 1e4);
  EXPECT_LE(std::abs(mean - quad), 3.0 * se);
}

TEST(ConditionalStepTest, MeanIncrementMatchesDirectRoute) {
  Fixture fb(NoiseModel::fractional(0.75), 32, 0.0, 3);
  const ConditionalStep st = conditional_step(fb.kernel, 11, 19);
  EXPECT_NEAR(st.mean_increment(fb.x), conditional_mean_x(fb.kernel, fb.x, 11, 19) - fb.x[11], 1e-14);
  EXPECT_NEAR(st.rho_hat, rho_hat(fb.kernel, 19, 11), 0.0);
}
