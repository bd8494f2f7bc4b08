#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "gvh/kernel.hpp"
#include "gvh/model.hpp"

namespace gvh {

using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Stream domains keep independent uses of one master seed apart.
enum class StreamDomain : std::uint64_t { paths = 1, continuations = 2, verification = 3 };

/// Seed of stream (domain, index) derived from the master seed by SplitMix64
/// hashing, so every path owns its generator regardless of scheduling.
std::uint64_t stream_seed(std::uint64_t master, StreamDomain domain, std::uint64_t index);

/// n standard normal draws from stream (domain, index).
Eigen::VectorXd standard_normals(std::uint64_t master, StreamDomain domain, std::uint64_t index,
                                 Eigen::Index n);

/// Sample paths on a grid. Row p holds path p at grid indices 0..N.
struct PathSet {
  TimeGrid grid;
  PathMatrix x;  ///< noise X
  PathMatrix s;  ///< asset S
  std::uint64_t seed = 0;

  std::size_t n_paths() const noexcept { return static_cast<std::size_t>(x.rows()); }
};

struct SimulationOptions {
  unsigned threads = 1;
  /// Test hook: force every innovation to zero.
  bool zero_innovations = false;
};

/// S_t = S0 exp(mu(t) - q^2(t)/2 + X_t) along a noise path.
Eigen::VectorXd asset_path(const MarketModel& market, const QuadraticVariation& q2,
                           const TimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& x_path);

PathSet simulate_paths(const MarketModel& market, const DiscreteKernel& kernel,
                       const QuadraticVariation& q2, std::size_t n_paths, std::uint64_t seed,
                       const SimulationOptions& options = {});

/// Uses the model's own quadratic variation.
PathSet simulate_paths(const MarketModel& market, const DiscreteKernel& kernel, std::size_t n_paths,
                       std::uint64_t seed, const SimulationOptions& options = {});

/// Sum of squared increments of a path over the whole grid.
double realized_qv(const Eigen::Ref<const Eigen::VectorXd>& path, const TimeGrid& grid);

/// Every stride-th value of a path (an exact sample of the same path on the
/// coarsened grid).
Eigen::VectorXd subsample(const Eigen::Ref<const Eigen::VectorXd>& path, std::size_t stride);

/// Continuations of a noise path observed on grid indices 0..u, where
/// u = history.size() - 1. Innovations 1..u are recovered from the history,
/// the rest are fresh draws; rows are full paths on 0..N whose prefix
/// reproduces the history.
PathMatrix conditional_simulate(const DiscreteKernel& kernel,
                                const Eigen::Ref<const Eigen::VectorXd>& history,
                                std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

struct ArbitrageCheck {
  double lhs;  ///< (S_t - S_s)^+
  double rhs;  ///< forward Riemann sum of 1{S_u >= S_s} dS_u over [s, t]
};

/// Compares the two sides of the buy-when-expensive identity on one path.
ArbitrageCheck simple_arbitrage_check(const Eigen::Ref<const Eigen::VectorXd>& s_path,
                                      std::size_t s_index, std::size_t t_index);

}  // namespace gvh
