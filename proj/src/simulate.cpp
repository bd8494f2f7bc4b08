#include "gvh/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gvh/errors.hpp"
#include "gvh/parallel.hpp"

namespace gvh {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, StreamDomain domain, std::uint64_t index) {
  const std::uint64_t keyed = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(domain)));
  return splitmix64(keyed + splitmix64(index));
}

Eigen::VectorXd standard_normals(std::uint64_t master, StreamDomain domain, std::uint64_t index,
                                 Eigen::Index n) {
  std::mt19937_64 engine(stream_seed(master, domain, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(engine);
  return z;
}

Eigen::VectorXd asset_path(const MarketModel& market, const QuadraticVariation& q2,
                           const TimeGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& x_path) {
  if (static_cast<std::size_t>(x_path.size()) > grid.size())
    throw DomainError("asset_path: path longer than the grid");
  Eigen::VectorXd s(x_path.size());
  for (Eigen::Index i = 0; i < x_path.size(); ++i) {
    const double t = grid[static_cast<std::size_t>(i)];
    s[i] = market.s0 * std::exp(market.drift(t) - 0.5 * q2(t) + x_path[i]);
  }
  return s;
}

PathSet simulate_paths(const MarketModel& market, const DiscreteKernel& kernel,
                       const QuadraticVariation& q2, std::size_t n_paths, std::uint64_t seed,
                       const SimulationOptions& options) {
  if (n_paths < 1) throw DomainError("simulate_paths needs at least one path");
  const TimeGrid& grid = kernel.grid();
  const Eigen::Index cols = kernel.dim() + 1;
  const auto rows = static_cast<Eigen::Index>(n_paths);
  PathSet set{grid, PathMatrix(rows, cols), PathMatrix(rows, cols), seed};

  parallel_for(n_paths, options.threads, [&](std::size_t p) {
    Eigen::VectorXd zeta = options.zero_innovations
                               ? Eigen::VectorXd::Zero(kernel.dim())
                               : standard_normals(seed, StreamDomain::paths, p, kernel.dim());
    const Eigen::VectorXd x = reconstruct_noise(kernel, zeta);
    const auto r = static_cast<Eigen::Index>(p);
    set.x.row(r) = x.transpose();
    set.s.row(r) = asset_path(market, q2, grid, x).transpose();
  });
  return set;
}

PathSet simulate_paths(const MarketModel& market, const DiscreteKernel& kernel, std::size_t n_paths,
                       std::uint64_t seed, const SimulationOptions& options) {
  return simulate_paths(market, kernel, quadratic_variation(market.noise, kernel.grid()), n_paths,
                        seed, options);
}

double realized_qv(const Eigen::Ref<const Eigen::VectorXd>& path, const TimeGrid& grid) {
  if (static_cast<std::size_t>(path.size()) != grid.size())
    throw DomainError("realized_qv: path does not match the grid");
  const Eigen::Index n = path.size() - 1;
  return (path.tail(n) - path.head(n)).squaredNorm();
}

Eigen::VectorXd subsample(const Eigen::Ref<const Eigen::VectorXd>& path, std::size_t stride) {
  const auto step = static_cast<Eigen::Index>(stride);
  if (step < 1 || (path.size() - 1) % step != 0)
    throw DomainError("subsample: stride must divide the number of steps");
  const Eigen::Index m = (path.size() - 1) / step + 1;
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) out[i] = path[i * step];
  return out;
}

PathMatrix conditional_simulate(const DiscreteKernel& kernel,
                                const Eigen::Ref<const Eigen::VectorXd>& history,
                                std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  if (history.size() < 1 || history.size() > kernel.dim() + 1)
    throw DomainError("conditional_simulate: history length must be in [1, N + 1]");
  const Eigen::Index observed = history.size() - 1;
  const Eigen::Index fresh = kernel.dim() - observed;
  const Eigen::VectorXd known = recover_innovations(kernel, history);

  PathMatrix out(static_cast<Eigen::Index>(n_paths), kernel.dim() + 1);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    Eigen::VectorXd zeta(kernel.dim());
    zeta.head(observed) = known;
    if (fresh > 0) zeta.tail(fresh) = standard_normals(seed, StreamDomain::continuations, p, fresh);
    Eigen::VectorXd x = reconstruct_noise(kernel, zeta);
    // The observed prefix is data, not a recomputation.
    x.head(history.size()) = history;
    out.row(static_cast<Eigen::Index>(p)) = x.transpose();
  });
  return out;
}

ArbitrageCheck simple_arbitrage_check(const Eigen::Ref<const Eigen::VectorXd>& s_path,
                                      std::size_t s_index, std::size_t t_index) {
  if (!(s_index < t_index) || t_index >= static_cast<std::size_t>(s_path.size()))
    throw DomainError("simple_arbitrage_check needs s_index < t_index < path length");
  const auto s = static_cast<Eigen::Index>(s_index);
  const auto t = static_cast<Eigen::Index>(t_index);
  const double level = s_path[s];
  double rhs = 0.0;
  for (Eigen::Index k = s; k < t; ++k)
    if (s_path[k] >= level) rhs += s_path[k + 1] - s_path[k];
  return {std::max(s_path[t] - level, 0.0), rhs};
}

}  // namespace gvh
