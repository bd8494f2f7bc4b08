#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gvh {

/// Strictly increasing time points 0 = t_0 < t_1 < ... < t_N = T.
///
/// Grid index 0 is the origin, where every noise path is pinned to zero.
/// Innovation j (1-based) lives on the cell (t_{j-1}, t_j].
class TimeGrid {
public:
  explicit TimeGrid(std::vector<double> points);

  static TimeGrid uniform(double horizon, std::size_t steps);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t steps() const noexcept { return points_.size() - 1; }
  double horizon() const noexcept { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }

  /// Length of cell i, i.e. t_i - t_{i-1}, for i >= 1.
  double dt(std::size_t i) const;

  /// Index of the grid point closest to t (ties resolve to the lower index).
  std::size_t nearest_index(double t) const;

  /// Index of t if it lies on the grid within tol.
  std::optional<std::size_t> index_of(double t, double tol = 1e-12) const;

  /// Every stride-th point. steps() must be divisible by stride.
  TimeGrid coarsen(std::size_t stride) const;

  bool operator==(const TimeGrid&) const = default;

private:
  std::vector<double> points_;
};

}  // namespace gvh
