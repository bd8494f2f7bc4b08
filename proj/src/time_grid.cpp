#include "gvh/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gvh/errors.hpp"

namespace gvh {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("time grid needs at least 2 points");
  if (points_.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1]) || !std::isfinite(points_[i]))
      throw DomainError("time grid must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (steps < 1) throw DomainError("uniform grid needs at least one step");
  if (!(horizon > 0.0)) throw DomainError("grid horizon must be positive");
  std::vector<double> pts(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    pts[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  pts.back() = horizon;
  return TimeGrid(std::move(pts));
}

double TimeGrid::dt(std::size_t i) const {
  if (i == 0 || i >= points_.size()) throw DomainError("cell index out of range");
  return points_[i] - points_[i - 1];
}

std::size_t TimeGrid::nearest_index(double t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.begin()) return 0;
  if (it == points_.end()) return points_.size() - 1;
  auto hi = static_cast<std::size_t>(it - points_.begin());
  return (t - points_[hi - 1] <= points_[hi] - t) ? hi - 1 : hi;
}

std::optional<std::size_t> TimeGrid::index_of(double t, double tol) const {
  std::size_t i = nearest_index(t);
  if (std::abs(points_[i] - t) <= tol) return i;
  return std::nullopt;
}

TimeGrid TimeGrid::coarsen(std::size_t stride) const {
  if (stride == 0 || steps() % stride != 0)
    throw DomainError("grid of " + std::to_string(steps()) + " steps cannot be coarsened by " +
                      std::to_string(stride));
  std::vector<double> pts;
  pts.reserve(steps() / stride + 1);
  for (std::size_t i = 0; i < points_.size(); i += stride) pts.push_back(points_[i]);
  return TimeGrid(std::move(pts));
}

}  // namespace gvh
