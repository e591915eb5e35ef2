#include "loopid/estimation/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "loopid/core/error.hpp"

namespace loopid {

std::vector<ParameterVector> cartesian_grid(const Box& box,
                                            std::span<const std::size_t> points_per_axis) {
  const std::size_t dim = box.dimension();
  if (points_per_axis.size() != dim) throw InvalidArgument("grid axis count != box dimension");
  std::vector<std::vector<double>> axes(dim);
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t n = points_per_axis[i];
    if (n == 0) throw InvalidArgument("grid axis with zero points");
    const Interval& iv = box[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double frac = n == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(n - 1);
      axes[i].push_back(k + 1 == n && n > 1 ? iv.hi : iv.lo + frac * iv.width());
    }
    total *= n;
  }
  std::vector<ParameterVector> grid;
  grid.reserve(total);
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> point(dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t i = 0; i < dim; ++i) point[i] = axes[i][idx[i]];
    grid.emplace_back(point, box);
    // last axis varies fastest
    for (std::size_t i = dim; i-- > 0;) {
      if (++idx[i] < axes[i].size()) break;
      idx[i] = 0;
    }
  }
  return grid;
}

std::vector<ParameterVector> cartesian_grid(const Box& box, double step) {
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  std::vector<std::size_t> counts;
  for (const auto& iv : box.bounds()) {
    counts.push_back(static_cast<std::size_t>(std::llround(iv.width() / step)) + 1);
  }
  return cartesian_grid(box, counts);
}

std::size_t argmax_lowest_index(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

FitResult grid_maximize(const ParametricModel& model, const Trajectory& traj,
                        std::span<const ParameterVector> grid) {
  if (grid.empty()) throw InvalidArgument("grid_maximize needs a nonempty grid");
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = avg_loglik(model, grid[i].values(), traj);
  }
  const std::size_t best = argmax_lowest_index(values);
  FitResult fit{grid[best], values[best], FitMethod::grid_search, grid.size(), true, {}};
  fit.diagnostics["grid_index"] = std::to_string(best);
  fit.diagnostics["grid_size"] = std::to_string(grid.size());
  return fit;
}

}  // namespace loopid
