#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loopid/core/parameter.hpp"
#include "loopid/estimation/fit_result.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

/// Full tensor grid over the box with inclusive endpoints.
std::vector<ParameterVector> cartesian_grid(const Box& box,
                                            std::span<const std::size_t> points_per_axis);
/// Same with a uniform spacing; each axis gets round(width / step) + 1 points.
std::vector<ParameterVector> cartesian_grid(const Box& box, double step);

/// Index of the largest value, lowest index on ties.
std::size_t argmax_lowest_index(std::span<const double> values);

/// Brute-force maximizer of avg_loglik over a finite grid. Ties go to the
/// lowest grid index. diagnostics["grid_index"] holds the winner's index.
FitResult grid_maximize(const ParametricModel& model, const Trajectory& traj,
                        std::span<const ParameterVector> grid);

}  // namespace loopid
