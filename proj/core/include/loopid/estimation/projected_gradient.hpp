#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loopid/core/parameter.hpp"
#include "loopid/estimation/fit_result.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

struct ProjectedGradientOptions {
  double initial_step = 1.0;  // later searches start from a Barzilai-Borwein step
  double shrink = 0.5;
  double sufficient_increase = 1e-4;  // Armijo constant
  double finite_difference_step = 1e-5;
  double tolerance = 1e-8;  // on || P(theta + g) - theta ||
  /// Also stop once an accepted step gains less than this times 1 + |L_T|.
  double value_tolerance = 1e-13;
  std::size_t max_iterations = 10000;
  std::size_t max_backtracks = 60;
  bool force_finite_differences = false;
};

/// Central differences of avg_loglik with step h per coordinate.
std::vector<double> finite_difference_gradient(const ParametricModel& model,
                                               std::span<const double> theta,
                                               const Trajectory& traj, double h);

/// Projected gradient ascent on L_T over theta0's box with Armijo
/// backtracking. Uses the model's analytic gradient when it has one. Accepted
/// steps never decrease the objective. Parameters at which the model is not
/// evaluable (e.g. non-minimum-phase noise model) count as -inf.
FitResult fit_projected_gradient(const ParametricModel& model, const Trajectory& traj,
                                 const ParameterVector& theta0,
                                 const ProjectedGradientOptions& options = {});

}  // namespace loopid
