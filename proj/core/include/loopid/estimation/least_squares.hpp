#pragma once

#include <cstddef>

#include "loopid/core/parameter.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/estimation/fit_result.hpp"

namespace loopid {

/// ML for the Gaussian ARX(n_a, n_b) model with fixed sigma, i.e. least
/// squares on the zero-padded regression y_t = theta' Phi_t + eps_t.
///
/// A singular regressor moment matrix throws NotPersistentlyExcitingError
/// naming the rank-deficient block. When the unconstrained solution leaves
/// the box the fit continues with projected gradient from its projection and
/// sets diagnostics["box_active"] = "true".
FitResult fit_arx_least_squares(const Trajectory& traj, std::size_t n_a, std::size_t n_b,
                                double sigma, const Box& box);

}  // namespace loopid
