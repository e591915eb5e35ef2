#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loopid/core/parameter.hpp"
#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

/// Empirical Lipschitz constant of theta -> l_t(theta): the max over random
/// pairs in the box (and over t) of |l_t(theta) - l_t(theta')| / ||theta - theta'||.
struct LipschitzProbe {
  double max_ratio = 0.0;
  std::size_t pairs = 0;
};

LipschitzProbe lipschitz_probe(const ParametricModel& model, std::span<const Trajectory> bank,
                               const Box& box, std::size_t pairs, const RngStream& rng);

/// Mean over the trajectory bank of sup_{theta in grid} l_T(theta)^2 at the
/// last time step.
double dominance_probe(const ParametricModel& model, std::span<const Trajectory> bank,
                       std::span<const ParameterVector> grid);

}  // namespace loopid
