#pragma once

#include <cstddef>
#include <vector>

#include "loopid/core/trajectory.hpp"
#include "loopid/estimation/fit_result.hpp"
#include "loopid/models/tabular.hpp"

namespace loopid {

struct TabularFit {
  FitResult result;  // theta_hat = per-row empirical transition frequencies
  TabularMarkovModel model;
  std::vector<std::size_t> unvisited;  // Phi indices never observed
  std::vector<std::size_t> visits;     // per Phi index
};

/// Counting MLE of q(S_t | S_{t-1}, A_{t-1}) with floor mixing
///   Q = (1 - k floor) counts / total + floor.
/// Unvisited rows are uniform and listed in `unvisited` and
/// diagnostics["unvisited"].
TabularFit fit_tabular(const Trajectory& traj, std::size_t n_states, std::size_t n_actions,
                       double floor);

}  // namespace loopid
