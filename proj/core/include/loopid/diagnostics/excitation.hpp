#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/diagnostics/data_source.hpp"

namespace loopid {

/// Phi_t = (u_{t-1}, ..., u_{t-u_lags}, y_{t-1}, ..., y_{t-y_lags}).
struct RegressorSpec {
  std::size_t u_lags = 1;
  std::size_t y_lags = 1;

  std::size_t dimension() const noexcept { return u_lags + y_lags; }
};

/// Sample E[Phi Phi^T] over the steps with a complete history.
struct RegressorMoment {
  std::size_t dimension = 0;
  std::vector<double> matrix;  // row-major
  double min_eigenvalue = 0.0;
  std::size_t sample_size = 0;

  double at(std::size_t i, std::size_t j) const { return matrix.at(i * dimension + j); }
  double trace() const;
};

struct ExcitationVerdict {
  RegressorMoment moment;
  double threshold = 0.0;
  bool persistently_exciting = false;
};

/// Positive definiteness of the sample regressor moment: min eigenvalue >
/// threshold (default 1e-8 * trace / dim). Needs T >= 10 * dim.
ExcitationVerdict persistent_excitation_check(const Trajectory& traj, const RegressorSpec& spec,
                                              std::optional<double> threshold = std::nullopt);
ExcitationVerdict persistent_excitation_check(const DataSource& source, std::size_t T,
                                              const RngStream& rng, const RegressorSpec& spec,
                                              std::optional<double> threshold = std::nullopt);

}  // namespace loopid
