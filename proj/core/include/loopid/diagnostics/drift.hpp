#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/diagnostics/data_source.hpp"

namespace loopid {

struct DriftOptions {
  std::size_t windows = 4;
  double threshold_sigmas = 4.0;
};

struct WindowDrift {
  std::string signal;  // "u" or "y"
  std::size_t window = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_z = 0.0;      // |window mean - reference mean| / stderr
  double variance_z = 0.0;  // same for the mean squared deviation
  bool flagged = false;
};

struct DriftReport {
  std::vector<WindowDrift> windows;
  bool drift_detected = false;
};

/// Compares mean and variance of each of `windows` equal windows against the
/// second half of the trajectory. Standard errors use a batch-means long-run
/// variance from the reference half, so serial correlation is accounted for.
/// Scalar continuous signals only.
DriftReport stationarity_drift_check(const Trajectory& traj, const DriftOptions& options = {});
DriftReport stationarity_drift_check(const DataSource& source, std::size_t T,
                                     const RngStream& rng, const DriftOptions& options = {});

/// `signal,window,begin,end,mean,variance,mean_z,variance_z,flagged`
void write_drift_csv(std::ostream& out, const DriftReport& report);

}  // namespace loopid
