#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loopid/core/rng.hpp"
#include "loopid/diagnostics/data_source.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

enum class DecayStatus {
  fitted,
  exact_finite_memory,  // every gap is exactly zero
  insufficient_points,  // fewer than two points above the noise floor
};

std::string to_string(DecayStatus status);

/// Fit of gap(s) ~ C lambda^s by least squares on log(gap) against s.
struct DecayFit {
  std::vector<std::size_t> s_values;
  std::vector<double> mean_gaps;  // Monte-Carlo mean of the gap statistic
  std::vector<double> stderrs;
  std::vector<bool> used_in_fit;
  double C_hat = 0.0;
  double lambda_hat = 0.0;
  double r_squared = 0.0;
  DecayStatus status = DecayStatus::insufficient_points;
};

/// Points with gap <= 0 or gap < noise_floor_ratio * stderr are excluded.
DecayFit fit_exponential_decay(std::span<const std::size_t> s_values,
                               std::span<const double> mean_gaps,
                               std::span<const double> stderrs,
                               double noise_floor_ratio = 10.0);

struct S1DecayResult {
  std::vector<DecayFit> per_theta;
  /// Index of the slowest decay (largest lambda_hat; exact finite memory
  /// counts as 0, an undefined fit as +inf).
  std::size_t worst = 0;

  const DecayFit& worst_fit() const { return per_theta.at(worst); }
};

/// Monte-Carlo estimate of E|l_t - l_{t,s}|^2 at t = t_eval for each s and
/// each theta, one RngStream child per replication.
S1DecayResult estimate_s1_decay(const DataSource& source, const ParametricModel& model,
                                std::span<const std::vector<double>> thetas,
                                std::span<const std::size_t> s_values, std::size_t t_eval,
                                std::size_t replications, const RngStream& rng);

/// `s,<gap_column>,stderr,used`
void write_decay_csv(std::ostream& out, const DecayFit& fit,
                     const std::string& gap_column = "mean_sq_gap");

}  // namespace loopid
