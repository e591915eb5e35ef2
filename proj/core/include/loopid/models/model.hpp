#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loopid/core/trajectory.hpp"

namespace loopid {

/// Per-step log-likelihood values l_t(theta), t = 1..T (stored 0-based).
struct LogLikelihoodSeries {
  std::vector<double> values;

  std::size_t length() const noexcept { return values.size(); }
  /// l_t for 1-based t.
  double at(std::size_t t) const { return values.at(t - 1); }
  double mean() const;
};

/// A parametric family of conditional laws q_theta(Y_t | U_{1:t-1}, Y_{1:t-1}).
///
/// Time indices in this interface are 1-based, as in l_t. Implementations are
/// immutable and safe to evaluate concurrently.
class ParametricModel {
 public:
  virtual ~ParametricModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string describe() const = 0;

  /// Full-history log-likelihood for every t.
  virtual LogLikelihoodSeries loglik_series(std::span<const double> theta,
                                            const Trajectory& traj) const = 0;

  /// l_{t,s}: the same model fed only observations t-s .. t-1 (plus y_t).
  /// Requires 0 < s < t <= T.
  virtual double loglik_truncated_at(std::span<const double> theta, const Trajectory& traj,
                                     std::size_t t, std::size_t s) const = 0;

  /// Gradient of the average log-likelihood, when available in closed form.
  virtual std::optional<std::vector<double>> avg_loglik_gradient(
      std::span<const double> /*theta*/, const Trajectory& /*traj*/) const {
    return std::nullopt;
  }
};

LogLikelihoodSeries loglik_series(const ParametricModel& model, std::span<const double> theta,
                                  const Trajectory& traj);

/// l_t(theta) for 1 <= t <= T.
double loglik_at(const ParametricModel& model, std::span<const double> theta,
                 const Trajectory& traj, std::size_t t);

/// l_{t,s}(theta) for 0 < s < t <= T.
double loglik_truncated_at(const ParametricModel& model, std::span<const double> theta,
                           const Trajectory& traj, std::size_t t, std::size_t s);

/// L_T(theta) = (1/T) sum_t l_t(theta).
double avg_loglik(const ParametricModel& model, std::span<const double> theta,
                  const Trajectory& traj);

}  // namespace loopid
