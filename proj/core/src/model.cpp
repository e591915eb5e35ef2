#include "loopid/models/model.hpp"

#include <string>

#include "loopid/core/error.hpp"

namespace loopid {

double LogLikelihoodSeries::mean() const {
  if (values.empty()) throw InvalidArgument("mean of an empty log-likelihood series");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

namespace {

void check_theta(const ParametricModel& model, std::span<const double> theta) {
  if (theta.size() != model.dimension()) {
    throw InvalidArgument(model.describe() + ": theta has dimension " +
                          std::to_string(theta.size()) + ", expected " +
                          std::to_string(model.dimension()));
  }
}

}  // namespace

LogLikelihoodSeries loglik_series(const ParametricModel& model, std::span<const double> theta,
                                  const Trajectory& traj) {
  check_theta(model, theta);
  return model.loglik_series(theta, traj);
}

double loglik_at(const ParametricModel& model, std::span<const double> theta,
                 const Trajectory& traj, std::size_t t) {
  if (t < 1 || t > traj.length()) {
    throw InvalidArgument("time index t = " + std::to_string(t) + " outside 1.." +
                          std::to_string(traj.length()));
  }
  return loglik_series(model, theta, traj).at(t);
}

double loglik_truncated_at(const ParametricModel& model, std::span<const double> theta,
                           const Trajectory& traj, std::size_t t, std::size_t s) {
  check_theta(model, theta);
  if (t < 1 || t > traj.length()) {
    throw InvalidArgument("time index t = " + std::to_string(t) + " outside 1.." +
                          std::to_string(traj.length()));
  }
  if (s == 0 || s >= t) {
    throw InvalidArgument("truncation needs 0 < s < t (got s = " + std::to_string(s) +
                          ", t = " + std::to_string(t) + ")");
  }
  return model.loglik_truncated_at(theta, traj, t, s);
}

double avg_loglik(const ParametricModel& model, std::span<const double> theta,
                  const Trajectory& traj) {
  if (traj.length() == 0) throw InvalidArgument("average log-likelihood of an empty trajectory");
  return loglik_series(model, theta, traj).mean();
}

}  // namespace loopid
