#include "loopid/estimation/projected_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

double objective(const ParametricModel& model, std::span<const double> theta,
                 const Trajectory& traj) {
  try {
    const double value = avg_loglik(model, theta, traj);
    return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
  } catch (const NonMinimumPhaseError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> finite_difference_gradient(const ParametricModel& model,
                                               std::span<const double> theta,
                                               const Trajectory& traj, double h) {
  std::vector<double> grad(theta.size());
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = avg_loglik(model, probe, traj);
    probe[i] = theta[i] - h;
    const double down = avg_loglik(model, probe, traj);
    probe[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

FitResult fit_projected_gradient(const ParametricModel& model, const Trajectory& traj,
                                 const ParameterVector& theta0,
                                 const ProjectedGradientOptions& options) {
  const Box& box = theta0.box();
  std::vector<double> theta(theta0.values().begin(), theta0.values().end());
  double value = objective(model, theta, traj);
  if (!std::isfinite(value)) {
    throw InvalidArgument("objective is not finite at theta0 for " + model.describe());
  }

  auto gradient = [&](std::span<const double> at) {
    if (!options.force_finite_differences) {
      if (auto g = model.avg_loglik_gradient(at, traj)) return *g;
    }
    return finite_difference_gradient(model, at, traj, options.finite_difference_step);
  };

  FitResult fit{theta0, value, FitMethod::projected_gradient, 0, false, {}};
  std::string stop_reason = "max_iterations";
  double pg_norm = INFINITY;
  double trial_step = options.initial_step;
  std::vector<double> prev_theta, prev_g;
  for (std::size_t iter = 0; iter <= options.max_iterations; ++iter) {
    const std::vector<double> g = gradient(theta);
    if (!prev_g.empty()) {
      // Barzilai-Borwein trial step from the last move.
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double s_i = theta[i] - prev_theta[i];
        ss += s_i * s_i;
        sy -= s_i * (g[i] - prev_g[i]);
      }
      trial_step = (sy > 0.0 && ss > 0.0) ? std::clamp(ss / sy, 1e-10, 1e10) : options.initial_step;
    }
    std::vector<double> probe(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) probe[i] = theta[i] + g[i];
    probe = box.project(probe);
    for (std::size_t i = 0; i < theta.size(); ++i) probe[i] -= theta[i];
    pg_norm = norm(probe);
    if (pg_norm < options.tolerance) {
      fit.converged = true;
      stop_reason = "projected_gradient_norm";
      break;
    }
    if (iter == options.max_iterations) break;

    double step = trial_step;
    bool accepted = false;
    double gain = 0.0;
    for (std::size_t k = 0; k < options.max_backtracks; ++k, step *= options.shrink) {
      std::vector<double> candidate(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] + step * g[i];
      candidate = box.project(candidate);
      double directional = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) directional += g[i] * (candidate[i] - theta[i]);
      const double cand_value = objective(model, candidate, traj);
      if (cand_value >= value + options.sufficient_increase * directional) {
        gain = cand_value - value;
        prev_theta = theta;
        prev_g = g;
        theta = std::move(candidate);
        value = cand_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stop_reason = "line_search_failed";
      break;
    }
    ++fit.iterations;
    if (gain <= options.value_tolerance * (1.0 + std::abs(value))) {
      fit.converged = true;
      stop_reason = "objective_change";
      break;
    }
  }

  fit.theta_hat = ParameterVector(theta, box);
  fit.objective_value = avg_loglik(model, theta, traj);
  fit.diagnostics["stop_reason"] = stop_reason;
  fit.diagnostics["projected_gradient_norm"] = format_real(pg_norm);
  return fit;
}

}  // namespace loopid
