#include "loopid/diagnostics/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "loopid/core/error.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/estimation/grid.hpp"
#include "loopid/models/gaussian_predictor.hpp"

namespace loopid {

namespace {

std::vector<double> objective_on_grid(const ParametricModel& model, const Trajectory& traj,
                                      std::span<const ParameterVector> grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  const auto* gp = dynamic_cast<const GaussianPredictorModel*>(&model);
  if (gp != nullptr && gp->is_arx()) {
    const RegressionMoments m = regression_moments(*gp, traj);
    for (const auto& theta : grid) values.push_back(avg_loglik_from_moments(*gp, m, theta));
  } else {
    for (const auto& theta : grid) values.push_back(avg_loglik(model, theta, traj));
  }
  return values;
}

void check_grid(const ParametricModel& model, std::span<const ParameterVector> grid) {
  if (grid.empty()) throw InvalidArgument("parameter grid is empty");
  for (const auto& theta : grid) {
    if (theta.size() != model.dimension()) {
      throw InvalidArgument("grid point dimension " + std::to_string(theta.size()) +
                            " does not match model dimension " +
                            std::to_string(model.dimension()));
    }
  }
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<ObjectiveEstimate> estimate_asymptotic_objective(
    const DataSource& source, const ParametricModel& model,
    std::span<const ParameterVector> thetas, std::size_t T_ref, std::size_t replications,
    const RngStream& rng) {
  check_grid(model, thetas);
  if (T_ref == 0) throw InvalidArgument("T_ref must be positive");
  if (replications == 0) throw InvalidArgument("need at least one replication");
  std::vector<double> sum(thetas.size(), 0.0), sum_sq(thetas.size(), 0.0);
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const Trajectory traj = source.sample(T_ref, rng.child(rep));
    const auto values = objective_on_grid(model, traj, thetas);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      sum[k] += values[k];
      sum_sq[k] += values[k] * values[k];
    }
  }
  std::vector<ObjectiveEstimate> out;
  const double n = static_cast<double>(replications);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    ObjectiveEstimate est;
    est.mean = sum[k] / n;
    if (replications > 1) {
      const double var = std::max(0.0, (sum_sq[k] - n * est.mean * est.mean) / (n - 1.0));
      est.stderr = std::sqrt(var / n);
    }
    est.ci_half_width = 2.0 * est.stderr;
    est.replications = replications;
    est.T = T_ref;
    out.push_back(est);
  }
  return out;
}

ObjectiveEstimate estimate_asymptotic_objective(const DataSource& source,
                                                const ParametricModel& model,
                                                std::span<const double> theta, std::size_t T_ref,
                                                std::size_t replications, const RngStream& rng) {
  std::vector<Interval> bounds;
  for (double v : theta) bounds.push_back({v, v});
  const std::vector<ParameterVector> one{
      ParameterVector(std::vector<double>(theta.begin(), theta.end()), Box(bounds))};
  return estimate_asymptotic_objective(source, model, one, T_ref, replications, rng).front();
}

UniformConvergenceReport uniform_convergence_gap(const DataSource& source,
                                                 const ParametricModel& model,
                                                 std::span<const ParameterVector> grid,
                                                 std::span<const std::size_t> T_list,
                                                 std::span<const std::uint64_t> seeds,
                                                 const RngStream& rng, std::size_t T_ref) {
  check_grid(model, grid);
  if (T_list.empty()) throw InvalidArgument("uniform convergence: empty T list");
  if (seeds.empty()) throw InvalidArgument("uniform convergence: no seeds");
  const std::size_t T_max = *std::max_element(T_list.begin(), T_list.end());
  if (T_ref < 10 * T_max) {
    throw InvalidArgument("uniform convergence: T_ref = " + std::to_string(T_ref) +
                          " is less than 10 * max(T) = " + std::to_string(10 * T_max));
  }
  UniformConvergenceReport report;
  report.T_ref = T_ref;
  report.T_values.assign(T_list.begin(), T_list.end());
  report.reference = objective_on_grid(model, source.sample(T_ref, rng), grid);

  for (std::uint64_t seed : seeds) {
    for (std::size_t k = 0; k < T_list.size(); ++k) {
      const Trajectory traj = source.sample(T_list[k], make_rng(seed, k));
      const auto values = objective_on_grid(model, traj, grid);
      GapRow row{seed, T_list[k], -1.0, 0};
      for (std::size_t g = 0; g < values.size(); ++g) {
        const double gap = std::abs(values[g] - report.reference[g]);
        if (gap > row.sup_gap) {
          row.sup_gap = gap;
          row.argsup = g;
        }
      }
      report.rows.push_back(row);
    }
  }

  const std::size_t nT = T_list.size();
  for (std::size_t k = 0; k < nT; ++k) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i < seeds.size(); ++i) gaps.push_back(report.rows[i * nT + k].sup_gap);
    report.median_gaps.push_back(median(gaps));
  }
  for (std::size_t k = 0; k + 1 < nT; ++k) {
    std::vector<double> ratios;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const double a = report.rows[i * nT + k].sup_gap;
      const double b = report.rows[i * nT + k + 1].sup_gap;
      ratios.push_back(a > 0.0 ? b / a : std::numeric_limits<double>::infinity());
    }
    report.median_ratios.push_back(median(ratios));
  }
  report.monotone = true;
  for (std::size_t k = 0; k + 1 < nT; ++k) {
    if (!(report.median_gaps[k + 1] < report.median_gaps[k])) report.monotone = false;
  }
  return report;
}

void write_gap_csv(std::ostream& out, const UniformConvergenceReport& report) {
  out << "seed,T,sup_gap\n";
  for (const auto& row : report.rows) {
    out << row.seed << ',' << row.T << ',' << format_real(row.sup_gap) << '\n';
  }
}

GridObjective summarize_grid(std::vector<double> values,
                             std::span<const std::size_t> points_per_axis) {
  std::size_t total = 1;
  for (std::size_t n : points_per_axis) total *= n;
  if (points_per_axis.empty() || total != values.size()) {
    throw InvalidArgument("grid shape does not match the number of values");
  }
  GridObjective out;
  out.best = argmax_lowest_index(values);

  // Last axis varies fastest.
  std::vector<std::size_t> stride(points_per_axis.size(), 1);
  for (std::size_t d = points_per_axis.size() - 1; d > 0; --d) {
    stride[d - 1] = stride[d] * points_per_axis[d];
  }
  const double best = values[out.best];
  double drop = 0.0;
  for (std::size_t d = 0; d < points_per_axis.size(); ++d) {
    const std::size_t coord = (out.best / stride[d]) % points_per_axis[d];
    if (coord > 0) drop = std::max(drop, best - values[out.best - stride[d]]);
    if (coord + 1 < points_per_axis[d]) drop = std::max(drop, best - values[out.best + stride[d]]);
  }
  out.resolution_drop = drop;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - drop) out.argmax_set.push_back(i);
  }
  out.values = std::move(values);
  return out;
}

GridObjective asymptotic_objective_grid(const DataSource& source, const ParametricModel& model,
                                        std::span<const ParameterVector> grid,
                                        std::span<const std::size_t> points_per_axis,
                                        std::size_t T_ref, const RngStream& rng) {
  check_grid(model, grid);
  return summarize_grid(objective_on_grid(model, source.sample(T_ref, rng), grid),
                        points_per_axis);
}

double distance_to_grid_set(std::span<const double> theta, std::span<const ParameterVector> grid,
                            std::span<const std::size_t> members) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) best = std::min(best, max_abs_difference(theta, grid[i]));
  return best;
}

}  // namespace loopid
