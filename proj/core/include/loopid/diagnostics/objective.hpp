#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "loopid/core/parameter.hpp"
#include "loopid/core/rng.hpp"
#include "loopid/diagnostics/data_source.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

/// Monte-Carlo estimate of Lbar(theta) = lim E[L_T(theta)].
struct ObjectiveEstimate {
  double mean = 0.0;
  double stderr = 0.0;          // zero with a single replication
  double ci_half_width = 0.0;   // 2 * stderr
  std::size_t replications = 0;
  std::size_t T = 0;

  bool within_ci(double value) const noexcept {
    return value >= mean - ci_half_width && value <= mean + ci_half_width;
  }
};

/// Mean of L_{T_ref}(theta) over independent replications (child streams of
/// rng); CI = +-2 stderr.
ObjectiveEstimate estimate_asymptotic_objective(const DataSource& source,
                                                const ParametricModel& model,
                                                std::span<const double> theta, std::size_t T_ref,
                                                std::size_t replications, const RngStream& rng);

/// Same for several theta on shared replications (common random numbers).
std::vector<ObjectiveEstimate> estimate_asymptotic_objective(
    const DataSource& source, const ParametricModel& model,
    std::span<const ParameterVector> thetas, std::size_t T_ref, std::size_t replications,
    const RngStream& rng);

struct GapRow {
  std::uint64_t seed = 0;
  std::size_t T = 0;
  double sup_gap = 0.0;
  std::size_t argsup = 0;  // grid index attaining the sup
};

struct UniformConvergenceReport {
  std::vector<double> reference;  // Lbar_ref per grid point
  std::size_t T_ref = 0;
  std::vector<std::size_t> T_values;
  std::vector<GapRow> rows;  // seed-major, T-minor
  /// Per consecutive pair (T_k, T_{k+1}): median over seeds of
  /// gap(T_{k+1}) / gap(T_k).
  std::vector<double> median_ratios;
  /// Median over seeds of the sup gap per T.
  std::vector<double> median_gaps;
  bool monotone = false;  // median gap strictly decreasing in T
};

/// sup over the grid of |L_T(theta) - Lbar_ref(theta)| for each T and seed.
/// Lbar_ref comes from one replication of length T_ref drawn from `rng`;
/// T_ref must be at least 10 * max(T_list). Each (seed, T) uses
/// make_rng(seed, index of T).
UniformConvergenceReport uniform_convergence_gap(const DataSource& source,
                                                 const ParametricModel& model,
                                                 std::span<const ParameterVector> grid,
                                                 std::span<const std::size_t> T_list,
                                                 std::span<const std::uint64_t> seeds,
                                                 const RngStream& rng, std::size_t T_ref);

/// `seed,T,sup_gap`
void write_gap_csv(std::ostream& out, const UniformConvergenceReport& report);

/// Lbar over a tensor grid (from cartesian_grid with `points_per_axis`),
/// estimated on one long trajectory. ARX models go through the moment
/// quadratic form, others through avg_loglik per point.
struct GridObjective {
  std::vector<double> values;
  std::size_t best = 0;  // lowest index on ties
  /// Near-maximizers: points within `resolution_drop` of the best value,
  /// where resolution_drop is the largest loss from the best point to one of
  /// its axis neighbours. For non-identifiable models this is the discretized
  /// argmax set.
  std::vector<std::size_t> argmax_set;
  double resolution_drop = 0.0;
};

GridObjective asymptotic_objective_grid(const DataSource& source, const ParametricModel& model,
                                        std::span<const ParameterVector> grid,
                                        std::span<const std::size_t> points_per_axis,
                                        std::size_t T_ref, const RngStream& rng);

GridObjective summarize_grid(std::vector<double> values,
                             std::span<const std::size_t> points_per_axis);

/// Infinity-norm distance from theta to the closest listed grid point.
double distance_to_grid_set(std::span<const double> theta, std::span<const ParameterVector> grid,
                            std::span<const std::size_t> members);

double median(std::vector<double> values);

}  // namespace loopid
