#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "loopid/core/error.hpp"
#include "loopid/core/parameter.hpp"
#include "loopid/estimation/fit_result.hpp"

namespace loopid::runner {

/// Parse or validation failure, prefixed with `source:line:column: field:`.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct FilterSpec {
  std::vector<double> num;
  std::vector<double> den{1.0};
};

struct LinearSystemSpec {
  FilterSpec plant;
  FilterSpec noise;
  FilterSpec controller;
  double sigma_e = 1.0;
  double sigma_r = 0.0;
  std::optional<std::size_t> burn_in;
};

struct MarkovSystemSpec {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transitions;  // [s][a][s'] flattened
  std::vector<double> policy;       // [s][a] flattened
};

using SystemSpec = std::variant<LinearSystemSpec, MarkovSystemSpec>;

enum class ModelKind { arx, armax, tabular };

struct ModelSpec {
  ModelKind kind = ModelKind::arx;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_c = 0;
  double sigma = 1.0;
  double floor = 1e-4;  // tabular only
};

/// A finite parameter set: a tensor grid over a box, or explicit points.
struct ThetaSet {
  std::vector<Interval> box;
  std::vector<std::size_t> points_per_axis;
  std::vector<std::vector<double>> points;  // used when box is empty
};

struct MethodSpec {
  FitMethod method = FitMethod::least_squares;
  /// "not_persistently_exciting": the method is expected to refuse the data.
  std::optional<std::string> expect_error;
};

struct EstimatorSpec {
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> T_values;
  std::vector<Interval> box;
  std::optional<ThetaSet> grid;  // grid_search
  std::optional<std::vector<double>> true_theta;
  std::optional<double> tolerance;  // median error (or max TV for tabular) below this
  std::optional<double> min_error;  // median error above this
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> expect_unvisited;
};

struct S1DecaySpec {
  std::vector<std::vector<double>> thetas;
  std::vector<std::size_t> s_values;
  std::size_t t_eval = 0;
  std::size_t replications = 0;
  bool expect_exact_finite_memory = false;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<double> r_squared_min;
};

struct UniformConvergenceSpec {
  ThetaSet thetas;
  std::vector<std::size_t> T_values;
  std::size_t T_ref = 0;
  double max_ratio = 0.6;
};

struct ExcitationSpec {
  std::size_t u_lags = 1;
  std::size_t y_lags = 1;
  std::size_t T = 0;
  bool expect_pe = true;
  std::optional<double> expect_min_eigenvalue;
  double eigenvalue_tolerance = 0.05;
};

struct DriftSpec {
  std::size_t T = 0;
  std::size_t windows = 4;
  double threshold_sigmas = 4.0;
  bool expect_drift = false;
};

struct RMeanProbeSpec {
  unsigned r = 2;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<double> r_squared_min;
};

struct RMeanSpec {
  std::vector<RMeanProbeSpec> probes;
  std::vector<std::size_t> s_values;
  std::size_t t_eval = 0;
  std::size_t replications = 0;
};

struct StationarySpec {
  bool expect_full_support = true;
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> expect_zero_set;
};

struct KlBiasSpec {
  double max_bias = 0.01;  // seed-median at the largest estimation T
};

/// Asymptotic argmax set of an ARX model from a grid oracle, compared with
/// the projected-gradient estimates at the largest T.
struct GridOracleSpec {
  std::vector<Interval> box;
  double step = 0.01;
  std::size_t T_ref = 0;
  double max_distance = 0.02;
};

using DiagnosticSpec = std::variant<S1DecaySpec, UniformConvergenceSpec, ExcitationSpec, DriftSpec,
                                    RMeanSpec, StationarySpec, KlBiasSpec, GridOracleSpec>;

std::string diagnostic_kind(const DiagnosticSpec& spec);

struct ExperimentConfig {
  std::string scenario;
  std::string description;
  SystemSpec system;
  ModelSpec model;
  EstimatorSpec estimator;
  std::vector<DiagnosticSpec> diagnostics;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> output;
};

/// Parses YAML text; `source` names it in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

/// Cross-field checks (dimensions, model/system compatibility, seeds).
/// parse_config already calls this; call again after editing a config.
void validate_config(const ExperimentConfig& config);

/// Canonical JSON (sorted keys, normalized numbers) of everything except the
/// output directory.
std::string canonical_json(const ExperimentConfig& config);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::size_t model_dimension(const ExperimentConfig& config);

}  // namespace loopid::runner
