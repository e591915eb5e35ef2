#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>

#include "loopid/core/parameter.hpp"

namespace loopid {

enum class FitMethod { least_squares, tabular_counts, projected_gradient, grid_search };

std::string to_string(FitMethod method);

/// Outcome of maximizing L_T over a compact box. `objective_value` is
/// avg_loglik at theta_hat as evaluated by the model itself.
struct FitResult {
  ParameterVector theta_hat;
  double objective_value = 0.0;
  FitMethod method = FitMethod::least_squares;
  std::size_t iterations = 0;
  bool converged = false;
  std::map<std::string, std::string> diagnostics;
};

/// `method,theta_0..theta_{n-1},objective,converged,iterations`
void write_fit_csv_header(std::ostream& out, std::size_t dimension);
void write_fit_csv_row(std::ostream& out, const FitResult& fit);

}  // namespace loopid
