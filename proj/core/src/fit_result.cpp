#include "loopid/estimation/fit_result.hpp"

#include <ostream>

#include "loopid/core/trajectory.hpp"

namespace loopid {

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::least_squares: return "least_squares";
    case FitMethod::tabular_counts: return "tabular_counts";
    case FitMethod::projected_gradient: return "projected_gradient";
    case FitMethod::grid_search: return "grid_search";
  }
  return "unknown";
}

void write_fit_csv_header(std::ostream& out, std::size_t dimension) {
  out << "method";
  for (std::size_t i = 0; i < dimension; ++i) out << ",theta_" << i;
  out << ",objective,converged,iterations\n";
}

void write_fit_csv_row(std::ostream& out, const FitResult& fit) {
  out << to_string(fit.method);
  for (double v : fit.theta_hat.values()) out << ',' << format_real(v);
  out << ',' << format_real(fit.objective_value) << ',' << (fit.converged ? "true" : "false")
      << ',' << fit.iterations << '\n';
}

}  // namespace loopid
