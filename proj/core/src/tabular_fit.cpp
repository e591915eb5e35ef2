#include "loopid/estimation/tabular_fit.hpp"

#include <sstream>

#include "loopid/core/error.hpp"

namespace loopid {

TabularFit fit_tabular(const Trajectory& traj, std::size_t n_states, std::size_t n_actions,
                       double floor) {
  const auto report =
      validate_trajectory(traj, ObsSpace::finite(n_actions), ObsSpace::finite(n_states));
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw InvalidArgument("fit_tabular: " + to_string(v.reason) + " in " +
                          (v.signal.empty() ? std::string("trajectory") : v.signal) +
                          (v.index ? " at index " + std::to_string(*v.index) : std::string()) +
                          (v.detail.empty() ? std::string() : " (" + v.detail + ")"));
  }
  const std::size_t rows = n_states * n_actions;
  std::vector<double> counts(rows * n_states, 0.0);
  std::vector<std::size_t> visits(rows, 0);
  const auto states = traj.y.symbols();
  const auto actions = traj.u.symbols();
  for (std::size_t t = 1; t < traj.length(); ++t) {
    const std::size_t row = states[t - 1] * n_actions + actions[t - 1];
    counts[row * n_states + states[t]] += 1.0;
    ++visits[row];
  }
  std::vector<std::size_t> unvisited;
  for (std::size_t row = 0; row < rows; ++row) {
    if (visits[row] == 0) {
      unvisited.push_back(row);
      continue;
    }
    for (std::size_t j = 0; j < n_states; ++j) {
      counts[row * n_states + j] /= static_cast<double>(visits[row]);
    }
  }

  const TabularFamily family = TabularFamily::weights(n_states, n_actions, floor);
  TabularMarkovModel model = family.model_at(counts);
  const double objective = avg_loglik(family, counts, traj);
  FitResult result{ParameterVector(counts, Box::uniform(counts.size(), 0.0, 1.0)), objective,
                   FitMethod::tabular_counts, 1, true, {}};
  std::ostringstream listed;
  for (std::size_t i = 0; i < unvisited.size(); ++i) {
    const std::size_t s = unvisited[i] / n_actions;
    const std::size_t a = unvisited[i] % n_actions;
    listed << (i ? ";" : "") << "(" << s << "," << a << ")";
  }
  result.diagnostics["unvisited"] = listed.str();
  return TabularFit{std::move(result), std::move(model), std::move(unvisited), std::move(visits)};
}

}  // namespace loopid
