#include "loopid/diagnostics/kl.hpp"

#include <cmath>
#include <limits>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

void check_shapes(const ControlledMarkovChain& chain, const TabularMarkovModel& model) {
  if (chain.n_states() != model.n_states() || chain.n_actions() != model.n_actions()) {
    throw InvalidArgument("model and chain have different state or action counts");
  }
}

}  // namespace

double exact_kl_bias(const ControlledMarkovChain& chain, const RegressorDistribution& dist,
                     const TabularMarkovModel& model) {
  check_shapes(chain, model);
  double total = 0.0;
  for (std::size_t s = 0; s < chain.n_states(); ++s) {
    for (std::size_t a = 0; a < chain.n_actions(); ++a) {
      const double w = dist.prob(s, a);
      if (w == 0.0) continue;
      double kl = 0.0;
      for (std::size_t next = 0; next < chain.n_states(); ++next) {
        const double p = chain.transition(s, a, next);
        if (p == 0.0) continue;
        const double q = model.prob(s, a, next);
        if (q == 0.0) return std::numeric_limits<double>::infinity();
        kl += p * std::log(p / q);
      }
      total += w * kl;
    }
  }
  return total;
}

double exact_kl_bias(const ControlledMarkovChain& chain, const TabularMarkovModel& model) {
  return exact_kl_bias(chain, stationary_distribution(chain), model);
}

double true_model_objective(const ControlledMarkovChain& chain) {
  const RegressorDistribution dist = stationary_distribution(chain);
  double total = 0.0;
  for (std::size_t s = 0; s < chain.n_states(); ++s) {
    for (std::size_t a = 0; a < chain.n_actions(); ++a) {
      for (std::size_t next = 0; next < chain.n_states(); ++next) {
        const double p = chain.transition(s, a, next);
        if (p > 0.0) total += dist.prob(s, a) * p * std::log(p);
      }
    }
  }
  return total;
}

KlOracleResult argmin_kl_oracle(const ControlledMarkovChain& chain,
                                std::span<const TabularMarkovModel> grid) {
  if (grid.empty()) throw InvalidArgument("KL oracle: empty model grid");
  const RegressorDistribution dist = stationary_distribution(chain);
  KlOracleResult out;
  out.best_bias = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = exact_kl_bias(chain, dist, grid[i]);
    out.bias_curve.push_back(b);
    if (b < out.best_bias || (i == 0 && b == out.best_bias)) {
      out.best_bias = b;
      out.best_index = i;
    }
  }
  return out;
}

KlOracleResult argmin_kl_oracle(const ControlledMarkovChain& chain, const TabularFamily& family,
                                std::span<const ParameterVector> grid) {
  std::vector<TabularMarkovModel> models;
  models.reserve(grid.size());
  for (const auto& theta : grid) models.push_back(family.model_at(theta));
  return argmin_kl_oracle(chain, models);
}

}  // namespace loopid
