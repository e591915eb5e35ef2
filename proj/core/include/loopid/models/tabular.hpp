#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "loopid/models/model.hpp"

namespace loopid {

/// Tabular first-order model q(S_t | S_{t-1}, A_{t-1}) = Q[s, a, s'] whose
/// entries are all >= floor. The t = 1 term uses a uniform initial law.
class TabularMarkovModel {
 public:
  /// Rows built as floor + (1 - k floor) * w / sum(w) from nonnegative
  /// weights [s][a][s']; an all-zero row becomes uniform.
  static TabularMarkovModel from_weights(std::size_t n_states, std::size_t n_actions,
                                         std::span<const double> weights, double floor);
  static TabularMarkovModel uniform(std::size_t n_states, std::size_t n_actions, double floor);
  /// Takes explicit probabilities; every row must sum to 1 and respect the floor.
  static TabularMarkovModel from_probabilities(std::size_t n_states, std::size_t n_actions,
                                               std::vector<double> probs, double floor);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double floor() const noexcept { return floor_; }
  double prob(std::size_t s, std::size_t a, std::size_t next) const {
    return probs_.at((s * n_actions_ + a) * n_states_ + next);
  }
  std::span<const double> row(std::size_t s, std::size_t a) const;
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  LogLikelihoodSeries loglik_series(const Trajectory& traj) const;

 private:
  TabularMarkovModel(std::size_t n_states, std::size_t n_actions, double floor,
                     std::vector<double> probs);

  std::size_t n_states_;
  std::size_t n_actions_;
  double floor_;
  std::vector<double> probs_;
};

/// theta -> TabularMarkovModel as a ParametricModel. The default family uses
/// the weight parameterization of `from_weights` (dimension n_s * n_a * n_s);
/// custom families supply their own map.
class TabularFamily final : public ParametricModel {
 public:
  using Map = std::function<TabularMarkovModel(std::span<const double>)>;

  TabularFamily(std::size_t dimension, Map map, std::string name);
  static TabularFamily weights(std::size_t n_states, std::size_t n_actions, double floor);

  TabularMarkovModel model_at(std::span<const double> theta) const { return map_(theta); }

  std::size_t dimension() const override { return dimension_; }
  std::string describe() const override { return name_; }
  LogLikelihoodSeries loglik_series(std::span<const double> theta,
                                    const Trajectory& traj) const override;
  /// First-order Markov: l_{t,s} = l_t for every s >= 1.
  double loglik_truncated_at(std::span<const double> theta, const Trajectory& traj,
                             std::size_t t, std::size_t s) const override;

 private:
  std::size_t dimension_;
  Map map_;
  std::string name_;
};

}  // namespace loopid
