#include "loopid/models/tabular.hpp"

#include <cmath>
#include <string>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

void check_floor(double floor, std::size_t n_states) {
  if (!(floor > 0.0) || floor * static_cast<double>(n_states) >= 1.0) {
    throw InvalidArgument("tabular floor must satisfy 0 < floor < 1 / n_states");
  }
}

void check_symbols(const Trajectory& traj, std::size_t n_states, std::size_t n_actions) {
  if (!traj.u.space().is_finite() || !traj.y.space().is_finite()) {
    throw InvalidArgument("tabular models need finite-alphabet trajectories");
  }
  if (traj.u.length() != traj.y.length()) throw InvalidArgument("len(u) != len(y)");
  for (auto s : traj.y.symbols()) {
    if (s >= n_states) throw InvalidArgument("state symbol " + std::to_string(s) + " out of range");
  }
  for (auto a : traj.u.symbols()) {
    if (a >= n_actions) throw InvalidArgument("action symbol " + std::to_string(a) + " out of range");
  }
}

}  // namespace

TabularMarkovModel::TabularMarkovModel(std::size_t n_states, std::size_t n_actions,
                                       double floor, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), floor_(floor), probs_(std::move(probs)) {}

TabularMarkovModel TabularMarkovModel::from_weights(std::size_t n_states, std::size_t n_actions,
                                                    std::span<const double> weights,
                                                    double floor) {
  check_floor(floor, n_states);
  if (weights.size() != n_states * n_actions * n_states) {
    throw InvalidArgument("tabular weights must have n_states * n_actions * n_states entries");
  }
  const double k = static_cast<double>(n_states);
  std::vector<double> probs(weights.size());
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    const auto w = weights.subspan(row * n_states, n_states);
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("tabular weights must be >= 0");
      total += x;
    }
    for (std::size_t j = 0; j < n_states; ++j) {
      const double share = total > 0.0 ? w[j] / total : 1.0 / k;
      probs[row * n_states + j] = floor + (1.0 - k * floor) * share;
    }
  }
  return TabularMarkovModel(n_states, n_actions, floor, std::move(probs));
}

TabularMarkovModel TabularMarkovModel::uniform(std::size_t n_states, std::size_t n_actions,
                                               double floor) {
  std::vector<double> zeros(n_states * n_actions * n_states, 0.0);
  return from_weights(n_states, n_actions, zeros, floor);
}

TabularMarkovModel TabularMarkovModel::from_probabilities(std::size_t n_states,
                                                          std::size_t n_actions,
                                                          std::vector<double> probs,
                                                          double floor) {
  check_floor(floor, n_states);
  if (probs.size() != n_states * n_actions * n_states) {
    throw InvalidArgument("tabular probabilities must have n_states * n_actions * n_states entries");
  }
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    double total = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) {
      const double p = probs[row * n_states + j];
      if (!(p >= floor * (1.0 - 1e-12))) {
        throw InvalidArgument("tabular row " + std::to_string(row) + " violates the floor");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidArgument("tabular row " + std::to_string(row) + " does not sum to 1");
    }
  }
  return TabularMarkovModel(n_states, n_actions, floor, std::move(probs));
}

std::span<const double> TabularMarkovModel::row(std::size_t s, std::size_t a) const {
  return std::span<const double>(probs_).subspan((s * n_actions_ + a) * n_states_, n_states_);
}

LogLikelihoodSeries TabularMarkovModel::loglik_series(const Trajectory& traj) const {
  check_symbols(traj, n_states_, n_actions_);
  const std::size_t T = traj.length();
  LogLikelihoodSeries out;
  out.values.resize(T);
  if (T == 0) return out;
  out.values[0] = -std::log(static_cast<double>(n_states_));
  const auto states = traj.y.symbols();
  const auto actions = traj.u.symbols();
  for (std::size_t t = 1; t < T; ++t) {
    out.values[t] = std::log(prob(states[t - 1], actions[t - 1], states[t]));
  }
  return out;
}

TabularFamily::TabularFamily(std::size_t dimension, Map map, std::string name)
    : dimension_(dimension), map_(std::move(map)), name_(std::move(name)) {}

TabularFamily TabularFamily::weights(std::size_t n_states, std::size_t n_actions, double floor) {
  check_floor(floor, n_states);
  return TabularFamily(
      n_states * n_actions * n_states,
      [=](std::span<const double> theta) {
        return TabularMarkovModel::from_weights(n_states, n_actions, theta, floor);
      },
      "tabular(" + std::to_string(n_states) + "x" + std::to_string(n_actions) + ")");
}

LogLikelihoodSeries TabularFamily::loglik_series(std::span<const double> theta,
                                                 const Trajectory& traj) const {
  return map_(theta).loglik_series(traj);
}

double TabularFamily::loglik_truncated_at(std::span<const double> theta, const Trajectory& traj,
                                          std::size_t t, std::size_t /*s*/) const {
  const TabularMarkovModel model = map_(theta);
  check_symbols(traj, model.n_states(), model.n_actions());
  // Only (S_{t-1}, A_{t-1}) enters, which every window with s >= 1 contains.
  return std::log(model.prob(traj.y.symbol(t - 2), traj.u.symbol(t - 2), traj.y.symbol(t - 1)));
}

}  // namespace loopid
