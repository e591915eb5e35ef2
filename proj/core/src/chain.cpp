#include "loopid/markov/chain.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

constexpr double kRowTol = 1e-12;

void check_row(std::span<const double> row, const std::string& name) {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!(row[i] >= 0.0 && row[i] <= 1.0)) {
      std::ostringstream msg;
      msg << name << " has entry " << i << " = " << row[i] << " outside [0, 1]";
      throw InvalidArgument(msg.str());
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kRowTol) {
    std::ostringstream msg;
    msg.precision(15);
    msg << name << " sums to " << sum << ", not 1";
    throw InvalidArgument(msg.str());
  }
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

struct PowerRun {
  std::vector<double> dist;
  double last_step;
  bool converged;
};

PowerRun power_iterate(const ControlledMarkovChain& chain, std::vector<double> dist,
                       const StationaryOptions& options) {
  double step = INFINITY;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    std::vector<double> next = phi_chain_step(chain, dist);
    step = l1_distance(next, dist);
    dist = std::move(next);
    if (step < options.tolerance) return {std::move(dist), step, true};
  }
  return {std::move(dist), step, false};
}

}  // namespace

ControlledMarkovChain::ControlledMarkovChain(std::size_t n_states, std::size_t n_actions,
                                             std::vector<double> transitions,
                                             std::vector<double> policy)
    : n_states_(n_states),
      n_actions_(n_actions),
      transitions_(std::move(transitions)),
      policy_(std::move(policy)) {
  if (n_states_ < 1 || n_actions_ < 1) {
    throw InvalidArgument("controlled Markov chain needs at least one state and one action");
  }
  if (transitions_.size() != n_states_ * n_actions_ * n_states_) {
    throw InvalidArgument("transition tensor must have n_states * n_actions * n_states entries");
  }
  if (policy_.size() != n_states_ * n_actions_) {
    throw InvalidArgument("policy matrix must have n_states * n_actions entries");
  }
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      check_row(transition_row(s, a),
                "transition row P[s=" + std::to_string(s) + ", a=" + std::to_string(a) + "]");
    }
    check_row(policy_row(s), "policy row pi[s=" + std::to_string(s) + "]");
  }
}

std::span<const double> ControlledMarkovChain::transition_row(std::size_t s, std::size_t a) const {
  return std::span<const double>(transitions_).subspan((s * n_actions_ + a) * n_states_, n_states_);
}

std::span<const double> ControlledMarkovChain::policy_row(std::size_t s) const {
  return std::span<const double>(policy_).subspan(s * n_actions_, n_actions_);
}

std::vector<double> RegressorDistribution::state_marginal() const {
  std::vector<double> out(n_states, 0.0);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) out[s] += prob(s, a);
  }
  return out;
}

std::vector<double> phi_chain_step(const ControlledMarkovChain& chain,
                                   std::span<const double> dist) {
  const std::size_t ns = chain.n_states();
  const std::size_t na = chain.n_actions();
  std::vector<double> state_mass(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const double w = dist[chain.phi_index(s, a)];
      if (w == 0.0) continue;
      const auto row = chain.transition_row(s, a);
      for (std::size_t next = 0; next < ns; ++next) state_mass[next] += w * row[next];
    }
  }
  std::vector<double> out(chain.phi_count(), 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) out[chain.phi_index(s, a)] = state_mass[s] * chain.policy(s, a);
  }
  return out;
}

RegressorDistribution stationary_distribution(const ControlledMarkovChain& chain,
                                              const StationaryOptions& options) {
  const std::size_t n = chain.phi_count();
  std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
  std::vector<double> point(n, 0.0);
  point[0] = 1.0;

  PowerRun from_uniform = power_iterate(chain, std::move(uniform), options);
  PowerRun from_point = power_iterate(chain, std::move(point), options);
  if (!from_uniform.converged || !from_point.converged) {
    const double residual = std::max(from_uniform.last_step, from_point.last_step);
    throw NonErgodicError("power iteration did not converge within " +
                              std::to_string(options.max_iterations) +
                              " iterations (periodic chain?); residual " +
                              std::to_string(residual),
                          residual);
  }
  const double disagreement = l1_distance(from_uniform.dist, from_point.dist);
  // Two converged runs of a uniquely ergodic chain agree to roughly the
  // per-step tolerance amplified by the mixing time.
  if (disagreement > 1e-8) {
    throw NonErgodicError("power iteration converged to different fixed points from different "
                          "starts (reducible chain); L1 disagreement " +
                              std::to_string(disagreement),
                          disagreement);
  }
  RegressorDistribution out{chain.n_states(), chain.n_actions(), std::move(from_uniform.dist)};
  double total = 0.0;
  for (double p : out.probs) total += p;
  for (double& p : out.probs) p /= total;
  return out;
}

SupportReport support_check(const RegressorDistribution& dist, double threshold) {
  SupportReport report;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    if (dist.probs[i] <= threshold) report.zero_set.push_back(i);
  }
  report.full_support = report.zero_set.empty();
  return report;
}

Trajectory simulate_cmc(const ControlledMarkovChain& chain, std::size_t T, const RngStream& rng,
                        InitialState init) {
  if (T == 0) throw InvalidArgument("trajectory length T must be positive");
  RngStream stream = rng;
  std::size_t state = 0;
  if (const auto* index = std::get_if<std::size_t>(&init)) {
    if (*index >= chain.n_states()) {
      throw InvalidArgument("initial state " + std::to_string(*index) + " is out of range");
    }
    state = *index;
  } else {
    const auto marginal = stationary_distribution(chain).state_marginal();
    state = stream.categorical(marginal);
  }
  std::vector<std::uint32_t> actions(T), states(T);
  for (std::size_t t = 0; t < T; ++t) {
    states[t] = static_cast<std::uint32_t>(state);
    const std::size_t action = stream.categorical(chain.policy_row(state));
    actions[t] = static_cast<std::uint32_t>(action);
    state = stream.categorical(chain.transition_row(state, action));
  }
  return Trajectory::symbolic(std::move(actions), chain.n_actions(), std::move(states),
                              chain.n_states());
}

std::vector<double> empirical_phi_frequencies(const Trajectory& traj, std::size_t n_states,
                                              std::size_t n_actions) {
  std::vector<double> freq(n_states * n_actions, 0.0);
  const std::size_t T = traj.length();
  if (T < 2) return freq;
  for (std::size_t t = 1; t < T; ++t) {
    const std::size_t s = traj.y.symbol(t - 1);
    const std::size_t a = traj.u.symbol(t - 1);
    if (s >= n_states || a >= n_actions) throw InvalidArgument("symbol out of range");
    freq[s * n_actions + a] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(T - 1);
  return freq;
}

void write_stationary_csv(std::ostream& out, const RegressorDistribution& dist) {
  out << "phi_state,phi_action,prob\n";
  for (std::size_t s = 0; s < dist.n_states; ++s) {
    for (std::size_t a = 0; a < dist.n_actions; ++a) {
      out << s << ',' << a << ',' << format_real(dist.prob(s, a)) << '\n';
    }
  }
}

}  // namespace loopid
