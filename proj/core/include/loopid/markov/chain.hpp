#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"

namespace loopid {

/// Finite controlled Markov chain: state dynamics P[s, a, s'] and policy
/// pi[s, a]. The regressor Phi = (s, a) of the previous step is indexed
/// state-major: phi = s * n_actions + a.
class ControlledMarkovChain {
 public:
  /// `transitions` is [s][a][s'] flattened, `policy` is [s][a] flattened.
  /// Rows must be probability vectors within 1e-12; violations name the row.
  ControlledMarkovChain(std::size_t n_states, std::size_t n_actions,
                        std::vector<double> transitions, std::vector<double> policy);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::size_t phi_count() const noexcept { return n_states_ * n_actions_; }
  std::size_t phi_index(std::size_t s, std::size_t a) const noexcept { return s * n_actions_ + a; }

  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transitions_.at((s * n_actions_ + a) * n_states_ + next);
  }
  std::span<const double> transition_row(std::size_t s, std::size_t a) const;
  double policy(std::size_t s, std::size_t a) const { return policy_.at(s * n_actions_ + a); }
  std::span<const double> policy_row(std::size_t s) const;

  const std::vector<double>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& policy_table() const noexcept { return policy_; }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> transitions_;
  std::vector<double> policy_;
};

/// Stationary law p(Phi) over (s, a) pairs.
struct RegressorDistribution {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> probs;

  double prob(std::size_t s, std::size_t a) const { return probs.at(s * n_actions + a); }
  /// Marginal over actions: the stationary state distribution.
  std::vector<double> state_marginal() const;
};

struct StationaryStart {};
using InitialState = std::variant<std::size_t, StationaryStart>;

/// u = actions, y = states. Per step: A_t ~ pi(.|S_t), then S_{t+1} ~ P(.|S_t, A_t).
Trajectory simulate_cmc(const ControlledMarkovChain& chain, std::size_t T, const RngStream& rng,
                        InitialState init);

struct StationaryOptions {
  std::size_t max_iterations = 100000;
  double tolerance = 1e-12;
};

/// Power iteration on the Phi-chain T[(s,a) -> (s',a')] = P[s,a,s'] pi[s',a']
/// from the uniform vector and from a point mass on Phi = 0. Both runs must
/// converge (L1 step < tolerance) to the same vector, otherwise the chain is
/// declared non-ergodic (reducible or periodic). This is an operational
/// check, not a graph classification.
RegressorDistribution stationary_distribution(const ControlledMarkovChain& chain,
                                              const StationaryOptions& options = {});

/// One application of the Phi-chain transition to a distribution.
std::vector<double> phi_chain_step(const ControlledMarkovChain& chain,
                                   std::span<const double> dist);

struct SupportReport {
  bool full_support = false;
  std::vector<std::size_t> zero_set;  // Phi indices with prob <= threshold
};

SupportReport support_check(const RegressorDistribution& dist, double threshold = 0.0);

/// Empirical frequencies of Phi_t = (S_{t-1}, A_{t-1}) for t = 2..T.
std::vector<double> empirical_phi_frequencies(const Trajectory& traj, std::size_t n_states,
                                              std::size_t n_actions);

/// CSV `phi_state,phi_action,prob`.
void write_stationary_csv(std::ostream& out, const RegressorDistribution& dist);

}  // namespace loopid
