#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/markov/chain.hpp"

namespace loopid {

/// A stationary data-generating process: a linear closed loop started after a
/// burn-in, or a controlled Markov chain started from its stationary law.
class DataSource {
 public:
  /// Validates the system and checks closed-loop stability. Without an
  /// explicit burn-in, uses burn_in_length(sys, 1e-8).
  static DataSource linear(LinearClosedLoopSystem sys,
                           std::optional<std::size_t> burn_in = std::nullopt);
  /// Checks ergodicity once (stationary_distribution).
  static DataSource markov(ControlledMarkovChain chain);

  Trajectory sample(std::size_t T, const RngStream& rng) const;

  bool is_linear() const noexcept { return std::holds_alternative<Linear>(source_); }
  const LinearClosedLoopSystem& linear_system() const;
  const ControlledMarkovChain& chain() const;
  std::size_t burn_in() const noexcept;
  std::string describe() const;

 private:
  struct Linear {
    LinearClosedLoopSystem sys;
    std::size_t burn_in;
  };
  explicit DataSource(std::variant<Linear, ControlledMarkovChain> source)
      : source_(std::move(source)) {}

  std::variant<Linear, ControlledMarkovChain> source_;
};

}  // namespace loopid
