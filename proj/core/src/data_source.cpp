#include "loopid/diagnostics/data_source.hpp"

#include "loopid/core/error.hpp"

namespace loopid {

DataSource DataSource::linear(LinearClosedLoopSystem sys, std::optional<std::size_t> burn_in) {
  sys.validate();
  const std::size_t n = burn_in ? *burn_in : burn_in_length(sys);
  return DataSource(Linear{std::move(sys), n});
}

DataSource DataSource::markov(ControlledMarkovChain chain) {
  (void)stationary_distribution(chain);
  return DataSource(std::move(chain));
}

Trajectory DataSource::sample(std::size_t T, const RngStream& rng) const {
  if (const auto* lin = std::get_if<Linear>(&source_)) {
    return simulate_linear_closed_loop(lin->sys, T, rng, lin->burn_in);
  }
  return simulate_cmc(std::get<ControlledMarkovChain>(source_), T, rng, StationaryStart{});
}

const LinearClosedLoopSystem& DataSource::linear_system() const {
  if (const auto* lin = std::get_if<Linear>(&source_)) return lin->sys;
  throw InvalidArgument("data source is a Markov chain, not a linear loop");
}

const ControlledMarkovChain& DataSource::chain() const {
  if (const auto* c = std::get_if<ControlledMarkovChain>(&source_)) return *c;
  throw InvalidArgument("data source is a linear loop, not a Markov chain");
}

std::size_t DataSource::burn_in() const noexcept {
  if (const auto* lin = std::get_if<Linear>(&source_)) return lin->burn_in;
  return 0;
}

std::string DataSource::describe() const {
  if (const auto* lin = std::get_if<Linear>(&source_)) {
    return "linear closed loop (burn-in " + std::to_string(lin->burn_in) + ")";
  }
  const auto& c = std::get<ControlledMarkovChain>(source_);
  return "controlled Markov chain (" + std::to_string(c.n_states()) + " states, " +
         std::to_string(c.n_actions()) + " actions)";
}

}  // namespace loopid
