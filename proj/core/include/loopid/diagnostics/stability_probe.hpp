#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "loopid/core/rng.hpp"
#include "loopid/diagnostics/decay.hpp"
#include "loopid/linsys/closed_loop.hpp"

namespace loopid {

/// Estimates E|Y_t - Y_{t,s}|^r for each s with a coupled copy Y_{t,s}: the
/// loop is re-run with the noise (e, r) at times <= t - s redrawn
/// independently and the later noise shared, so Y_{t,s} is independent of
/// Y_{1:t-s}. t is the last step of burn_in + t_eval simulated steps; the
/// default burn-in is burn_in_length(sys). r must be 2 or 4.
DecayFit r_mean_stability_probe(const LinearClosedLoopSystem& sys, unsigned r,
                                std::span<const std::size_t> s_values, std::size_t t_eval,
                                std::size_t replications, const RngStream& rng,
                                std::optional<std::size_t> burn_in = std::nullopt);

}  // namespace loopid
