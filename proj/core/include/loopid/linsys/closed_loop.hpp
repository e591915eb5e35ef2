#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loopid/core/rng.hpp"
#include "loopid/core/trajectory.hpp"
#include "loopid/linsys/polynomial.hpp"

namespace loopid {

/// y_t = G(q) u_t + H(q) e_t,  u_t = r_t - K(q) y_t
/// with e_t ~ N(0, sigma_e^2) and r_t ~ N(0, sigma_r^2) white.
struct LinearClosedLoopSystem {
  RationalFilter plant;       // G, strictly proper
  RationalFilter noise;       // H, monic and minimum-phase
  RationalFilter controller;  // K, proper
  double sigma_e = 1.0;
  double sigma_r = 0.0;

  /// Checks every invariant except closed-loop stability.
  void validate() const;
};

/// Spectral radius of the loop: roots of den(H) and of
/// den(G) den(K) + num(G) num(K). Nothing is cancelled; a loop pole on the
/// unit circle that coincides with a zero of the e -> y or r -> y map throws
/// UnitCircleCancellationError.
double closed_loop_stability_radius(const LinearClosedLoopSystem& sys);

/// ceil(log(tol) / log(rho)) floored at 100; rho = 0 gives 100.
std::size_t burn_in_for_radius(double rho, double tol = 1e-8);
std::size_t burn_in_length(const LinearClosedLoopSystem& sys, double tol = 1e-8);

struct LoopInitialState {
  /// Value written into the past outputs of the noise filter H before the
  /// first step (a transient of this size decays through the loop).
  double noise_output = 0.0;
};

struct LoopSignals {
  std::vector<double> u;
  std::vector<double> y;
};

/// Runs the loop on given noise sequences (already scaled by sigma). Per step:
/// y_t from past u, y and current e_t, then u_t from r_t and K applied to y up
/// to and including y_t. No burn-in is discarded.
LoopSignals run_closed_loop(const LinearClosedLoopSystem& sys, std::span<const double> e,
                            std::span<const double> r, const LoopInitialState& init = {});

/// Independent noise sources for e and r.
struct NoiseStreams {
  RngStream e;
  RngStream r;

  /// e from rng.child(0), r from rng.child(1).
  static NoiseStreams from(const RngStream& rng) { return {rng.child(0), rng.child(1)}; }
};

/// Draws T + burn_in steps and returns the last T. The trajectory's t0 is
/// burn_in + 1. Throws UnstableSystemError when the loop radius is >= 1.
Trajectory simulate_linear_closed_loop(const LinearClosedLoopSystem& sys, std::size_t T,
                                       const RngStream& rng, std::size_t burn_in,
                                       const LoopInitialState& init = {});
Trajectory simulate_linear_closed_loop(const LinearClosedLoopSystem& sys, std::size_t T,
                                       NoiseStreams noise, std::size_t burn_in,
                                       const LoopInitialState& init = {});

}  // namespace loopid
