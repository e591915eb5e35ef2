#include "loopid/linsys/closed_loop.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

constexpr double kUnitCircleTol = 1e-9;
constexpr double kRootMatchTol = 1e-6;

bool shares_root(const std::complex<double>& z, const ShiftPolynomial& p) {
  for (const auto& w : finite_roots(p)) {
    if (std::abs(z - w) < kRootMatchTol) return true;
  }
  return false;
}

}  // namespace

void LinearClosedLoopSystem::validate() const {
  if (!plant.strictly_proper()) {
    throw InvalidArgument("plant G must be strictly proper (num.c_0 = 0)");
  }
  if (!noise.monic()) throw InvalidArgument("noise filter H must be monic");
  if (stability_radius(noise.num()) >= 1.0) {
    throw NonMinimumPhaseError("noise filter H is not minimum-phase");
  }
  if (!(sigma_e > 0.0) || !std::isfinite(sigma_e)) {
    throw InvalidArgument("sigma_e must be a positive finite number");
  }
  if (!(sigma_r >= 0.0) || !std::isfinite(sigma_r)) {
    throw InvalidArgument("sigma_r must be a nonnegative finite number");
  }
}

double closed_loop_stability_radius(const LinearClosedLoopSystem& sys) {
  const auto& g = sys.plant;
  const auto& h = sys.noise;
  const auto& k = sys.controller;
  const ShiftPolynomial characteristic = g.den() * k.den() + g.num() * k.num();
  if (characteristic[0] == 0.0) {
    throw InvalidArgument("loop characteristic polynomial has c_0 = 0 (algebraic loop)");
  }
  // e -> y: num(H) den(G) den(K) / (den(H) * characteristic)
  // r -> y: num(G) den(K) / characteristic
  const ShiftPolynomial e_zeros = h.num() * g.den() * k.den();
  const ShiftPolynomial r_zeros = g.num() * k.den();

  double radius = 0.0;
  auto visit = [&](const std::complex<double>& z, bool from_characteristic) {
    const double modulus = std::abs(z);
    radius = std::max(radius, modulus);
    if (std::abs(modulus - 1.0) < kUnitCircleTol) {
      if (shares_root(z, e_zeros) || (from_characteristic && shares_root(z, r_zeros))) {
        throw UnitCircleCancellationError("pole-zero cancellation on the unit circle at z = " +
                                          std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") +
                                          std::to_string(z.imag()) + "i");
      }
    }
  };
  for (const auto& z : h.den().roots()) visit(z, false);
  for (const auto& z : characteristic.roots()) visit(z, true);
  return radius;
}

std::size_t burn_in_for_radius(double rho, double tol) {
  constexpr std::size_t kFloor = 100;
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("burn-in tolerance must lie in (0, 1)");
  if (!(rho >= 0.0)) throw InvalidArgument("stability radius must be nonnegative");
  if (rho >= 1.0) {
    throw UnstableSystemError("burn-in undefined for a loop with radius >= 1", rho);
  }
  if (rho == 0.0) return kFloor;
  const double steps = std::ceil(std::log(tol) / std::log(rho));
  return std::max(kFloor, static_cast<std::size_t>(steps));
}

std::size_t burn_in_length(const LinearClosedLoopSystem& sys, double tol) {
  return burn_in_for_radius(closed_loop_stability_radius(sys), tol);
}

LoopSignals run_closed_loop(const LinearClosedLoopSystem& sys, std::span<const double> e,
                            std::span<const double> r, const LoopInitialState& init) {
  if (e.size() != r.size()) throw InvalidArgument("noise sequences e and r differ in length");
  if (!sys.plant.strictly_proper()) {
    throw InvalidArgument("plant G must be strictly proper (num.c_0 = 0)");
  }
  FilterState plant(sys.plant);
  FilterState noise(sys.noise);
  FilterState controller(sys.controller);
  noise.fill_output_history(init.noise_output);

  LoopSignals out;
  out.u.resize(e.size());
  out.y.resize(e.size());
  for (std::size_t t = 0; t < e.size(); ++t) {
    const double x = plant.peek(0.0);
    const double v = noise.step(e[t]);
    const double y = x + v;
    const double u = r[t] - controller.step(y);
    plant.commit(u, x);
    out.u[t] = u;
    out.y[t] = y;
  }
  return out;
}

Trajectory simulate_linear_closed_loop(const LinearClosedLoopSystem& sys, std::size_t T,
                                       NoiseStreams noise, std::size_t burn_in,
                                       const LoopInitialState& init) {
  sys.validate();
  if (T == 0) throw InvalidArgument("trajectory length T must be positive");
  if (burn_in > std::numeric_limits<std::size_t>::max() - T) {
    throw InvalidArgument("T + burn_in overflows");
  }
  const double rho = closed_loop_stability_radius(sys);
  if (rho >= 1.0) {
    throw UnstableSystemError(
        "closed loop is unstable (radius " + std::to_string(rho) + " >= 1)", rho);
  }
  const std::size_t total = T + burn_in;
  std::vector<double> e(total), r(total);
  for (std::size_t t = 0; t < total; ++t) {
    e[t] = sys.sigma_e * noise.e.normal();
    r[t] = sys.sigma_r * noise.r.normal();
  }
  LoopSignals signals = run_closed_loop(sys, e, r, init);
  const auto offset = static_cast<std::ptrdiff_t>(burn_in);
  std::vector<double> u(signals.u.begin() + offset, signals.u.end());
  std::vector<double> y(signals.y.begin() + offset, signals.y.end());
  return Trajectory::scalar(std::move(u), std::move(y), static_cast<std::int64_t>(burn_in) + 1);
}

Trajectory simulate_linear_closed_loop(const LinearClosedLoopSystem& sys, std::size_t T,
                                       const RngStream& rng, std::size_t burn_in,
                                       const LoopInitialState& init) {
  return simulate_linear_closed_loop(sys, T, NoiseStreams::from(rng), burn_in, init);
}

}  // namespace loopid
