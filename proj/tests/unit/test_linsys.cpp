#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "../support/systems.hpp"
#include "loopid/core/error.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/linsys/polynomial.hpp"

namespace loopid {
namespace {

// Largest root modulus of z^2 + p z + q by the quadratic formula.
double quadratic_radius(double p, double q) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(p * p - 4 * q));
  return std::max(std::abs((-p + disc) / 2.0), std::abs((-p - disc) / 2.0));
}

TEST(StabilityRadius, FirstOrder) {
  EXPECT_NEAR(stability_radius(ShiftPolynomial{1.0, -0.5}), 0.5, 1e-12);
}

TEST(StabilityRadius, ConstantHasNoRoots) {
  EXPECT_EQ(stability_radius(ShiftPolynomial{1.0}), 0.0);
}

TEST(StabilityRadius, SecondOrderMatchesQuadraticFormula) {
  EXPECT_NEAR(stability_radius(ShiftPolynomial{1.0, -1.3, 0.4}), quadratic_radius(-1.3, 0.4),
              1e-12);
  EXPECT_NEAR(stability_radius(ShiftPolynomial{1.0, 0.2, 0.5}), quadratic_radius(0.2, 0.5),
              1e-12);
}

TEST(StabilityRadius, ZeroLeadingCoefficientThrows) {
  EXPECT_THROW(stability_radius(ShiftPolynomial{0.0, 1.0}), InvalidArgument);
}

TEST(StabilityRadius, InvariantUnderScaling) {
  auto rng = make_rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const ShiftPolynomial p{1.0, rng.normal(), rng.normal(), 0.5 * rng.normal()};
    const double k = (rng.uniform() + 0.1) * (rng.uniform() < 0.5 ? -3.0 : 3.0);
    EXPECT_NEAR(stability_radius(k * p), stability_radius(p), 1e-9);
  }
}

TEST(ShiftPolynomial, TrimsTrailingZerosAndMultiplies) {
  EXPECT_EQ(ShiftPolynomial({1.0, 2.0, 0.0, 0.0}).degree(), 1u);
  const auto prod = ShiftPolynomial{1.0, -0.5} * ShiftPolynomial{1.0, 0.5};
  EXPECT_EQ(prod, (ShiftPolynomial{1.0, 0.0, -0.25}));
}

LinearClosedLoopSystem first_order_loop(double a, double b, double k) {
  LinearClosedLoopSystem sys;
  sys.plant = RationalFilter({0.0, b}, {1.0, -a});
  sys.noise = RationalFilter::gain(1.0);
  sys.controller = RationalFilter::gain(k);
  sys.sigma_e = 1.0;
  sys.sigma_r = 1.0;
  return sys;
}

TEST(ClosedLoopRadius, FirstOrderLoopIsAMinusBK) {
  for (double a : {0.9, 0.5, -0.3}) {
    for (double b : {1.0, 0.5}) {
      for (double k : {0.0, 0.4, -0.2}) {
        EXPECT_NEAR(closed_loop_stability_radius(first_order_loop(a, b, k)), std::abs(a - b * k),
                    1e-12);
      }
    }
  }
}

TEST(ClosedLoopRadius, OpenLoopIsMaxOfDenominators) {
  LinearClosedLoopSystem sys = testing::open_loop_arx();
  sys.noise = RationalFilter({1.0}, {1.0, -0.8});
  EXPECT_NEAR(closed_loop_stability_radius(sys), 0.8, 1e-12);
  sys.noise = RationalFilter({1.0}, {1.0, -0.2});
  EXPECT_NEAR(closed_loop_stability_radius(sys), 0.5, 1e-12);
}

TEST(ClosedLoopRadius, NoFeedbackReducesToPlantPole) {
  EXPECT_NEAR(closed_loop_stability_radius(first_order_loop(0.9, 1.0, 0.0)), 0.9, 1e-12);
}

TEST(ClosedLoopRadius, UnitCircleCancellationIsReported) {
  // Integrator plant q^-1 / (1 - q^-1) with an integrating noise filter whose
  // pole at z = 1 is cancelled by a differencing controller zero.
  LinearClosedLoopSystem sys;
  sys.plant = RationalFilter({0.0, 1.0}, {1.0, -1.0});
  sys.noise = RationalFilter::gain(1.0);
  sys.controller = RationalFilter::fir(ShiftPolynomial{1.0, -1.0});
  sys.sigma_e = 1.0;
  EXPECT_THROW(closed_loop_stability_radius(sys), UnitCircleCancellationError);
}

TEST(Simulate, MemorylessLoopIsWhite) {
  const std::size_t T = 100000;
  const auto traj = simulate_linear_closed_loop(testing::white_signals(), T, make_rng(1, 0), 0);
  const auto y = traj.y.reals();
  double c0 = 0, c1 = 0;
  for (std::size_t t = 0; t < T; ++t) c0 += y[t] * y[t];
  for (std::size_t t = 1; t < T; ++t) c1 += y[t] * y[t - 1];
  EXPECT_LT(std::abs(c1 / c0), 4.0 / std::sqrt(double(T)));
}

TEST(Simulate, CrossCovarianceMatchesGain) {
  LinearClosedLoopSystem sys;
  sys.plant = RationalFilter::fir(ShiftPolynomial{0.0, 0.5});
  sys.noise = RationalFilter::gain(1.0);
  sys.controller = RationalFilter::gain(0.0);
  sys.sigma_e = 0.1;
  sys.sigma_r = 1.0;
  const std::size_t T = 100000;
  const auto traj = simulate_linear_closed_loop(sys, T, make_rng(2, 0), 100);
  const auto u = traj.u.reals();
  const auto y = traj.y.reals();
  double s = 0.0;
  for (std::size_t t = 1; t < T; ++t) s += y[t] * u[t - 1];
  EXPECT_NEAR(s / double(T - 1), 0.5, 0.02);
}

TEST(Simulate, UnstableLoopThrows) {
  EXPECT_THROW(simulate_linear_closed_loop(first_order_loop(0.9, 1.0, -0.5), 10, make_rng(1, 0), 0),
               UnstableSystemError);
}

TEST(Simulate, ExactLengthAndFiniteForManySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto traj =
        simulate_linear_closed_loop(testing::ar1_feedback_loop(), 257, make_rng(seed, 0), 50);
    ASSERT_EQ(traj.length(), 257u);
    ASSERT_EQ(traj.u.length(), 257u);
    EXPECT_EQ(traj.t0, 51);
    for (double v : traj.y.reals()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Simulate, OutputIgnoresReferenceWithoutFeedbackOrReference) {
  auto sys = testing::ar1_output();
  const auto base = make_rng(3, 0);
  const auto a = simulate_linear_closed_loop(sys, 500, NoiseStreams{base.child(0), make_rng(9, 1)}, 10);
  const auto b = simulate_linear_closed_loop(sys, 500, NoiseStreams{base.child(0), make_rng(9, 2)}, 10);
  for (std::size_t t = 0; t < 500; ++t) ASSERT_EQ(a.y.real(t), b.y.real(t));
}

TEST(Simulate, MatchesDirectRecursion) {
  // G = q^-1 / A and H = 1 / A with A = 1 - 0.5 q^-1 give
  // y_t = 0.5 y_{t-1} + u_{t-1} + e_t, and u_t = r_t - 0.4 y_t.
  auto sys = testing::open_loop_arx();
  sys.controller = RationalFilter::gain(0.4);
  const std::size_t N = 200;
  auto rng = make_rng(6, 0);
  std::vector<double> e(N), r(N);
  for (std::size_t t = 0; t < N; ++t) {
    e[t] = rng.normal();
    r[t] = rng.normal();
  }
  const auto sig = run_closed_loop(sys, e, r);
  double y_prev = 0, u_prev = 0;
  for (std::size_t t = 0; t < N; ++t) {
    const double y = 0.5 * y_prev + u_prev + e[t];
    const double u = r[t] - 0.4 * y;
    ASSERT_NEAR(sig.y[t], y, 1e-12);
    ASSERT_NEAR(sig.u[t], u, 1e-12);
    y_prev = y;
    u_prev = u;
  }
}

TEST(BurnIn, FormulaAndFloor) {
  EXPECT_EQ(burn_in_for_radius(0.5, 1e-8), 100u);
  EXPECT_EQ(burn_in_for_radius(0.99, 1e-8), 1833u);
  EXPECT_EQ(burn_in_for_radius(0.0, 1e-8), 100u);
  EXPECT_THROW(burn_in_for_radius(1.0, 1e-8), UnstableSystemError);
  EXPECT_EQ(burn_in_length(first_order_loop(0.99, 1.0, 0.0)), 1833u);
}

TEST(SystemValidation, RejectsBrokenInvariants) {
  auto sys = testing::open_loop_arx();
  sys.plant = RationalFilter::gain(1.0);
  EXPECT_THROW(sys.validate(), InvalidArgument);
  sys = testing::open_loop_arx();
  sys.noise = RationalFilter::fir(ShiftPolynomial{1.0, 1.5});
  EXPECT_THROW(sys.validate(), NonMinimumPhaseError);
  sys = testing::open_loop_arx();
  sys.sigma_e = 0.0;
  EXPECT_THROW(sys.validate(), InvalidArgument);
}

}  // namespace
}  // namespace loopid
