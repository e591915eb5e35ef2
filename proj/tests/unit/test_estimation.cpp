#include <gtest/gtest.h>

#include <cmath>

#include "../support/systems.hpp"
#include "loopid/core/error.hpp"
#include "loopid/estimation/grid.hpp"
#include "loopid/estimation/least_squares.hpp"
#include "loopid/estimation/projected_gradient.hpp"
#include "loopid/estimation/tabular_fit.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/markov/chain.hpp"
#include "loopid/models/gaussian_predictor.hpp"
#include "loopid/models/tabular.hpp"

namespace loopid {
namespace {

const Box kArxBox({{-1.0, 1.0}, {0.0, 2.0}});

Trajectory noise_free_arx(std::size_t T) {
  auto rng = make_rng(1, 0);
  std::vector<double> u(T), y(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) u[t] = rng.normal();
  for (std::size_t t = 1; t < T; ++t) y[t] = 0.5 * y[t - 1] + 1.0 * u[t - 1];
  return Trajectory::scalar(u, y);
}

// Independent 2x2 normal equations for y_t = a y_{t-1} + b u_{t-1}.
std::vector<double> normal_equations_2x2(const Trajectory& traj) {
  double syy = 0, syu = 0, suu = 0, ry = 0, ru = 0;
  for (std::size_t t = 1; t < traj.length(); ++t) {
    const double y1 = traj.y.real(t - 1), u1 = traj.u.real(t - 1), y = traj.y.real(t);
    syy += y1 * y1; syu += y1 * u1; suu += u1 * u1; ry += y * y1; ru += y * u1;
  }
  const double det = syy * suu - syu * syu;
  return {(suu * ry - syu * ru) / det, (syy * ru - syu * ry) / det};
}

TEST(LeastSquares, NoiseFreeDataIsInterpolated) {
  const auto fit = fit_arx_least_squares(noise_free_arx(100), 1, 1, 1.0, kArxBox);
  EXPECT_NEAR(fit.theta_hat[0], 0.5, 1e-9);
  EXPECT_NEAR(fit.theta_hat[1], 1.0, 1e-9);
  EXPECT_EQ(fit.method, FitMethod::least_squares);
}

TEST(LeastSquares, MatchesHandNormalEquations) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 2000, make_rng(2, 0), 500);
  const auto fit = fit_arx_least_squares(traj, 1, 1, 0.1, kArxBox);
  const auto oracle = normal_equations_2x2(traj);
  EXPECT_NEAR(fit.theta_hat[0], oracle[0], 1e-10);
  EXPECT_NEAR(fit.theta_hat[1], oracle[1], 1e-10);
}

TEST(LeastSquares, ZeroInputIsNotPersistentlyExciting) {
  const auto traj = simulate_linear_closed_loop(testing::ar1_output(), 1000, make_rng(3, 0), 100);
  try {
    fit_arx_least_squares(traj, 1, 1, 1.0, kArxBox);
    FAIL() << "expected NotPersistentlyExcitingError";
  } catch (const NotPersistentlyExcitingError& e) {
    EXPECT_NE(std::string(e.what()).find("u"), std::string::npos);
  }
}

TEST(LeastSquares, TooShortTrajectoryThrows) {
  EXPECT_THROW(fit_arx_least_squares(noise_free_arx(2), 1, 1, 1.0, kArxBox), InvalidArgument);
}

TEST(LeastSquares, ConsistentAndAgreesWithGrid) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 200000, make_rng(4, 0), 1000);
  const auto fit = fit_arx_least_squares(traj, 1, 1, 0.1, kArxBox);
  EXPECT_LT(max_abs_difference(fit.theta_hat.values(), std::vector<double>{0.5, 1.0}), 0.01);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const auto grid = cartesian_grid(Box({{0.45, 0.55}, {0.95, 1.05}}), 0.005);
  const auto best = grid_maximize(model, traj, grid);
  EXPECT_LE(max_abs_difference(best.theta_hat.values(), fit.theta_hat.values()), 0.0025 + 1e-12);
}

TEST(LeastSquares, OutOfBoxFallsBackToProjectedGradient) {
  const Box narrow({{0.0, 0.3}, {0.0, 2.0}});
  const auto fit = fit_arx_least_squares(noise_free_arx(500), 1, 1, 1.0, narrow);
  EXPECT_EQ(fit.diagnostics.at("box_active"), "true");
  EXPECT_NEAR(fit.theta_hat[0], 0.3, 1e-9);
  EXPECT_TRUE(narrow.contains(fit.theta_hat.values()));
}

TEST(Tabular, DeterministicOrbitConcentratesOnSuccessor) {
  // Deterministic dynamics next(s, a) = (s + 2a + 1) mod 3 with a fixed action
  // pattern; every (s, a) is visited and has a single successor.
  auto next = [](std::uint32_t s, std::uint32_t a) { return (s + 2 * a + 1) % 3; };
  std::vector<std::uint32_t> states{0}, actions;
  for (std::size_t t = 0; t < 60; ++t) {
    actions.push_back((t / 2 + t / 5) % 2);
    if (t + 1 < 60) states.push_back(next(states.back(), actions.back()));
  }
  const auto traj = Trajectory::symbolic(actions, 2, states, 3);
  const double floor = 1e-3;
  const auto fit = fit_tabular(traj, 3, 2, floor);
  std::vector<bool> seen(6, false);
  for (std::size_t t = 1; t < states.size(); ++t) seen[states[t - 1] * 2 + actions[t - 1]] = true;
  for (std::uint32_t s = 0; s < 3; ++s) {
    for (std::uint32_t a = 0; a < 2; ++a) {
      ASSERT_TRUE(seen[s * 2 + a]) << "pattern misses (" << s << "," << a << ")";
      EXPECT_NEAR(fit.model.prob(s, a, next(s, a)), 1.0 - 2 * floor, 1e-12);
    }
  }
  EXPECT_TRUE(fit.unvisited.empty());
}

TEST(Tabular, ErgodicChainWithinTotalVariationBound) {
  const auto chain = testing::three_state_chain();
  const auto traj = simulate_cmc(chain, 100000, make_rng(5, 0), StationaryStart{});
  const auto fit = fit_tabular(traj, 3, 2, 1e-4);
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      double tv = 0.0;
      for (std::size_t n = 0; n < 3; ++n) tv += std::abs(fit.model.prob(s, a, n) - chain.transition(s, a, n));
      worst = std::max(worst, 0.5 * tv);
    }
  }
  EXPECT_LT(worst, 0.03);
}

TEST(Tabular, UnreachableRowIsUniformAndFlagged) {
  const auto chain = testing::three_state_chain_deficient();
  const auto traj = simulate_cmc(chain, 20000, make_rng(6, 0), StationaryStart{});
  const auto fit = fit_tabular(traj, 3, 2, 1e-4);
  ASSERT_EQ(fit.unvisited, (std::vector<std::size_t>{chain.phi_index(0, 1)}));
  for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(fit.model.prob(0, 1, n), 1.0 / 3.0, 1e-12);
  EXPECT_NE(fit.result.diagnostics.at("unvisited").find("(0,1)"), std::string::npos)
      << fit.result.diagnostics.at("unvisited");
}

TEST(Tabular, RowsSumToOneAndRespectFloor) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto traj = simulate_cmc(testing::three_state_chain(), 50 + 37 * seed, make_rng(seed, 0),
                                   StationaryStart{});
    const double floor = 1e-2;
    const auto fit = fit_tabular(traj, 3, 2, floor);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (double p : fit.model.row(s, a)) {
          EXPECT_GE(p, floor);
          sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(Tabular, OutOfRangeSymbolThrows) {
  const auto traj = Trajectory::symbolic({0, 1}, 2, {0, 3}, 4);
  EXPECT_THROW(fit_tabular(traj, 3, 2, 1e-3), InvalidArgument);
}

TEST(ProjectedGradient, MatchesLeastSquaresInside) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 5000, make_rng(7, 0), 500);
  const auto ls = fit_arx_least_squares(traj, 1, 1, 0.1, kArxBox);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const auto pg = fit_projected_gradient(model, traj, ParameterVector(kArxBox.center(), kArxBox));
  EXPECT_TRUE(pg.converged);
  EXPECT_LT(max_abs_difference(pg.theta_hat.values(), ls.theta_hat.values()), 1e-6);
}

TEST(ProjectedGradient, BoundaryOptimumWhenBoxExcludesTheLsSolution) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 5000, make_rng(8, 0), 500);
  const Box narrow({{0.0, 0.3}, {0.0, 2.0}});
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const auto pg = fit_projected_gradient(model, traj, ParameterVector({0.1, 0.5}, narrow));
  EXPECT_NEAR(pg.theta_hat[0], 0.3, 1e-12);
  const auto grid = grid_maximize(model, traj, cartesian_grid(narrow, 0.01));
  EXPECT_NEAR(grid.theta_hat[0], 0.3, 1e-12);
  EXPECT_LE(std::abs(grid.theta_hat[1] - pg.theta_hat[1]), 0.005 + 1e-12);
}

TEST(ProjectedGradient, StartingAtTheOptimumStaysThere) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 5000, make_rng(9, 0), 500);
  const auto ls = fit_arx_least_squares(traj, 1, 1, 0.1, kArxBox);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const auto pg = fit_projected_gradient(model, traj, ls.theta_hat);
  EXPECT_TRUE(pg.converged);
  EXPECT_LE(pg.iterations, 1u);
  EXPECT_LT(max_abs_difference(pg.theta_hat.values(), ls.theta_hat.values()), 1e-9);
}

TEST(ProjectedGradient, ObjectiveNeverDecreasesAcrossIterationBudgets) {
  const auto traj = simulate_linear_closed_loop(testing::armax_s1_loop(), 2000, make_rng(10, 0), 200);
  const auto model = GaussianPredictorModel::armax(0, 1, 1, 1.0);
  const Box box({{0.0, 2.0}, {-0.9, 0.9}});
  double prev = -INFINITY;
  for (std::size_t budget : {0, 1, 2, 3, 5, 8, 13}) {
    ProjectedGradientOptions opts;
    opts.max_iterations = budget;
    const auto fit = fit_projected_gradient(model, traj, ParameterVector({0.2, -0.5}, box), opts);
    EXPECT_GE(fit.objective_value, prev);
    prev = fit.objective_value;
  }
}

TEST(ProjectedGradient, NonFiniteStartThrows) {
  const auto traj = simulate_linear_closed_loop(testing::armax_s1_loop(), 200, make_rng(10, 0), 200);
  const auto model = GaussianPredictorModel::armax(0, 1, 1, 1.0);
  const Box box({{0.0, 2.0}, {-2.0, 2.0}});
  EXPECT_THROW(fit_projected_gradient(model, traj, ParameterVector({1.0, 1.5}, box)), InvalidArgument);
}

TEST(GradientCheck, AnalyticArxGradientMatchesFiniteDifferences) {
  const auto model = GaussianPredictorModel::arx(2, 2, 0.5);
  auto rng = make_rng(11, 0);
  for (int probe = 0; probe < 100; ++probe) {
    const auto traj = simulate_linear_closed_loop(testing::ar1_feedback_loop(), 200,
                                                  make_rng(100 + probe, 0), 100);
    const std::vector<double> theta{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1,
                                    rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
    const auto analytic = *model.avg_loglik_gradient(theta, traj);
    const auto numeric = finite_difference_gradient(model, theta, traj, 1e-5);
    double diff = 0, scale = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
      scale = std::max(scale, std::abs(analytic[i]));
    }
    EXPECT_LT(diff / scale, 1e-6);
  }
}

TEST(Grid, SingletonAndOrdering) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 1000, make_rng(12, 0), 100);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const std::vector<ParameterVector> one{ParameterVector({0.1, 0.2}, kArxBox)};
  EXPECT_EQ(grid_maximize(model, traj, one).theta_hat[0], 0.1);
  const std::vector<ParameterVector> two{ParameterVector({-0.5, 0.2}, kArxBox),
                                         ParameterVector({0.5, 1.0}, kArxBox)};
  EXPECT_EQ(grid_maximize(model, traj, two).theta_hat[0], 0.5);
  EXPECT_THROW(grid_maximize(model, traj, std::vector<ParameterVector>{}), InvalidArgument);
}

TEST(Grid, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax_lowest_index(std::vector<double>{1.0, 3.0, 2.0, 3.0}), 1u);
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 1000, make_rng(12, 0), 100);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const std::vector<ParameterVector> dup{ParameterVector({0.0, 0.0}, kArxBox),
                                         ParameterVector({0.5, 1.0}, kArxBox),
                                         ParameterVector({0.5, 1.0}, kArxBox)};
  EXPECT_EQ(grid_maximize(model, traj, dup).diagnostics.at("grid_index"), "1");
}

TEST(Grid, Ar1GridPicksPointNearestLeastSquares) {
  const auto traj = simulate_linear_closed_loop(testing::ar1_output(), 100000, make_rng(13, 0), 200);
  const auto model = GaussianPredictorModel::armax(1, 0, 0, 1.0);
  const Box box({{0.0, 0.9}});
  const auto grid = cartesian_grid(box, std::vector<std::size_t>{41});
  const auto fit = grid_maximize(model, traj, grid);
  // The objective is a quadratic in a, so the grid winner is the point
  // nearest its vertex sum y_t y_{t-1} / sum y_{t-1}^2.
  double num = 0, den = 0;
  for (std::size_t t = 1; t < traj.length(); ++t) {
    num += traj.y.real(t) * traj.y.real(t - 1);
    den += traj.y.real(t - 1) * traj.y.real(t - 1);
  }
  const double a_hat = num / den;
  double nearest = grid[0][0];
  for (const auto& p : grid) if (std::abs(p[0] - a_hat) < std::abs(nearest - a_hat)) nearest = p[0];
  EXPECT_EQ(fit.theta_hat[0], nearest);
  double nearest_truth = grid[0][0];
  for (const auto& p : grid) if (std::abs(p[0] - 0.5) < std::abs(nearest_truth - 0.5)) nearest_truth = p[0];
  EXPECT_EQ(fit.theta_hat[0], nearest_truth);
}

TEST(ScaleInvariance, ArgmaxDoesNotDependOnSigma) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 3000, make_rng(14, 0), 200);
  const auto grid = cartesian_grid(Box({{0.3, 0.7}, {0.8, 1.2}}), 0.01);
  std::vector<double> ls_first, grid_first;
  for (double sigma : {0.1, 1.0, 10.0}) {
    const auto ls = fit_arx_least_squares(traj, 1, 1, sigma, kArxBox);
    const auto g = grid_maximize(GaussianPredictorModel::arx(1, 1, sigma), traj, grid);
    const std::vector<double> l(ls.theta_hat.values().begin(), ls.theta_hat.values().end());
    const std::vector<double> gv(g.theta_hat.values().begin(), g.theta_hat.values().end());
    if (ls_first.empty()) {
      ls_first = l;
      grid_first = gv;
    }
    EXPECT_EQ(l, ls_first);
    EXPECT_EQ(gv, grid_first);
  }
}

TEST(FitResult, ObjectiveMatchesModelEvaluation) {
  const auto traj = simulate_linear_closed_loop(testing::open_loop_arx(), 3000, make_rng(15, 0), 200);
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const auto ls = fit_arx_least_squares(traj, 1, 1, 0.1, kArxBox);
  const auto pg = fit_projected_gradient(model, traj, ParameterVector(kArxBox.center(), kArxBox));
  const auto g = grid_maximize(model, traj, cartesian_grid(Box({{0.4, 0.6}, {0.9, 1.1}}), 0.02));
  for (const auto* fit : {&ls, &pg, &g}) {
    EXPECT_NEAR(fit->objective_value, avg_loglik(model, fit->theta_hat.values(), traj), 1e-10);
    EXPECT_TRUE(fit->theta_hat.box().contains(fit->theta_hat.values()));
  }
}

}  // namespace
}  // namespace loopid
