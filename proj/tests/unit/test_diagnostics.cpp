#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../support/systems.hpp"
#include "loopid/core/error.hpp"
#include "loopid/diagnostics/data_source.hpp"
#include "loopid/diagnostics/decay.hpp"
#include "loopid/diagnostics/drift.hpp"
#include "loopid/diagnostics/excitation.hpp"
#include "loopid/diagnostics/kl.hpp"
#include "loopid/diagnostics/objective.hpp"
#include "loopid/diagnostics/stability_probe.hpp"
#include "loopid/estimation/grid.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/markov/chain.hpp"
#include "loopid/models/gaussian_predictor.hpp"
#include "loopid/models/tabular.hpp"

namespace loopid {
namespace {

double kl_row(std::span<const double> p, std::span<const double> q) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) v += p[i] * std::log(p[i] / q[i]);
  }
  return v;
}

// 2 states, 2 actions, action chooses the next state; uniform policy.
ControlledMarkovChain action_driven_chain() {
  return ControlledMarkovChain(2, 2, {1, 0, 0, 1, 1, 0, 0, 1}, {0.5, 0.5, 0.5, 0.5});
}

// Two-state chain with P(0 -> 1) = alpha, P(1 -> 0) = beta and a constant
// (irrelevant) action.
ControlledMarkovChain two_state(double alpha, double beta) {
  return ControlledMarkovChain(2, 2, {1 - alpha, alpha, 1 - alpha, alpha, beta, 1 - beta, beta, 1 - beta},
                               {1.0, 0.0, 1.0, 0.0});
}

// Tied family: every row equals (1 - theta, theta).
TabularFamily tied_family(double floor) {
  return TabularFamily(
      1,
      [floor](std::span<const double> th) {
        std::vector<double> probs;
        for (int row = 0; row < 4; ++row) {
          probs.push_back(1 - th[0]);
          probs.push_back(th[0]);
        }
        return TabularMarkovModel::from_probabilities(2, 2, probs, floor);
      },
      "tied");
}

TEST(DecayFit, RecoversExactGeometricLaw) {
  const std::vector<std::size_t> s{1, 2, 3, 4, 5, 6};
  std::vector<double> gaps, se(6, 0.0);
  for (auto v : s) gaps.push_back(3.0 * std::pow(0.4, double(v)));
  const auto fit = fit_exponential_decay(s, gaps, se);
  EXPECT_EQ(fit.status, DecayStatus::fitted);
  EXPECT_NEAR(fit.lambda_hat, 0.4, 1e-12);
  EXPECT_NEAR(fit.C_hat, 3.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(DecayFit, ZeroAndNoiseFloorHandling) {
  const std::vector<std::size_t> s{1, 2, 3};
  const std::vector<double> zeros(3, 0.0);
  EXPECT_EQ(fit_exponential_decay(s, zeros, zeros).status, DecayStatus::exact_finite_memory);
  // Third point sits below 10 x its stderr and is dropped.
  const auto fit = fit_exponential_decay(s, std::vector<double>{1.0, 0.5, 0.01},
                                         std::vector<double>{0.01, 0.01, 0.01});
  EXPECT_EQ(fit.used_in_fit, (std::vector<bool>{true, true, false}));
  EXPECT_NEAR(fit.lambda_hat, 0.5, 1e-12);
  const auto lone = fit_exponential_decay(s, std::vector<double>{1.0, 0.0, 0.0}, zeros);
  EXPECT_EQ(lone.status, DecayStatus::insufficient_points);
}

TEST(S1Decay, TabularModelHasExactFiniteMemory) {
  const auto source = DataSource::markov(testing::three_state_chain());
  const auto family = TabularFamily::weights(3, 2, 1e-3);
  const std::vector<std::vector<double>> thetas{testing::three_state_transitions(),
                                                std::vector<double>(18, 1.0)};
  const std::vector<std::size_t> s{1, 2, 5};
  const auto res = estimate_s1_decay(source, family, thetas, s, 10, 30, make_rng(1, 0));
  for (const auto& fit : res.per_theta) {
    EXPECT_EQ(fit.status, DecayStatus::exact_finite_memory);
    for (double g : fit.mean_gaps) EXPECT_EQ(g, 0.0);
  }
}

TEST(S1Decay, ArmaxPolePointFiveDecaysAtQuarter) {
  const auto source = DataSource::linear(testing::armax_s1_loop());
  const auto model = GaussianPredictorModel::armax(0, 1, 1, 1.0);
  const std::vector<std::vector<double>> thetas{{1.0, 0.5}};
  const std::vector<std::size_t> s{1, 2, 3, 4, 5, 6, 7, 8};
  const auto res = estimate_s1_decay(source, model, thetas, s, 60, 1000, make_rng(2, 0));
  const auto& fit = res.worst_fit();
  EXPECT_EQ(fit.status, DecayStatus::fitted);
  EXPECT_GE(fit.lambda_hat, 0.2);
  EXPECT_LE(fit.lambda_hat, 0.3);
}

TEST(S1Decay, ArxGapsVanishBeyondTheLag) {
  const auto source = DataSource::linear(testing::open_loop_arx());
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const std::vector<std::vector<double>> thetas{{0.5, 1.0}, {-0.3, 0.2}};
  const std::vector<std::size_t> s{1, 2, 3};
  const auto res = estimate_s1_decay(source, model, thetas, s, 20, 30, make_rng(3, 0));
  for (const auto& fit : res.per_theta) EXPECT_EQ(fit.status, DecayStatus::exact_finite_memory);
}

TEST(S1Decay, Preconditions) {
  const auto source = DataSource::linear(testing::open_loop_arx());
  const auto model = GaussianPredictorModel::arx(1, 1, 0.1);
  const std::vector<std::vector<double>> thetas{{0.5, 1.0}};
  EXPECT_THROW(estimate_s1_decay(source, model, thetas, std::vector<std::size_t>{1, 2}, 20, 29,
                                 make_rng(3, 0)),
               InvalidArgument);
  EXPECT_THROW(estimate_s1_decay(source, model, thetas, std::vector<std::size_t>{1, 20}, 20, 30,
                                 make_rng(3, 0)),
               InvalidArgument);
}

TEST(AsymptoticObjective, TabularTrueModelIsNegativeConditionalEntropy) {
  // p(Phi = 0) = 5/6 for rows (0.9, 0.1), (0.5, 0.5).
  const auto chain = two_state(0.1, 0.5);
  const double exact = 5.0 / 6.0 * (0.9 * std::log(0.9) + 0.1 * std::log(0.1)) +
                       1.0 / 6.0 * std::log(0.5);
  EXPECT_NEAR(true_model_objective(chain), exact, 1e-12);
  const auto family = tied_family(1e-6);
  const TabularFamily truth(
      1,
      [](std::span<const double>) {
        return TabularMarkovModel::from_probabilities(2, 2, {0.9, 0.1, 0.9, 0.1, 0.5, 0.5, 0.5, 0.5},
                                                      1e-6);
      },
      "truth");
  const auto est = estimate_asymptotic_objective(DataSource::markov(chain), truth,
                                                 std::vector<double>{0.0}, 20000, 200, make_rng(4, 0));
  EXPECT_TRUE(est.within_ci(exact)) << est.mean << " +- " << est.ci_half_width << " vs " << exact;
  EXPECT_GT(est.stderr, 0.0);
}

TEST(AsymptoticObjective, GaussianTrueModel) {
  auto sys = testing::open_loop_arx();
  sys.sigma_e = 1.0;
  const auto source = DataSource::linear(sys);
  const auto model = GaussianPredictorModel::arx(1, 1, 1.0);
  const std::vector<ParameterVector> thetas{ParameterVector({0.5, 1.0}, Box({{-1, 1}, {-2, 2}})),
                                            ParameterVector({-1.0, -2.0}, Box({{-1, 1}, {-2, 2}}))};
  const auto est = estimate_asymptotic_objective(source, model, thetas, 20000, 20, make_rng(5, 0));
  const double exact = -std::log(std::sqrt(2 * std::numbers::pi)) - 0.5;
  EXPECT_TRUE(est[0].within_ci(exact)) << est[0].mean << " +- " << est[0].ci_half_width;
  EXPECT_LT(est[1].mean + est[1].ci_half_width, est[0].mean - est[0].ci_half_width);
}

TEST(UniformConvergence, SinglePointReducesToScalarGap) {
  const auto source = DataSource::linear(testing::ar1_output());
  const auto model = GaussianPredictorModel::armax(1, 0, 0, 1.0);
  const std::vector<ParameterVector> grid{ParameterVector({0.3}, Box({{0.0, 0.9}}))};
  const std::vector<std::size_t> Ts{100, 1000};
  const std::vector<std::uint64_t> seeds{4};
  const auto rng = make_rng(77, 0);
  const auto rep = uniform_convergence_gap(source, model, grid, Ts, seeds, rng, 10000);
  const double ref = avg_loglik(model, std::vector<double>{0.3}, source.sample(10000, rng));
  ASSERT_EQ(rep.rows.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const double LT = avg_loglik(model, std::vector<double>{0.3}, source.sample(Ts[k], make_rng(4, k)));
    EXPECT_NEAR(rep.rows[k].sup_gap, std::abs(LT - ref), 1e-12);
  }
}

TEST(UniformConvergence, Ar1GapShrinks) {
  const auto source = DataSource::linear(testing::ar1_output());
  const auto model = GaussianPredictorModel::armax(1, 0, 0, 1.0);
  const auto grid = cartesian_grid(Box({{0.0, 0.9}}), std::vector<std::size_t>{41});
  const std::vector<std::size_t> Ts{1000, 10000};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto rep = uniform_convergence_gap(source, model, grid, Ts, seeds, make_rng(6, 0), 1000000);
  ASSERT_EQ(rep.median_ratios.size(), 1u);
  EXPECT_LT(rep.median_ratios[0], 0.6);
  EXPECT_TRUE(rep.monotone);
}

TEST(UniformConvergence, DeterministicAndRejectsShortReference) {
  const auto source = DataSource::linear(testing::ar1_output());
  const auto model = GaussianPredictorModel::armax(1, 0, 0, 1.0);
  const auto grid = cartesian_grid(Box({{0.0, 0.9}}), std::vector<std::size_t>{5});
  const std::vector<std::size_t> Ts{100, 500};
  const std::vector<std::uint64_t> seeds{3, 8};
  const auto a = uniform_convergence_gap(source, model, grid, Ts, seeds, make_rng(1, 0), 5000);
  const auto b = uniform_convergence_gap(source, model, grid, Ts, seeds, make_rng(1, 0), 5000);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].sup_gap, b.rows[i].sup_gap);
  EXPECT_THROW(uniform_convergence_gap(source, model, grid, Ts, seeds, make_rng(1, 0), 4999),
               InvalidArgument);
}

TEST(KlBias, ZeroForTheTrueKernel) {
  const auto chain = testing::three_state_chain();
  const auto model = TabularMarkovModel::from_probabilities(3, 2, testing::three_state_transitions(), 0.05);
  EXPECT_NEAR(exact_kl_bias(chain, model), 0.0, 1e-15);
}

TEST(KlBias, HandComputedTwoStateValue) {
  const auto chain = two_state(0.1, 0.5);
  const auto model =
      TabularMarkovModel::from_probabilities(2, 2, {0.8, 0.2, 0.8, 0.2, 0.5, 0.5, 0.5, 0.5}, 1e-6);
  const double kl0 = 0.9 * std::log(0.9 / 0.8) + 0.1 * std::log(0.1 / 0.2);
  EXPECT_NEAR(exact_kl_bias(chain, model), 5.0 / 6.0 * kl0, 1e-12);
}

TEST(KlBias, UniformModelOnDeterministicDynamics) {
  const auto chain = action_driven_chain();
  const auto model = TabularMarkovModel::uniform(2, 2, 1e-6);
  EXPECT_NEAR(exact_kl_bias(chain, model), std::log(2.0), 1e-12);
}

TEST(KlBias, FloorKeepsMissingSupportFinite) {
  const auto chain = two_state(0.1, 0.5);
  const auto model =
      TabularMarkovModel::from_weights(2, 2, std::vector<double>{1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0}, 1e-6);
  const double bias = exact_kl_bias(chain, model);
  EXPECT_TRUE(std::isfinite(bias));
  const double expected = 5.0 / 6.0 * kl_row(chain.transition_row(0, 0), model.row(0, 0));
  EXPECT_NEAR(bias, expected, 1e-12);
  EXPECT_GT(bias, 5.0 / 6.0 * 0.1 * std::log(0.1 / 1e-6) - 0.1);
}

TEST(KlBias, NonnegativeAndZeroExactlyOnSupportAgreement) {
  const std::vector<double> levels{0.05, 0.3, 0.5, 0.7, 0.95};
  for (const auto& chain : {two_state(0.1, 0.5), two_state(0.3, 0.3)}) {
    const auto dist = stationary_distribution(chain);
    for (double q0 : levels) {
      for (double q1 : levels) {
        // Rows for the action that is never played differ freely.
        const auto model = TabularMarkovModel::from_probabilities(
            2, 2, {1 - q0, q0, 0.5, 0.5, q1, 1 - q1, 0.2, 0.8}, 1e-6);
        const double bias = exact_kl_bias(chain, dist, model);
        EXPECT_GE(bias, 0.0);
        double oracle = 0.0;
        for (std::size_t s = 0; s < 2; ++s) {
          oracle += dist.prob(s, 0) * kl_row(chain.transition_row(s, 0), model.row(s, 0));
        }
        EXPECT_NEAR(bias, oracle, 1e-12);
        const bool equal_on_support = std::abs(q0 - chain.transition(0, 0, 1)) < 1e-12 &&
                                      std::abs(q1 - chain.transition(1, 0, 0)) < 1e-12;
        EXPECT_EQ(bias == 0.0 || bias < 1e-15, equal_on_support) << q0 << " " << q1;
      }
    }
  }
}

TEST(KlOracle, PicksTheTrueKernelWhenPresent) {
  const auto chain = testing::three_state_chain();
  std::vector<TabularMarkovModel> grid{
      TabularMarkovModel::uniform(3, 2, 1e-3),
      TabularMarkovModel::from_probabilities(3, 2, testing::three_state_transitions(), 1e-3),
      TabularMarkovModel::from_weights(3, 2, std::vector<double>(18, 2.0), 1e-3)};
  const auto res = argmin_kl_oracle(chain, grid);
  EXPECT_EQ(res.best_index, 1u);
  EXPECT_NEAR(res.best_bias, 0.0, 1e-15);
  EXPECT_THROW(argmin_kl_oracle(chain, std::span<const TabularMarkovModel>{}), InvalidArgument);
}

TEST(KlOracle, MisspecifiedTiedFamilyMinimizer) {
  // Weighted KL over the tied family is minimized where theta equals the
  // stationary probability of moving into state 1, i.e. pi_1 = alpha / (alpha + beta).
  const double alpha = 0.15, beta = 0.35;
  const auto chain = two_state(alpha, beta);
  const auto family = tied_family(1e-6);
  const auto grid = cartesian_grid(Box({{0.01, 0.99}}), 0.01);
  const auto res = argmin_kl_oracle(chain, family, grid);
  EXPECT_NEAR(grid[res.best_index][0], alpha / (alpha + beta), 1e-9);
  // Fine sweep of the analytic objective agrees.
  const double pi1 = alpha / (alpha + beta);
  auto f = [&](double th) {
    return -((1 - pi1) * ((1 - alpha) * std::log(1 - th) + alpha * std::log(th)) +
             pi1 * (beta * std::log(1 - th) + (1 - beta) * std::log(th)));
  };
  double best = 0.01;
  for (double th = 0.01; th < 0.99; th += 1e-5) if (f(th) < f(best)) best = th;
  EXPECT_NEAR(best, pi1, 2e-5);
  EXPECT_THROW(argmin_kl_oracle(two_state(0.0, 0.0), family, grid), NonErgodicError);
}

TEST(Excitation, WhiteSignalsGiveIdentityMoment) {
  const auto source = DataSource::linear(testing::white_signals());
  const auto v = persistent_excitation_check(source, 100000, make_rng(7, 0), RegressorSpec{2, 2});
  EXPECT_TRUE(v.persistently_exciting);
  EXPECT_NEAR(v.moment.min_eigenvalue, 1.0, 0.05);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(v.moment.at(i, j), v.moment.at(j, i), 1e-10);
  }
}

TEST(Excitation, ConstantInputIsRankDeficient) {
  const std::size_t T = 1000;
  auto rng = make_rng(8, 0);
  std::vector<double> y(T);
  for (auto& x : y) x = rng.normal();
  const auto traj = Trajectory::scalar(std::vector<double>(T, 1.0), y);
  const auto v = persistent_excitation_check(traj, RegressorSpec{2, 0});
  EXPECT_FALSE(v.persistently_exciting);
}

TEST(Excitation, ProportionalFeedbackIsCollinear) {
  auto sys = testing::ar1_feedback_loop();
  sys.sigma_r = 0.0;
  const auto v = persistent_excitation_check(DataSource::linear(sys), 20000, make_rng(9, 0),
                                             RegressorSpec{1, 1});
  EXPECT_FALSE(v.persistently_exciting);
  EXPECT_LT(v.moment.min_eigenvalue, v.threshold);
}

TEST(Excitation, NeedsEnoughSamples) {
  const auto traj = Trajectory::scalar(std::vector<double>(39, 1.0), std::vector<double>(39, 1.0));
  EXPECT_THROW(persistent_excitation_check(traj, RegressorSpec{2, 2}), InvalidArgument);
}

TEST(RMeanProbe, MemorylessLoopHasNoGap) {
  const std::vector<std::size_t> s{1, 2, 3};
  const auto fit = r_mean_stability_probe(testing::white_signals(), 2, s, 10, 50, make_rng(1, 0));
  EXPECT_EQ(fit.status, DecayStatus::exact_finite_memory);
}

TEST(RMeanProbe, Ar1LoopPolePointFive) {
  const std::vector<std::size_t> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto r2 = r_mean_stability_probe(testing::ar1_feedback_loop(), 2, s, 40, 2000, make_rng(2, 0));
  EXPECT_GE(r2.lambda_hat, 0.2);
  EXPECT_LE(r2.lambda_hat, 0.3);
  const auto r4 = r_mean_stability_probe(testing::ar1_feedback_loop(), 4, s, 40, 5000, make_rng(2, 0));
  EXPECT_LT(r4.lambda_hat, 1.0);
  EXPECT_GT(r4.r_squared, 0.9);
  EXPECT_THROW(r_mean_stability_probe(testing::ar1_feedback_loop(), 3, s, 40, 10, make_rng(2, 0)),
               InvalidArgument);
}

TEST(Drift, StationaryAr1IsNotFlagged) {
  const auto rep = stationarity_drift_check(DataSource::linear(testing::ar1_output()), 40000,
                                            make_rng(3, 0));
  EXPECT_FALSE(rep.drift_detected);
}

TEST(Drift, LargeInitialTransientIsFlaggedInFirstWindow) {
  auto sys = testing::ar1_feedback_loop();
  sys.plant = RationalFilter::gain(0.0);
  sys.noise = RationalFilter({1.0}, {1.0, -0.99});
  const auto traj = simulate_linear_closed_loop(sys, 4000, make_rng(4, 0), 0,
                                                LoopInitialState{100.0 * sys.sigma_e});
  const auto rep = stationarity_drift_check(traj);
  EXPECT_TRUE(rep.drift_detected);
  bool first_flagged = false;
  for (const auto& w : rep.windows) first_flagged = first_flagged || (w.window == 0 && w.flagged);
  EXPECT_TRUE(first_flagged);
}

TEST(Drift, ConstantZeroSignalsAreNotFlagged) {
  const auto traj = Trajectory::scalar(std::vector<double>(1000, 0.0), std::vector<double>(1000, 0.0));
  EXPECT_FALSE(stationarity_drift_check(traj).drift_detected);
}

}  // namespace
}  // namespace loopid
