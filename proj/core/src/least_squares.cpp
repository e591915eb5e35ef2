#include "loopid/estimation/least_squares.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <sstream>

#include "loopid/core/error.hpp"
#include "loopid/estimation/projected_gradient.hpp"
#include "loopid/models/gaussian_predictor.hpp"

namespace loopid {

namespace {

// Relative eigenvalue threshold below which the moment matrix counts as
// singular.
constexpr double kSingularRatio = 1e-10;

bool block_singular(const Eigen::MatrixXd& block) {
  if (block.rows() == 0) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block, Eigen::EigenvaluesOnly);
  const double scale = std::max(block.trace() / static_cast<double>(block.rows()), 1e-300);
  return solver.eigenvalues().minCoeff() <= kSingularRatio * scale;
}

}  // namespace

FitResult fit_arx_least_squares(const Trajectory& traj, std::size_t n_a, std::size_t n_b,
                                double sigma, const Box& box) {
  const auto model = GaussianPredictorModel::arx(n_a, n_b, sigma);
  const std::size_t n = model.dimension();
  if (box.dimension() != n) throw InvalidArgument("box dimension does not match ARX orders");
  if (traj.length() <= n_a + n_b) {
    throw InvalidArgument("trajectory too short for ARX(" + std::to_string(n_a) + "," +
                          std::to_string(n_b) + "): T = " + std::to_string(traj.length()));
  }
  const RegressionMoments moments = regression_moments(model, traj);
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i)) = moments.m_yphi[i];
    for (std::size_t j = 0; j < n; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = moments.phiphi(i, j);
    }
  }
  if (block_singular(M)) {
    const auto ia = static_cast<Eigen::Index>(n_a);
    const auto ib = static_cast<Eigen::Index>(n_b);
    std::string where = "joint y/u lags (collinear)";
    if (block_singular(M.bottomRightCorner(ib, ib))) {
      where = "u-block";
    } else if (n_a > 0 && block_singular(M.topLeftCorner(ia, ia))) {
      where = "y-block";
    }
    throw NotPersistentlyExcitingError(
        "regressor moment matrix is singular in the " + where +
        ": the regressor signal is not persistently exciting");
  }
  const Eigen::VectorXd solution = M.ldlt().solve(m);
  std::vector<double> theta(solution.data(), solution.data() + solution.size());

  if (box.contains(theta)) {
    FitResult fit{ParameterVector(theta, box), avg_loglik(model, theta, traj),
                  FitMethod::least_squares, 1, true, {}};
    fit.diagnostics["box_active"] = "false";
    return fit;
  }
  FitResult fit = fit_projected_gradient(model, traj, ParameterVector::projected(theta, box));
  fit.method = FitMethod::least_squares;
  fit.diagnostics["box_active"] = "true";
  std::ostringstream unconstrained;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    unconstrained << (i ? ";" : "") << format_real(theta[i]);
  }
  fit.diagnostics["unconstrained_theta"] = unconstrained.str();
  return fit;
}

}  // namespace loopid
