#include "loopid/diagnostics/excitation.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "loopid/core/error.hpp"

namespace loopid {

double RegressorMoment::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dimension; ++i) t += at(i, i);
  return t;
}

ExcitationVerdict persistent_excitation_check(const Trajectory& traj, const RegressorSpec& spec,
                                              std::optional<double> threshold) {
  const std::size_t dim = spec.dimension();
  if (dim == 0) throw InvalidArgument("regressor has no lags");
  if (traj.u.space() != ObsSpace::continuous(1) || traj.y.space() != ObsSpace::continuous(1)) {
    throw InvalidArgument("excitation check needs scalar continuous u and y");
  }
  const std::size_t T = traj.length();
  if (T < 10 * dim) {
    throw InvalidArgument("excitation check: T = " + std::to_string(T) +
                          " is below 10 * dim = " + std::to_string(10 * dim));
  }
  const auto u = traj.u.reals();
  const auto y = traj.y.reals();
  const std::size_t start = std::max(spec.u_lags, spec.y_lags);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  Eigen::VectorXd phi(static_cast<Eigen::Index>(dim));
  for (std::size_t t = start; t < T; ++t) {
    for (std::size_t k = 0; k < spec.u_lags; ++k) phi[static_cast<Eigen::Index>(k)] = u[t - 1 - k];
    for (std::size_t k = 0; k < spec.y_lags; ++k) {
      phi[static_cast<Eigen::Index>(spec.u_lags + k)] = y[t - 1 - k];
    }
    M.selfadjointView<Eigen::Lower>().rankUpdate(phi);
  }
  M = M.selfadjointView<Eigen::Lower>();
  const std::size_t n = T - start;
  M /= static_cast<double>(n);

  ExcitationVerdict out;
  out.moment.dimension = dim;
  out.moment.sample_size = n;
  out.moment.matrix.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      out.moment.matrix[i * dim + j] =
          M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  out.moment.min_eigenvalue = eig.eigenvalues()[0];
  out.threshold = threshold ? *threshold : 1e-8 * out.moment.trace() / static_cast<double>(dim);
  out.persistently_exciting = out.moment.min_eigenvalue > out.threshold;
  return out;
}

ExcitationVerdict persistent_excitation_check(const DataSource& source, std::size_t T,
                                              const RngStream& rng, const RegressorSpec& spec,
                                              std::optional<double> threshold) {
  return persistent_excitation_check(source.sample(T, rng), spec, threshold);
}

}  // namespace loopid
