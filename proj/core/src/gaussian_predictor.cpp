#include "loopid/models/gaussian_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

struct ScalarData {
  std::span<const double> u;
  std::span<const double> y;
};

ScalarData scalar_data(const Trajectory& traj) {
  if (!traj.u.space().is_continuous() || traj.u.space().size() != 1 ||
      !traj.y.space().is_continuous() || traj.y.space().size() != 1) {
    throw InvalidArgument("Gaussian predictor models need scalar continuous u and y");
  }
  if (traj.u.length() != traj.y.length()) {
    throw InvalidArgument("trajectory has len(u) != len(y)");
  }
  return {traj.u.reals(), traj.y.reals()};
}

void check_minimum_phase(const ArmaxOrders& orders, std::span<const double> theta) {
  if (orders.n_c == 0) return;
  std::vector<double> c(orders.n_c + 1);
  c[0] = 1.0;
  for (std::size_t k = 0; k < orders.n_c; ++k) c[k + 1] = theta[orders.n_a + orders.n_b + k];
  const double radius = stability_radius(ShiftPolynomial(std::move(c)));
  if (radius >= 1.0) {
    std::ostringstream msg;
    msg << "noise model C(q) is not minimum-phase (root modulus " << radius << ")";
    throw NonMinimumPhaseError(msg.str());
  }
}

// Prediction errors on indices [begin, end) using only data inside the
// window; everything before `begin` is treated as zero.
void window_errors(const ArmaxOrders& o, std::span<const double> theta, ScalarData d,
                   std::size_t begin, std::size_t end, std::vector<double>& eps) {
  const double* a = theta.data();
  const double* b = a + o.n_a;
  const double* c = b + o.n_b;
  eps.assign(end - begin, 0.0);
  for (std::size_t t = begin; t < end; ++t) {
    const std::size_t avail = t - begin;  // number of in-window past samples
    double e = d.y[t];
    const std::size_t na = std::min(o.n_a, avail);
    for (std::size_t i = 1; i <= na; ++i) e -= a[i - 1] * d.y[t - i];
    const std::size_t nb = std::min(o.n_b, avail);
    for (std::size_t j = 1; j <= nb; ++j) e -= b[j - 1] * d.u[t - j];
    const std::size_t nc = std::min(o.n_c, avail);
    for (std::size_t k = 1; k <= nc; ++k) e -= c[k - 1] * eps[avail - k];
    eps[avail] = e;
  }
}

}  // namespace

GaussianPredictorModel::GaussianPredictorModel(ArmaxOrders orders, double sigma)
    : orders_(orders), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw InvalidArgument("Gaussian model sigma must be positive and finite");
  }
  log_norm_ = -std::log(std::sqrt(2.0 * std::numbers::pi) * sigma_);
  inv_two_var_ = 1.0 / (2.0 * sigma_ * sigma_);
}

GaussianPredictorModel GaussianPredictorModel::arx(std::size_t n_a, std::size_t n_b,
                                                   double sigma) {
  if (n_b < 1) throw InvalidArgument("ARX model needs n_b >= 1");
  return GaussianPredictorModel({n_a, n_b, 0}, sigma);
}

GaussianPredictorModel GaussianPredictorModel::armax(std::size_t n_a, std::size_t n_b,
                                                     std::size_t n_c, double sigma) {
  return GaussianPredictorModel({n_a, n_b, n_c}, sigma);
}

GaussianPredictorModel GaussianPredictorModel::with_sigma(double sigma) const {
  return GaussianPredictorModel(orders_, sigma);
}

RationalFilter GaussianPredictorModel::plant_filter(std::span<const double> theta) const {
  std::vector<double> b(orders_.n_b + 1, 0.0);
  for (std::size_t j = 0; j < orders_.n_b; ++j) b[j + 1] = theta[orders_.n_a + j];
  std::vector<double> a(orders_.n_a + 1, 0.0);
  a[0] = 1.0;
  for (std::size_t i = 0; i < orders_.n_a; ++i) a[i + 1] = -theta[i];
  return RationalFilter(ShiftPolynomial(std::move(b)), ShiftPolynomial(std::move(a)));
}

RationalFilter GaussianPredictorModel::noise_filter(std::span<const double> theta) const {
  std::vector<double> c(orders_.n_c + 1, 0.0);
  c[0] = 1.0;
  for (std::size_t k = 0; k < orders_.n_c; ++k) c[k + 1] = theta[orders_.n_a + orders_.n_b + k];
  std::vector<double> a(orders_.n_a + 1, 0.0);
  a[0] = 1.0;
  for (std::size_t i = 0; i < orders_.n_a; ++i) a[i + 1] = -theta[i];
  return RationalFilter(ShiftPolynomial(std::move(c)), ShiftPolynomial(std::move(a)));
}

double GaussianPredictorModel::log_density(double eps) const noexcept {
  return log_norm_ - eps * eps * inv_two_var_;
}

std::string GaussianPredictorModel::describe() const {
  std::ostringstream out;
  if (is_arx() && orders_.n_b >= 1) {
    out << "ARX(" << orders_.n_a << "," << orders_.n_b << ")";
  } else {
    out << "ARMAX(" << orders_.n_a << "," << orders_.n_b << "," << orders_.n_c << ")";
  }
  out << " sigma=" << sigma_;
  return out.str();
}

std::vector<double> predictor_errors(const GaussianPredictorModel& model,
                                     std::span<const double> theta, const Trajectory& traj) {
  if (theta.size() != model.dimension()) {
    throw InvalidArgument("theta dimension does not match " + model.describe());
  }
  const ScalarData data = scalar_data(traj);
  check_minimum_phase(model.orders(), theta);
  std::vector<double> eps;
  window_errors(model.orders(), theta, data, 0, data.y.size(), eps);
  return eps;
}

LogLikelihoodSeries GaussianPredictorModel::loglik_series(std::span<const double> theta,
                                                          const Trajectory& traj) const {
  std::vector<double> eps = predictor_errors(*this, theta, traj);
  for (double& e : eps) e = log_density(e);
  return {std::move(eps)};
}

double GaussianPredictorModel::loglik_truncated_at(std::span<const double> theta,
                                                   const Trajectory& traj, std::size_t t,
                                                   std::size_t s) const {
  const ScalarData data = scalar_data(traj);
  check_minimum_phase(orders_, theta);
  // 1-based window t-s..t  ->  0-based [t-1-s, t)
  std::vector<double> eps;
  window_errors(orders_, theta, data, t - 1 - s, t, eps);
  return log_density(eps.back());
}

std::optional<std::vector<double>> GaussianPredictorModel::avg_loglik_gradient(
    std::span<const double> theta, const Trajectory& traj) const {
  if (!is_arx()) return std::nullopt;
  const ScalarData data = scalar_data(traj);
  const std::vector<double> eps = predictor_errors(*this, theta, traj);
  std::vector<double> grad(dimension(), 0.0);
  const std::size_t T = eps.size();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 1; i <= orders_.n_a && i <= t; ++i) grad[i - 1] += eps[t] * data.y[t - i];
    for (std::size_t j = 1; j <= orders_.n_b && j <= t; ++j) {
      grad[orders_.n_a + j - 1] += eps[t] * data.u[t - j];
    }
  }
  const double scale = 1.0 / (static_cast<double>(T) * sigma_ * sigma_);
  for (double& g : grad) g *= scale;
  return grad;
}

std::vector<double> arx_regressor(const ArmaxOrders& orders, std::span<const double> u,
                                  std::span<const double> y, std::size_t t) {
  std::vector<double> phi(orders.n_a + orders.n_b, 0.0);
  for (std::size_t i = 1; i <= orders.n_a && i <= t; ++i) phi[i - 1] = y[t - i];
  for (std::size_t j = 1; j <= orders.n_b && j <= t; ++j) phi[orders.n_a + j - 1] = u[t - j];
  return phi;
}

double RegressionMoments::mean_squared_error(std::span<const double> theta) const {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < dimension; ++i) {
    lin += theta[i] * m_yphi[i];
    double row = 0.0;
    for (std::size_t j = 0; j < dimension; ++j) row += phiphi(i, j) * theta[j];
    quad += theta[i] * row;
  }
  return m_yy - 2.0 * lin + quad;
}

RegressionMoments regression_moments(const GaussianPredictorModel& model,
                                      const Trajectory& traj) {
  if (!model.is_arx()) throw InvalidArgument("regression moments need a model with n_c = 0");
  const ScalarData data = scalar_data(traj);
  const std::size_t n = model.dimension();
  const std::size_t T = data.y.size();
  if (T == 0) throw InvalidArgument("regression moments of an empty trajectory");
  RegressionMoments m;
  m.dimension = n;
  m.sample_size = T;
  m.m_yphi.assign(n, 0.0);
  m.m_phiphi.assign(n * n, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto phi = arx_regressor(model.orders(), data.u, data.y, t);
    m.m_yy += data.y[t] * data.y[t];
    for (std::size_t i = 0; i < n; ++i) {
      m.m_yphi[i] += data.y[t] * phi[i];
      for (std::size_t j = 0; j < n; ++j) m.m_phiphi[i * n + j] += phi[i] * phi[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(T);
  m.m_yy *= inv;
  for (double& v : m.m_yphi) v *= inv;
  for (double& v : m.m_phiphi) v *= inv;
  return m;
}

double avg_loglik_from_moments(const GaussianPredictorModel& model,
                               const RegressionMoments& moments, std::span<const double> theta) {
  if (!model.is_arx()) throw InvalidArgument("moment objective needs a model with n_c = 0");
  if (theta.size() != moments.dimension) throw InvalidArgument("theta dimension mismatch");
  const double sigma = model.sigma();
  return -std::log(std::sqrt(2.0 * std::numbers::pi) * sigma) -
         moments.mean_squared_error(theta) / (2.0 * sigma * sigma);
}

}  // namespace loopid
