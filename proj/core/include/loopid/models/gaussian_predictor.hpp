#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "loopid/linsys/polynomial.hpp"
#include "loopid/models/model.hpp"

namespace loopid {

/// Orders of A(q) y_t = B(q) u_t + C(q) e_t with
///   A = 1 - a_1 q^-1 - ... - a_na q^-na
///   B = b_1 q^-1 + ... + b_nb q^-nb
///   C = 1 + c_1 q^-1 + ... + c_nc q^-nc
/// and theta = (a_1..a_na, b_1..b_nb, c_1..c_nc).
struct ArmaxOrders {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_c = 0;

  std::size_t size() const noexcept { return n_a + n_b + n_c; }
  std::size_t max_lag() const noexcept { return std::max({n_a, n_b, n_c}); }
};

/// Gaussian one-step predictor model q_theta(y_t | past) = N(yhat_t, sigma^2)
/// with G_theta = B/A, H_theta = C/A, so the prediction error obeys
///   C(q) eps_t = A(q) y_t - B(q) u_t.
/// sigma is a fixed hyperparameter.
class GaussianPredictorModel final : public ParametricModel {
 public:
  /// ARX(n_a, n_b): C = 1, n_b >= 1.
  static GaussianPredictorModel arx(std::size_t n_a, std::size_t n_b, double sigma);
  /// General ARMAX predictor; n_b may be 0 (pure AR/ARMA).
  static GaussianPredictorModel armax(std::size_t n_a, std::size_t n_b, std::size_t n_c,
                                      double sigma);

  const ArmaxOrders& orders() const noexcept { return orders_; }
  bool is_arx() const noexcept { return orders_.n_c == 0; }
  double sigma() const noexcept { return sigma_; }

  /// Same structure with a different sigma.
  GaussianPredictorModel with_sigma(double sigma) const;

  RationalFilter plant_filter(std::span<const double> theta) const;
  RationalFilter noise_filter(std::span<const double> theta) const;

  /// log N(eps; 0, sigma^2) = -log(sqrt(2 pi) sigma) - eps^2 / (2 sigma^2).
  double log_density(double eps) const noexcept;

  std::size_t dimension() const override { return orders_.size(); }
  std::string describe() const override;
  LogLikelihoodSeries loglik_series(std::span<const double> theta,
                                    const Trajectory& traj) const override;
  double loglik_truncated_at(std::span<const double> theta, const Trajectory& traj,
                             std::size_t t, std::size_t s) const override;
  /// Closed form (1 / (T sigma^2)) sum eps_t Phi_t when n_c = 0.
  std::optional<std::vector<double>> avg_loglik_gradient(std::span<const double> theta,
                                                         const Trajectory& traj) const override;

 private:
  GaussianPredictorModel(ArmaxOrders orders, double sigma);

  ArmaxOrders orders_;
  double sigma_;
  double log_norm_ = 0.0;
  double inv_two_var_ = 0.0;
};

/// eps_1..eps_T with zero initial conditions. Throws NonMinimumPhaseError if
/// C(q) has a root on or outside the unit circle.
std::vector<double> predictor_errors(const GaussianPredictorModel& model,
                                     std::span<const double> theta, const Trajectory& traj);

/// Lagged regressor Phi_t = (y_{t-1}..y_{t-na}, u_{t-1}..u_{t-nb}) at 0-based
/// index t, zero before the start.
std::vector<double> arx_regressor(const ArmaxOrders& orders, std::span<const double> u,
                                  std::span<const double> y, std::size_t t);

/// Sample moments of an ARX regression with zero-padded history:
///   m_yy = mean y_t^2,  m_yphi = mean y_t Phi_t,  M = mean Phi_t Phi_t^T.
/// The average ARX log-likelihood is an exact quadratic in theta built from
/// these, which makes dense theta grids cheap.
struct RegressionMoments {
  std::size_t dimension = 0;
  std::size_t sample_size = 0;
  double m_yy = 0.0;
  std::vector<double> m_yphi;
  std::vector<double> m_phiphi;  // row-major dimension x dimension

  double phiphi(std::size_t i, std::size_t j) const { return m_phiphi[i * dimension + j]; }
  /// mean (y_t - theta' Phi_t)^2
  double mean_squared_error(std::span<const double> theta) const;
};

RegressionMoments regression_moments(const GaussianPredictorModel& model, const Trajectory& traj);

/// L_T(theta) through the moment quadratic form; requires n_c = 0.
double avg_loglik_from_moments(const GaussianPredictorModel& model,
                               const RegressionMoments& moments, std::span<const double> theta);

}  // namespace loopid
