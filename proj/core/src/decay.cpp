#include "loopid/diagnostics/decay.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "loopid/core/error.hpp"
#include "loopid/core/trajectory.hpp"

namespace loopid {

std::string to_string(DecayStatus status) {
  switch (status) {
    case DecayStatus::fitted: return "fitted";
    case DecayStatus::exact_finite_memory: return "exact_finite_memory";
    case DecayStatus::insufficient_points: return "insufficient_points";
  }
  return "unknown";
}

DecayFit fit_exponential_decay(std::span<const std::size_t> s_values,
                               std::span<const double> mean_gaps,
                               std::span<const double> stderrs, double noise_floor_ratio) {
  if (s_values.size() != mean_gaps.size() || s_values.size() != stderrs.size()) {
    throw InvalidArgument("decay fit: s values, gaps and stderrs differ in length");
  }
  DecayFit fit;
  fit.s_values.assign(s_values.begin(), s_values.end());
  fit.mean_gaps.assign(mean_gaps.begin(), mean_gaps.end());
  fit.stderrs.assign(stderrs.begin(), stderrs.end());
  fit.used_in_fit.assign(s_values.size(), false);

  bool all_zero = !s_values.empty();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    if (mean_gaps[i] != 0.0) all_zero = false;
    if (mean_gaps[i] > 0.0 && mean_gaps[i] >= noise_floor_ratio * stderrs[i]) {
      fit.used_in_fit[i] = true;
      xs.push_back(static_cast<double>(s_values[i]));
      ys.push_back(std::log(mean_gaps[i]));
    }
  }
  if (all_zero) {
    fit.status = DecayStatus::exact_finite_memory;
    fit.C_hat = 0.0;
    fit.lambda_hat = 0.0;
    fit.r_squared = 1.0;
    return fit;
  }
  if (xs.size() < 2) {
    fit.status = DecayStatus::insufficient_points;
    fit.C_hat = fit.lambda_hat = fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    fit.status = DecayStatus::insufficient_points;
    fit.C_hat = fit.lambda_hat = fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  fit.lambda_hat = std::exp(slope);
  fit.C_hat = std::exp(intercept);
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.status = DecayStatus::fitted;
  return fit;
}

namespace {

double decay_rank(const DecayFit& fit) {
  switch (fit.status) {
    case DecayStatus::exact_finite_memory: return 0.0;
    case DecayStatus::insufficient_points: return std::numeric_limits<double>::infinity();
    case DecayStatus::fitted: return fit.lambda_hat;
  }
  return 0.0;
}

}  // namespace

S1DecayResult estimate_s1_decay(const DataSource& source, const ParametricModel& model,
                                std::span<const std::vector<double>> thetas,
                                std::span<const std::size_t> s_values, std::size_t t_eval,
                                std::size_t replications, const RngStream& rng) {
  if (thetas.empty()) throw InvalidArgument("S1 decay: no parameter values given");
  if (s_values.empty()) throw InvalidArgument("S1 decay: no s values given");
  if (replications < 30) throw InvalidArgument("S1 decay: need at least 30 replications");
  for (std::size_t s : s_values) {
    if (s == 0 || s >= t_eval) {
      throw InvalidArgument("S1 decay: every s must satisfy 0 < s < t_eval (s = " +
                            std::to_string(s) + ", t_eval = " + std::to_string(t_eval) + ")");
    }
  }
  for (const auto& theta : thetas) {
    if (theta.size() != model.dimension()) {
      throw InvalidArgument("S1 decay: parameter dimension does not match the model");
    }
  }
  const std::size_t n_theta = thetas.size();
  const std::size_t n_s = s_values.size();
  std::vector<double> sum(n_theta * n_s, 0.0), sum_sq(n_theta * n_s, 0.0);

  for (std::size_t rep = 0; rep < replications; ++rep) {
    const Trajectory traj = source.sample(t_eval, rng.child(rep));
    for (std::size_t k = 0; k < n_theta; ++k) {
      const double full = loglik_at(model, thetas[k], traj, t_eval);
      for (std::size_t j = 0; j < n_s; ++j) {
        const double trunc = loglik_truncated_at(model, thetas[k], traj, t_eval, s_values[j]);
        const double g = (full - trunc) * (full - trunc);
        sum[k * n_s + j] += g;
        sum_sq[k * n_s + j] += g * g;
      }
    }
  }

  S1DecayResult result;
  const double n = static_cast<double>(replications);
  double worst_rank = -1.0;
  for (std::size_t k = 0; k < n_theta; ++k) {
    std::vector<double> means(n_s), errs(n_s);
    for (std::size_t j = 0; j < n_s; ++j) {
      const double m = sum[k * n_s + j] / n;
      const double var = std::max(0.0, (sum_sq[k * n_s + j] - n * m * m) / (n - 1.0));
      means[j] = m;
      errs[j] = std::sqrt(var / n);
    }
    result.per_theta.push_back(fit_exponential_decay(s_values, means, errs));
    const double rank = decay_rank(result.per_theta.back());
    if (rank > worst_rank) {
      worst_rank = rank;
      result.worst = k;
    }
  }
  return result;
}

void write_decay_csv(std::ostream& out, const DecayFit& fit, const std::string& gap_column) {
  out << "s," << gap_column << ",stderr,used\n";
  for (std::size_t i = 0; i < fit.s_values.size(); ++i) {
    out << fit.s_values[i] << ',' << format_real(fit.mean_gaps[i]) << ','
        << format_real(fit.stderrs[i]) << ',' << (fit.used_in_fit[i] ? 1 : 0) << '\n';
  }
}

}  // namespace loopid
