#include "loopid/diagnostics/stability_probe.hpp"

#include <cmath>
#include <vector>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

std::vector<double> draws(RngStream rng, std::size_t n, double sigma) {
  std::vector<double> out(n);
  for (auto& v : out) v = sigma * rng.normal();
  return out;
}

}  // namespace

DecayFit r_mean_stability_probe(const LinearClosedLoopSystem& sys, unsigned r,
                                std::span<const std::size_t> s_values, std::size_t t_eval,
                                std::size_t replications, const RngStream& rng,
                                std::optional<std::size_t> burn_in) {
  if (r != 2 && r != 4) throw InvalidArgument("r-mean probe supports r = 2 or r = 4");
  if (s_values.empty()) throw InvalidArgument("r-mean probe: no s values given");
  if (replications < 2) throw InvalidArgument("r-mean probe: need at least 2 replications");
  for (std::size_t s : s_values) {
    if (s == 0 || s >= t_eval) {
      throw InvalidArgument("r-mean probe: every s must satisfy 0 < s < t_eval");
    }
  }
  sys.validate();
  const double rho = closed_loop_stability_radius(sys);
  if (rho >= 1.0) throw UnstableSystemError("closed loop is unstable", rho);
  const std::size_t N = (burn_in ? *burn_in : burn_in_for_radius(rho)) + t_eval;

  const std::size_t n_s = s_values.size();
  std::vector<double> sum(n_s, 0.0), sum_sq(n_s, 0.0);
  for (std::size_t rep = 0; rep < replications; ++rep) {
    const RngStream base = rng.child(rep);
    const auto e = draws(base.child(0), N, sys.sigma_e);
    const auto rr = draws(base.child(1), N, sys.sigma_r);
    const auto e_fresh = draws(base.child(2), N, sys.sigma_e);
    const auto r_fresh = draws(base.child(3), N, sys.sigma_r);
    const double y = run_closed_loop(sys, e, rr).y.back();
    for (std::size_t j = 0; j < n_s; ++j) {
      const std::size_t cut = N - s_values[j];
      std::vector<double> e2 = e, r2 = rr;
      std::copy(e_fresh.begin(), e_fresh.begin() + static_cast<std::ptrdiff_t>(cut), e2.begin());
      std::copy(r_fresh.begin(), r_fresh.begin() + static_cast<std::ptrdiff_t>(cut), r2.begin());
      const double y2 = run_closed_loop(sys, e2, r2).y.back();
      const double g = std::pow(std::abs(y - y2), static_cast<double>(r));
      sum[j] += g;
      sum_sq[j] += g * g;
    }
  }
  const double n = static_cast<double>(replications);
  std::vector<double> means(n_s), errs(n_s);
  for (std::size_t j = 0; j < n_s; ++j) {
    means[j] = sum[j] / n;
    const double var = std::max(0.0, (sum_sq[j] - n * means[j] * means[j]) / (n - 1.0));
    errs[j] = std::sqrt(var / n);
  }
  return fit_exponential_decay(s_values, means, errs);
}

}  // namespace loopid
