#include "loopid/diagnostics/drift.hpp"

#include <cmath>
#include <ostream>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Batch-means estimate of the long-run variance of a stationary series.
double long_run_variance(std::span<const double> x) {
  const std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(
                                                     static_cast<double>(x.size()))));
  const std::size_t nb = x.size() / b;
  if (nb < 2) throw InvalidArgument("drift check: reference half too short");
  std::vector<double> means(nb);
  for (std::size_t k = 0; k < nb; ++k) means[k] = mean_of(x.subspan(k * b, b));
  const double m = mean_of(means);
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return static_cast<double>(b) * ss / static_cast<double>(nb - 1);
}

double z_score(double diff, double lrv, std::size_t n_window, std::size_t n_ref) {
  const double se = std::sqrt(lrv / static_cast<double>(n_window) +
                              lrv / static_cast<double>(n_ref));
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

void check_signal(std::string name, std::span<const double> x, const DriftOptions& options,
                  DriftReport& report) {
  const std::size_t T = x.size();
  const auto ref = x.subspan(T / 2);
  const double ref_mean = mean_of(ref);
  std::vector<double> dev(T);
  for (std::size_t t = 0; t < T; ++t) dev[t] = (x[t] - ref_mean) * (x[t] - ref_mean);
  const std::span<const double> dev_all(dev);
  const auto dev_ref = dev_all.subspan(T / 2);
  const double ref_dev = mean_of(dev_ref);
  const double lrv_mean = long_run_variance(ref);
  const double lrv_dev = long_run_variance(dev_ref);

  for (std::size_t w = 0; w < options.windows; ++w) {
    WindowDrift d;
    d.signal = name;
    d.window = w;
    d.begin = w * T / options.windows;
    d.end = (w + 1) * T / options.windows;
    const auto win = x.subspan(d.begin, d.end - d.begin);
    const std::size_t n = win.size();
    d.mean = mean_of(win);
    double ss = 0.0;
    for (double v : win) ss += (v - d.mean) * (v - d.mean);
    d.variance = ss / static_cast<double>(n - 1);
    d.mean_z = z_score(d.mean - ref_mean, lrv_mean, n, ref.size());
    d.variance_z = z_score(mean_of(dev_all.subspan(d.begin, n)) - ref_dev, lrv_dev, n,
                           ref.size());
    d.flagged = d.mean_z > options.threshold_sigmas || d.variance_z > options.threshold_sigmas;
    report.drift_detected = report.drift_detected || d.flagged;
    report.windows.push_back(std::move(d));
  }
}

}  // namespace

DriftReport stationarity_drift_check(const Trajectory& traj, const DriftOptions& options) {
  if (traj.u.space() != ObsSpace::continuous(1) || traj.y.space() != ObsSpace::continuous(1)) {
    throw InvalidArgument("drift check needs scalar continuous u and y");
  }
  if (options.windows < 2) throw InvalidArgument("drift check needs at least 2 windows");
  if (!(options.threshold_sigmas > 0.0)) {
    throw InvalidArgument("drift threshold must be positive");
  }
  if (traj.length() < 8 * options.windows) {
    throw InvalidArgument("drift check: T = " + std::to_string(traj.length()) +
                          " is too short for " + std::to_string(options.windows) + " windows");
  }
  DriftReport report;
  check_signal("u", traj.u.reals(), options, report);
  check_signal("y", traj.y.reals(), options, report);
  return report;
}

DriftReport stationarity_drift_check(const DataSource& source, std::size_t T,
                                     const RngStream& rng, const DriftOptions& options) {
  return stationarity_drift_check(source.sample(T, rng), options);
}

void write_drift_csv(std::ostream& out, const DriftReport& report) {
  out << "signal,window,begin,end,mean,variance,mean_z,variance_z,flagged\n";
  for (const auto& w : report.windows) {
    out << w.signal << ',' << w.window << ',' << w.begin << ',' << w.end << ','
        << format_real(w.mean) << ',' << format_real(w.variance) << ','
        << format_real(w.mean_z) << ',' << format_real(w.variance_z) << ','
        << (w.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace loopid
