#include "loopid/runner/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "loopid/diagnostics/data_source.hpp"
#include "loopid/diagnostics/decay.hpp"
#include "loopid/diagnostics/drift.hpp"
#include "loopid/diagnostics/excitation.hpp"
#include "loopid/diagnostics/kl.hpp"
#include "loopid/diagnostics/objective.hpp"
#include "loopid/diagnostics/stability_probe.hpp"
#include "loopid/estimation/grid.hpp"
#include "loopid/estimation/least_squares.hpp"
#include "loopid/estimation/projected_gradient.hpp"
#include "loopid/estimation/tabular_fit.hpp"
#include "loopid/models/gaussian_predictor.hpp"
#include "loopid/models/tabular.hpp"
#include "loopid/runner/svg.hpp"

namespace loopid::runner {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

std::string num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RationalFilter filter(const FilterSpec& f) {
  return RationalFilter(ShiftPolynomial(f.num), ShiftPolynomial(f.den));
}

LinearClosedLoopSystem linear_system(const LinearSystemSpec& s) {
  return {filter(s.plant), filter(s.noise), filter(s.controller), s.sigma_e, s.sigma_r};
}

ControlledMarkovChain markov_chain(const MarkovSystemSpec& m) {
  return ControlledMarkovChain(m.n_states, m.n_actions, m.transitions, m.policy);
}

DataSource build_source(const ExperimentConfig& c) {
  if (const auto* lin = std::get_if<LinearSystemSpec>(&c.system)) {
    try {
      return DataSource::linear(linear_system(*lin), lin->burn_in);
    } catch (const Error& e) {
      throw RunError(std::string("linsys: ") + e.what());
    }
  }
  try {
    return DataSource::markov(markov_chain(std::get<MarkovSystemSpec>(c.system)));
  } catch (const Error& e) {
    throw RunError(std::string("markov: ") + e.what());
  }
}

std::unique_ptr<ParametricModel> build_model(const ExperimentConfig& c) {
  const auto& m = c.model;
  try {
    switch (m.kind) {
      case ModelKind::arx:
        return std::make_unique<GaussianPredictorModel>(
            GaussianPredictorModel::arx(m.n_a, m.n_b, m.sigma));
      case ModelKind::armax:
        return std::make_unique<GaussianPredictorModel>(
            GaussianPredictorModel::armax(m.n_a, m.n_b, m.n_c, m.sigma));
      case ModelKind::tabular: {
        const auto& chain = std::get<MarkovSystemSpec>(c.system);
        return std::make_unique<TabularFamily>(
            TabularFamily::weights(chain.n_states, chain.n_actions, m.floor));
      }
    }
  } catch (const Error& e) {
    throw RunError(std::string("models: ") + e.what());
  }
  throw RunError("models: unknown model kind");
}

Trajectory prefix(const Trajectory& traj, std::size_t T) {
  if (T == traj.length()) return traj;
  if (traj.y.space().is_continuous()) {
    const auto u = traj.u.reals();
    const auto y = traj.y.reals();
    return Trajectory::scalar({u.begin(), u.begin() + static_cast<std::ptrdiff_t>(T)},
                              {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(T)}, traj.t0);
  }
  const auto a = traj.u.symbols();
  const auto s = traj.y.symbols();
  return Trajectory::symbolic({a.begin(), a.begin() + static_cast<std::ptrdiff_t>(T)},
                              traj.u.space().size(),
                              {s.begin(), s.begin() + static_cast<std::ptrdiff_t>(T)},
                              traj.y.space().size(), traj.t0);
}

Box bounding_box(const std::vector<std::vector<double>>& points) {
  std::vector<Interval> iv(points.front().size(), Interval{INFINITY, -INFINITY});
  for (const auto& p : points) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      iv[i].lo = std::min(iv[i].lo, p[i]);
      iv[i].hi = std::max(iv[i].hi, p[i]);
    }
  }
  return Box(iv);
}

std::vector<ParameterVector> theta_points(const ThetaSet& set) {
  if (!set.box.empty()) return cartesian_grid(Box(set.box), set.points_per_axis);
  const Box box = bounding_box(set.points);
  std::vector<ParameterVector> out;
  for (const auto& p : set.points) out.emplace_back(p, box);
  return out;
}

struct FitRecord {
  FitMethod method = FitMethod::least_squares;
  std::uint64_t seed = 0;
  std::size_t T = 0;
  std::optional<FitResult> fit;
  std::optional<TabularMarkovModel> tabular;
  std::vector<std::size_t> unvisited;
  bool refused = false;  // not persistently exciting
  std::string error;
};

class Run {
 public:
  Run(const ExperimentConfig& cfg, fs::path dir, RunManifest& manifest)
      : cfg_(cfg), dir_(std::move(dir)), manifest_(manifest), source_(build_source(cfg)),
        model_(build_model(cfg)) {}

  void estimation();
  void diagnostics();

 private:
  std::ofstream create(const std::string& name, std::vector<std::string>* also = nullptr) {
    manifest_.artifacts.push_back(name);
    if (also) also->push_back(name);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw RunError("runner: cannot write " + (dir_ / name).string());
    return out;
  }
  void plot(const std::string& name, const LinePlot& p, std::vector<std::string>* also = nullptr) {
    manifest_.artifacts.push_back(name);
    if (also) also->push_back(name);
    write_svg((dir_ / name).string(), p);
  }
  void verdict(std::string name, bool pass, std::string detail) {
    manifest_.verdicts.push_back({std::move(name), pass, std::move(detail)});
  }
  RngStream diagnostic_rng(std::size_t index) const {
    return make_rng(manifest_.seeds.front(), 1000 + index);
  }
  std::vector<const FitRecord*> records(FitMethod m, std::size_t T) const {
    std::vector<const FitRecord*> out;
    for (const auto& r : fits_) {
      if (r.method == m && r.T == T) out.push_back(&r);
    }
    return out;
  }
  double max_tv_visited(const FitRecord& r) const;

  void s1_decay(const S1DecaySpec& d, const std::string& name, std::size_t index);
  void uniform(const UniformConvergenceSpec& d, const std::string& name, std::size_t index);
  void excitation(const ExcitationSpec& d, const std::string& name, std::size_t index);
  void drift(const DriftSpec& d, const std::string& name, std::size_t index);
  void r_mean(const RMeanSpec& d, const std::string& name, std::size_t index);
  void stationary(const StationarySpec& d, const std::string& name);
  void kl_bias(const KlBiasSpec& d, const std::string& name);
  void grid_oracle(const GridOracleSpec& d, const std::string& name, std::size_t index);

  const ExperimentConfig& cfg_;
  fs::path dir_;
  RunManifest& manifest_;
  DataSource source_;
  std::unique_ptr<ParametricModel> model_;
  std::vector<FitRecord> fits_;
};

double Run::max_tv_visited(const FitRecord& r) const {
  const auto& chain = source_.chain();
  double worst = 0.0;
  for (std::size_t s = 0; s < chain.n_states(); ++s) {
    for (std::size_t a = 0; a < chain.n_actions(); ++a) {
      const std::size_t phi = chain.phi_index(s, a);
      if (std::find(r.unvisited.begin(), r.unvisited.end(), phi) != r.unvisited.end()) continue;
      const auto p = chain.transition_row(s, a);
      const auto q = r.tabular->row(s, a);
      double tv = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
      worst = std::max(worst, 0.5 * tv);
    }
  }
  return worst;
}

void Run::estimation() {
  const auto& e = cfg_.estimator;
  const std::size_t T_max = e.T_values.back();
  const Box box = e.box.empty() ? Box() : Box(e.box);
  std::vector<ParameterVector> grid;
  if (e.grid) grid = theta_points(*e.grid);

  for (std::uint64_t seed : manifest_.seeds) {
    const Trajectory full = [&] {
      try {
        return source_.sample(T_max, make_rng(seed, 0));
      } catch (const Error& ex) {
        throw RunError(std::string(source_.is_linear() ? "linsys" : "markov") + ": " + ex.what());
      }
    }();
    for (std::size_t T : e.T_values) {
      const Trajectory traj = prefix(full, T);
      for (const auto& ms : e.methods) {
        FitRecord rec;
        rec.method = ms.method;
        rec.seed = seed;
        rec.T = T;
        try {
          switch (ms.method) {
            case FitMethod::least_squares:
              rec.fit = fit_arx_least_squares(traj, cfg_.model.n_a, cfg_.model.n_b,
                                              cfg_.model.sigma, box);
              break;
            case FitMethod::projected_gradient:
              rec.fit = fit_projected_gradient(*model_, traj, ParameterVector(box.center(), box));
              break;
            case FitMethod::grid_search:
              rec.fit = grid_maximize(*model_, traj, grid);
              break;
            case FitMethod::tabular_counts: {
              const auto& chain = source_.chain();
              auto tf = fit_tabular(traj, chain.n_states(), chain.n_actions(), cfg_.model.floor);
              rec.fit = tf.result;
              rec.tabular = tf.model;
              rec.unvisited = tf.unvisited;
              break;
            }
          }
        } catch (const NotPersistentlyExcitingError& ex) {
          rec.refused = true;
          rec.error = ex.what();
        } catch (const Error& ex) {
          rec.error = ex.what();
        }
        fits_.push_back(std::move(rec));
      }
    }
  }

  const std::size_t dim = model_dimension(cfg_);
  {
    auto out = create("estimates.csv");
    out << "method,seed,T";
    for (std::size_t i = 0; i < dim; ++i) out << ",theta_" << i;
    out << ",objective,converged,iterations\n";
    for (const auto& r : fits_) {
      if (!r.fit) continue;
      out << to_string(r.method) << ',' << r.seed << ',' << r.T;
      for (double v : r.fit->theta_hat.values()) out << ',' << format_real(v);
      out << ',' << format_real(r.fit->objective_value) << ',' << (r.fit->converged ? 1 : 0) << ','
          << r.fit->iterations << '\n';
    }
  }

  const bool tabular = cfg_.model.kind == ModelKind::tabular;
  LinePlot err_plot{"Estimation error", "T",
                    tabular ? "median max TV(Q_hat row, P row)" : "median |theta_hat - theta*|_inf",
                    true, true, {}};
  for (const auto& ms : e.methods) {
    const std::string vname = "estimation/" + to_string(ms.method);
    std::size_t refused = 0, failed = 0, total = 0;
    std::string first_error;
    for (const auto& r : fits_) {
      if (r.method != ms.method) continue;
      ++total;
      if (r.refused) ++refused;
      if (!r.fit) {
        ++failed;
        if (first_error.empty()) first_error = r.error;
      }
    }
    if (ms.expect_error) {
      verdict(vname, refused == total,
              std::to_string(refused) + "/" + std::to_string(total) +
                  " fits refused as not persistently exciting (expected)");
      continue;
    }
    if (failed > 0) {
      verdict(vname, false, "estimation: " + first_error);
      continue;
    }
    auto error_of = [&](const FitRecord& r) {
      if (tabular) return max_tv_visited(r);
      return max_abs_difference(r.fit->theta_hat.values(), *e.true_theta);
    };
    if (!tabular && !e.true_theta) {
      verdict(vname, true, std::to_string(total) + " fits completed");
      continue;
    }
    Series series{to_string(ms.method), {}, {}};
    double final_median = 0.0;
    for (std::size_t T : e.T_values) {
      std::vector<double> errs;
      for (const auto* r : records(ms.method, T)) errs.push_back(error_of(*r));
      final_median = median(errs);
      series.x.push_back(static_cast<double>(T));
      series.y.push_back(final_median);
    }
    err_plot.series.push_back(series);
    bool pass = true;
    std::string detail = std::string(tabular ? "median max TV" : "median error") + " at T = " +
                         std::to_string(T_max) + ": " + num(final_median);
    if (e.tolerance) {
      pass = pass && final_median < *e.tolerance;
      detail += " (< " + num(*e.tolerance) + ")";
    }
    if (e.min_error) {
      pass = pass && final_median > *e.min_error;
      detail += " (> " + num(*e.min_error) + ")";
    }
    if (tabular && e.expect_unvisited) {
      std::vector<std::size_t> expected;
      const auto& chain = source_.chain();
      for (const auto& [s, a] : *e.expect_unvisited) expected.push_back(chain.phi_index(s, a));
      std::sort(expected.begin(), expected.end());
      bool match = true;
      for (const auto* r : records(ms.method, T_max)) match = match && r->unvisited == expected;
      pass = pass && match;
      detail += match ? "; unvisited rows as expected" : "; unvisited rows differ from expected";
    }
    verdict(vname, pass, detail);
  }
  if (!err_plot.series.empty()) plot("estimation_error.svg", err_plot);
}

void Run::s1_decay(const S1DecaySpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "s1_decay", {}, {}};
  const auto res = estimate_s1_decay(source_, *model_, d.thetas, d.s_values, d.t_eval,
                                     d.replications, diagnostic_rng(index));
  LinePlot p{"S1 forgetting decay", "s", "E|l_t - l_{t,s}|^2", false, true, {}};
  bool all_exact = true;
  for (std::size_t k = 0; k < res.per_theta.size(); ++k) {
    const auto& fit = res.per_theta[k];
    auto out = create(name + "_theta" + std::to_string(k) + ".csv", &sum.artifacts);
    write_decay_csv(out, fit);
    Series s{"theta " + std::to_string(k), {}, fit.mean_gaps};
    for (std::size_t v : fit.s_values) s.x.push_back(static_cast<double>(v));
    p.series.push_back(s);
    all_exact = all_exact && fit.status == DecayStatus::exact_finite_memory;
    sum.values.emplace_back("theta " + std::to_string(k),
                            to_string(fit.status) + ", lambda_hat " + num(fit.lambda_hat) +
                                ", C_hat " + num(fit.C_hat) + ", r^2 " + num(fit.r_squared));
  }
  if (!all_exact) plot(name + ".svg", p, &sum.artifacts);
  const auto& w = res.worst_fit();
  sum.values.emplace_back("worst theta", std::to_string(res.worst));
  bool pass;
  std::string detail;
  if (d.expect_exact_finite_memory) {
    pass = all_exact;
    detail = all_exact ? "exact finite memory for every theta" : "gaps not identically zero";
  } else {
    pass = w.status == DecayStatus::fitted && w.lambda_hat < 1.0;
    if (d.lambda_min) pass = pass && w.lambda_hat >= *d.lambda_min;
    if (d.lambda_max) pass = pass && w.lambda_hat <= *d.lambda_max;
    if (d.r_squared_min) pass = pass && w.r_squared > *d.r_squared_min;
    detail = "worst lambda_hat " + num(w.lambda_hat) + ", r^2 " + num(w.r_squared) + " (" +
             to_string(w.status) + ")";
  }
  verdict(name, pass, detail);
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::uniform(const UniformConvergenceSpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "uniform_convergence", {}, {}};
  const auto grid = theta_points(d.thetas);
  const auto rep = uniform_convergence_gap(source_, *model_, grid, d.T_values, manifest_.seeds,
                                           diagnostic_rng(index), d.T_ref);
  {
    auto out = create(name + ".csv", &sum.artifacts);
    write_gap_csv(out, rep);
  }
  LinePlot p{"Uniform convergence gap", "T", "sup_theta |L_T - Lbar_ref|", true, true, {}};
  Series med{"median over seeds", {}, rep.median_gaps};
  Series all{"per seed", {}, {}, false};
  for (std::size_t T : rep.T_values) med.x.push_back(static_cast<double>(T));
  for (const auto& row : rep.rows) {
    all.x.push_back(static_cast<double>(row.T));
    all.y.push_back(row.sup_gap);
  }
  p.series = {med, all};
  plot(name + ".svg", p, &sum.artifacts);
  bool pass = rep.monotone;
  std::string ratios;
  for (double r : rep.median_ratios) {
    pass = pass && r < d.max_ratio;
    ratios += (ratios.empty() ? "" : ", ") + num(r);
  }
  for (std::size_t k = 0; k < rep.T_values.size(); ++k) {
    sum.values.emplace_back("median sup gap at T = " + std::to_string(rep.T_values[k]),
                            num(rep.median_gaps[k]));
  }
  sum.values.emplace_back("median ratios", ratios);
  sum.values.emplace_back("grid size", std::to_string(grid.size()));
  verdict(name, pass, "median gap ratios " + ratios + " (< " + num(d.max_ratio) + ")");
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::excitation(const ExcitationSpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "persistent_excitation", {}, {}};
  const auto v = persistent_excitation_check(source_, d.T, diagnostic_rng(index),
                                             RegressorSpec{d.u_lags, d.y_lags});
  {
    auto out = create(name + ".csv", &sum.artifacts);
    out << "row,col,moment\n";
    for (std::size_t i = 0; i < v.moment.dimension; ++i) {
      for (std::size_t j = 0; j < v.moment.dimension; ++j) {
        out << i << ',' << j << ',' << format_real(v.moment.at(i, j)) << '\n';
      }
    }
  }
  bool pass = v.persistently_exciting == d.expect_pe;
  std::string detail = std::string(v.persistently_exciting ? "PE" : "not PE") +
                       " (expected " + (d.expect_pe ? "PE" : "not PE") + "), min eigenvalue " +
                       num(v.moment.min_eigenvalue);
  if (d.expect_min_eigenvalue) {
    pass = pass && std::abs(v.moment.min_eigenvalue - *d.expect_min_eigenvalue) <=
                       d.eigenvalue_tolerance;
    detail += " (expected " + num(*d.expect_min_eigenvalue) + " +- " +
              num(d.eigenvalue_tolerance) + ")";
  }
  sum.values = {{"min eigenvalue", num(v.moment.min_eigenvalue)},
                {"threshold", num(v.threshold)},
                {"sample size", std::to_string(v.moment.sample_size)},
                {"persistently exciting", v.persistently_exciting ? "yes" : "no"}};
  verdict(name, pass, detail);
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::drift(const DriftSpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "drift", {}, {}};
  const auto rep = stationarity_drift_check(source_, d.T, diagnostic_rng(index),
                                            DriftOptions{d.windows, d.threshold_sigmas});
  {
    auto out = create(name + ".csv", &sum.artifacts);
    write_drift_csv(out, rep);
  }
  double max_z = 0.0;
  for (const auto& w : rep.windows) max_z = std::max({max_z, w.mean_z, w.variance_z});
  sum.values = {{"drift detected", rep.drift_detected ? "yes" : "no"}, {"max z", num(max_z)}};
  verdict(name, rep.drift_detected == d.expect_drift,
          std::string(rep.drift_detected ? "drift" : "no drift") + " (expected " +
              (d.expect_drift ? "drift" : "no drift") + "), max z " + num(max_z));
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::r_mean(const RMeanSpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "r_mean_probe", {}, {}};
  LinePlot p{"r-mean stability probe", "s", "E|Y_t - Y_{t,s}|^r", false, true, {}};
  const RngStream rng = diagnostic_rng(index);
  bool pass = true;
  std::string detail;
  for (std::size_t j = 0; j < d.probes.size(); ++j) {
    const auto& probe = d.probes[j];
    const auto fit = r_mean_stability_probe(source_.linear_system(), probe.r, d.s_values,
                                            d.t_eval, d.replications, rng.child(j),
                                            source_.burn_in());
    const std::string tag = "r" + std::to_string(probe.r);
    {
      auto out = create(name + "_" + tag + ".csv", &sum.artifacts);
      write_decay_csv(out, fit, "mean_abs_gap_r");
    }
    Series s{"r = " + std::to_string(probe.r), {}, fit.mean_gaps};
    for (std::size_t v : fit.s_values) s.x.push_back(static_cast<double>(v));
    p.series.push_back(s);
    bool ok = fit.status == DecayStatus::fitted && fit.lambda_hat < 1.0;
    if (probe.lambda_min) ok = ok && fit.lambda_hat >= *probe.lambda_min;
    if (probe.lambda_max) ok = ok && fit.lambda_hat <= *probe.lambda_max;
    if (probe.r_squared_min) ok = ok && fit.r_squared > *probe.r_squared_min;
    pass = pass && ok;
    const std::string line = "lambda_hat " + num(fit.lambda_hat) + ", r^2 " + num(fit.r_squared);
    detail += (detail.empty() ? "" : "; ") + tag + ": " + line;
    sum.values.emplace_back(tag, line + " (" + to_string(fit.status) + ")");
  }
  plot(name + ".svg", p, &sum.artifacts);
  verdict(name, pass, detail);
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::stationary(const StationarySpec& d, const std::string& name) {
  DiagnosticSummary sum{name, "stationary", {}, {}};
  const auto& chain = source_.chain();
  const auto dist = stationary_distribution(chain);
  {
    auto out = create(name + ".csv", &sum.artifacts);
    write_stationary_csv(out, dist);
  }
  const auto sup = support_check(dist);
  std::string zero;
  for (std::size_t phi : sup.zero_set) {
    zero += (zero.empty() ? "" : " ") + std::string("(") + std::to_string(phi / chain.n_actions()) +
            "," + std::to_string(phi % chain.n_actions()) + ")";
  }
  bool pass = sup.full_support == d.expect_full_support;
  if (d.expect_zero_set) {
    std::vector<std::size_t> expected;
    for (const auto& [s, a] : *d.expect_zero_set) expected.push_back(chain.phi_index(s, a));
    std::sort(expected.begin(), expected.end());
    pass = pass && expected == sup.zero_set;
  }
  sum.values = {{"full support", sup.full_support ? "yes" : "no"},
                {"zero set", zero.empty() ? "none" : zero}};
  verdict(name, pass,
          std::string(sup.full_support ? "full support" : "support deficient, zero set " + zero));
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::kl_bias(const KlBiasSpec& d, const std::string& name) {
  DiagnosticSummary sum{name, "kl_bias", {}, {}};
  const auto& chain = source_.chain();
  const auto dist = stationary_distribution(chain);
  const auto& Ts = cfg_.estimator.T_values;
  std::vector<double> medians;
  {
    auto out = create(name + ".csv", &sum.artifacts);
    out << "seed,T,kl_bias\n";
    std::vector<std::vector<double>> by_T(Ts.size());
    for (const auto& r : fits_) {
      if (r.method != FitMethod::tabular_counts || !r.tabular) continue;
      const double kl = exact_kl_bias(chain, dist, *r.tabular);
      out << r.seed << ',' << r.T << ',' << format_real(kl) << '\n';
      const auto k = static_cast<std::size_t>(std::find(Ts.begin(), Ts.end(), r.T) - Ts.begin());
      by_T[k].push_back(kl);
    }
    for (auto& v : by_T) {
      if (v.empty()) throw RunError("diagnostics: no tabular fits for the KL bias");
      medians.push_back(median(v));
    }
  }
  LinePlot p{"KL bias of the fitted model", "T", "median KL bias", true, true, {}};
  Series s{"tabular_counts", {}, medians};
  for (std::size_t T : Ts) s.x.push_back(static_cast<double>(T));
  p.series.push_back(s);
  plot(name + ".svg", p, &sum.artifacts);
  bool pass = medians.back() < d.max_bias;
  if (medians.size() > 1) pass = pass && medians.back() < medians.front();
  for (std::size_t k = 0; k < Ts.size(); ++k) {
    sum.values.emplace_back("median KL bias at T = " + std::to_string(Ts[k]), num(medians[k]));
  }
  verdict(name, pass,
          "median KL bias " + num(medians.back()) + " at T = " + std::to_string(Ts.back()) +
              " (< " + num(d.max_bias) + ")");
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::grid_oracle(const GridOracleSpec& d, const std::string& name, std::size_t index) {
  DiagnosticSummary sum{name, "grid_oracle", {}, {}};
  const Box box(d.box);
  std::vector<std::size_t> shape;
  for (const auto& iv : d.box) {
    shape.push_back(static_cast<std::size_t>(std::llround(iv.width() / d.step)) + 1);
  }
  const auto grid = cartesian_grid(box, shape);
  const auto obj =
      asymptotic_objective_grid(source_, *model_, grid, shape, d.T_ref, diagnostic_rng(index));
  {
    auto out = create(name + "_argmax_set.csv", &sum.artifacts);
    for (std::size_t i = 0; i < grid.front().size(); ++i) out << "theta_" << i << ',';
    out << "objective\n";
    for (std::size_t k : obj.argmax_set) {
      for (double v : grid[k].values()) out << format_real(v) << ',';
      out << format_real(obj.values[k]) << '\n';
    }
  }
  const std::size_t T_max = cfg_.estimator.T_values.back();
  std::vector<double> dist;
  Series est{"theta_hat (projected gradient)", {}, {}, false};
  {
    auto out = create(name + "_distances.csv", &sum.artifacts);
    out << "seed,distance\n";
    for (const auto* r : records(FitMethod::projected_gradient, T_max)) {
      if (!r->fit) throw RunError("diagnostics: projected-gradient fit missing: " + r->error);
      const double dd = distance_to_grid_set(r->fit->theta_hat.values(), grid, obj.argmax_set);
      dist.push_back(dd);
      out << r->seed << ',' << format_real(dd) << '\n';
      est.x.push_back(r->fit->theta_hat[0]);
      est.y.push_back(r->fit->theta_hat.size() > 1 ? r->fit->theta_hat[1] : 0.0);
    }
  }
  if (grid.front().size() == 2) {
    Series set{"grid argmax set", {}, {}, false};
    for (std::size_t k : obj.argmax_set) {
      set.x.push_back(grid[k][0]);
      set.y.push_back(grid[k][1]);
    }
    const auto& truth = *cfg_.estimator.true_theta;
    Series t{"true theta", {truth[0]}, {truth[1]}, false};
    plot(name + ".svg", LinePlot{"Asymptotic argmax set", "theta_0", "theta_1", false, false,
                                 {set, est, t}},
         &sum.artifacts);
  }
  const double md = median(dist);
  sum.values = {{"argmax set size", std::to_string(obj.argmax_set.size())},
                {"resolution drop", num(obj.resolution_drop)},
                {"median distance", num(md)}};
  verdict(name, md <= d.max_distance + 1e-12,
          "median distance to the grid argmax set " + num(md) + " (<= " + num(d.max_distance) +
              ", set of " + std::to_string(obj.argmax_set.size()) + " points)");
  manifest_.diagnostics.push_back(std::move(sum));
}

void Run::diagnostics() {
  std::map<std::string, std::size_t> seen;
  for (const auto& d : cfg_.diagnostics) ++seen[diagnostic_kind(d)];
  std::map<std::string, std::size_t> used;
  for (std::size_t i = 0; i < cfg_.diagnostics.size(); ++i) {
    const auto& d = cfg_.diagnostics[i];
    const std::string kind = diagnostic_kind(d);
    std::string name = kind;
    if (seen[kind] > 1) name += "_" + std::to_string(used[kind]++);
    const auto start = Clock::now();
    try {
      std::visit(
          [&](const auto& spec) {
            using D = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<D, S1DecaySpec>) s1_decay(spec, name, i);
            else if constexpr (std::is_same_v<D, UniformConvergenceSpec>) uniform(spec, name, i);
            else if constexpr (std::is_same_v<D, ExcitationSpec>) excitation(spec, name, i);
            else if constexpr (std::is_same_v<D, DriftSpec>) drift(spec, name, i);
            else if constexpr (std::is_same_v<D, RMeanSpec>) r_mean(spec, name, i);
            else if constexpr (std::is_same_v<D, StationarySpec>) stationary(spec, name);
            else if constexpr (std::is_same_v<D, KlBiasSpec>) kl_bias(spec, name);
            else grid_oracle(spec, name, i);
          },
          d);
    } catch (const Error& e) {
      verdict(name, false, std::string("diagnostics: ") + e.what());
    }
    manifest_.timings.emplace_back(name, seconds_since(start));
  }
}

json manifest_json(const RunManifest& m) {
  json verdicts = json::array();
  for (const auto& v : m.verdicts) {
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  json diags = json::array();
  for (const auto& d : m.diagnostics) {
    json values = json::array();
    for (const auto& [k, v] : d.values) values.push_back({k, v});
    diags.push_back(
        {{"name", d.name}, {"kind", d.kind}, {"summary", values}, {"artifacts", d.artifacts}});
  }
  json timings = json::array();
  for (const auto& [k, v] : m.timings) timings.push_back({{"stage", k}, {"seconds", v}});
  return {{"scenario", m.scenario},
          {"config_hash", m.config_hash},
          {"tool_version", m.tool_version},
          {"output_dir", m.output_dir},
          {"seeds", m.seeds},
          {"artifacts", m.artifacts},
          {"verdicts", verdicts},
          {"all_pass", m.all_pass()},
          {"diagnostics", diags},
          {"timings", timings},
          {"wall_clock_seconds", m.wall_clock_seconds}};
}

}  // namespace

bool RunManifest::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string default_output_dir(const std::string& scenario) {
  const char* root = std::getenv("LOOPID_OUTPUT_ROOT");
  const fs::path base = (root && *root) ? fs::path(root) : fs::path("loopid-out");
  return (base / scenario).string();
}

RunManifest run_experiment(ExperimentConfig config, const RunOptions& options) {
  const auto start = Clock::now();
  if (options.seeds) config.seeds = *options.seeds;
  validate_config(config);

  RunManifest manifest;
  manifest.scenario = config.scenario;
  manifest.config_hash = config_hash(config);
  manifest.seeds = config.seeds;
  manifest.output_dir = options.output_dir ? *options.output_dir
                        : config.output    ? *config.output
                                           : default_output_dir(config.scenario);
  const fs::path dir(manifest.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunError("runner: cannot create " + dir.string() + ": " + ec.message());

  auto stage = Clock::now();
  Run run(config, dir, manifest);
  run.estimation();
  manifest.timings.emplace_back("estimation", seconds_since(stage));
  run.diagnostics();

  manifest.artifacts.push_back("manifest.json");
  manifest.wall_clock_seconds = seconds_since(start);
  write_manifest(manifest, (dir / "manifest.json").string());
  for (const auto& a : manifest.artifacts) {
    if (!fs::exists(dir / a)) throw RunError("runner: artifact " + a + " was not written");
  }
  return manifest;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("runner: cannot write " + path);
  out << manifest_json(manifest).dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RunError("report: cannot open manifest " + path);
  json j;
  try {
    j = json::parse(in);
    RunManifest m;
    m.scenario = j.at("scenario").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    for (const auto& v : j.at("verdicts")) {
      m.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(),
                            v.at("detail").get<std::string>()});
    }
    for (const auto& d : j.at("diagnostics")) {
      DiagnosticSummary s{d.at("name").get<std::string>(), d.at("kind").get<std::string>(), {},
                          d.at("artifacts").get<std::vector<std::string>>()};
      for (const auto& kv : d.at("summary")) {
        s.values.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
      }
      m.diagnostics.push_back(std::move(s));
    }
    for (const auto& t : j.at("timings")) {
      m.timings.emplace_back(t.at("stage").get<std::string>(), t.at("seconds").get<double>());
    }
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw RunError("report: malformed manifest " + path + ": " + e.what());
  }
}

}  // namespace loopid::runner
