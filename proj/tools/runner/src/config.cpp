#include "loopid/runner/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/markov/chain.hpp"

namespace loopid::runner {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                         const std::string& msg) const {
    std::ostringstream out;
    out << source_;
    if (node.IsDefined() && node.Mark().line >= 0) {
      out << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1;
    }
    out << ": " << path << ": " << msg;
    throw ConfigError(out.str());
  }

  void expect_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
  }

  void expect_seq(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path, "expected a list");
  }

  void check_keys(const YAML::Node& map, const std::string& path,
                  std::initializer_list<const char*> allowed) const {
    expect_map(map, path);
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, join(path, key), "unknown key");
    }
  }

  YAML::Node require(const YAML::Node& map, const std::string& key,
                     const std::string& path) const {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) fail(map, join(path, key), "missing required key");
    return node;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  double real(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a number");
    double v = 0.0;
    try {
      v = node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, path, "expected a number, got '" + node.Scalar() + "'");
    }
    if (!std::isfinite(v)) fail(node, path, "must be finite");
    return v;
  }

  std::size_t count(const YAML::Node& node, const std::string& path) const {
    const double v = real(node, path);
    if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
      fail(node, path, "expected a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
  }

  std::size_t positive(const YAML::Node& node, const std::string& path) const {
    const std::size_t v = count(node, path);
    if (v == 0) fail(node, path, "must be positive");
    return v;
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    try {
      if (node.IsScalar()) return node.as<bool>();
    } catch (const YAML::Exception&) {
    }
    fail(node, path, "expected true or false");
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a string");
    return node.Scalar();
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& path) const {
    expect_seq(node, path);
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], index(path, i)));
    return out;
  }

  std::vector<std::size_t> counts(const YAML::Node& node, const std::string& path) const {
    expect_seq(node, path);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(count(node[i], index(path, i)));
    return out;
  }

  std::vector<Interval> box(const YAML::Node& node, const std::string& path) const {
    expect_seq(node, path);
    if (node.size() == 0) fail(node, path, "box needs at least one interval");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto p = reals(node[i], index(path, i));
      if (p.size() != 2 || p[0] > p[1]) fail(node[i], index(path, i), "expected [lo, hi] with lo <= hi");
      out.push_back({p[0], p[1]});
    }
    return out;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs(const YAML::Node& node,
                                                         const std::string& path) const {
    expect_seq(node, path);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto p = counts(node[i], index(path, i));
      if (p.size() != 2) fail(node[i], index(path, i), "expected [state, action]");
      out.emplace_back(p[0], p[1]);
    }
    return out;
  }

  std::optional<double> opt_real(const YAML::Node& map, const std::string& key,
                                 const std::string& path) const {
    const YAML::Node n = map[key];
    if (!n.IsDefined()) return std::nullopt;
    return real(n, join(path, key));
  }

 private:
  std::string source_;
};

FilterSpec parse_filter(const Reader& rd, const YAML::Node& node, const std::string& path) {
  rd.check_keys(node, path, {"num", "den"});
  FilterSpec f;
  f.num = rd.reals(rd.require(node, "num", path), path + ".num");
  if (node["den"].IsDefined()) f.den = rd.reals(node["den"], path + ".den");
  if (f.num.empty()) rd.fail(node, path + ".num", "empty polynomial");
  if (f.den.empty() || f.den[0] == 0.0) rd.fail(node, path + ".den", "leading coefficient must be nonzero");
  return f;
}

SystemSpec parse_system(const Reader& rd, const YAML::Node& node) {
  const std::string path = "system";
  rd.expect_map(node, path);
  const std::string kind = rd.text(rd.require(node, "kind", path), "system.kind");
  if (kind == "linear") {
    rd.check_keys(node, path,
                  {"kind", "plant", "noise", "controller", "sigma_e", "sigma_r", "burn_in"});
    LinearSystemSpec s;
    s.plant = parse_filter(rd, rd.require(node, "plant", path), "system.plant");
    s.noise = parse_filter(rd, rd.require(node, "noise", path), "system.noise");
    if (node["controller"].IsDefined()) {
      s.controller = parse_filter(rd, node["controller"], "system.controller");
    } else {
      s.controller.num = {0.0};
    }
    s.sigma_e = rd.real(rd.require(node, "sigma_e", path), "system.sigma_e");
    if (node["sigma_r"].IsDefined()) s.sigma_r = rd.real(node["sigma_r"], "system.sigma_r");
    if (node["burn_in"].IsDefined()) s.burn_in = rd.count(node["burn_in"], "system.burn_in");

    LinearClosedLoopSystem sys{RationalFilter(ShiftPolynomial(s.plant.num), ShiftPolynomial(s.plant.den)),
                               RationalFilter(ShiftPolynomial(s.noise.num), ShiftPolynomial(s.noise.den)),
                               RationalFilter(ShiftPolynomial(s.controller.num),
                                              ShiftPolynomial(s.controller.den)),
                               s.sigma_e, s.sigma_r};
    try {
      sys.validate();
      const double rho = closed_loop_stability_radius(sys);
      if (rho >= 1.0) {
        std::ostringstream msg;
        msg << "closed loop is unstable (radius " << rho << ")";
        rd.fail(node, path, msg.str());
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rd.fail(node, path, e.what());
    }
    return s;
  }
  if (kind == "markov") {
    rd.check_keys(node, path, {"kind", "n_states", "n_actions", "transitions", "policy"});
    MarkovSystemSpec m;
    m.n_states = rd.positive(rd.require(node, "n_states", path), "system.n_states");
    m.n_actions = rd.positive(rd.require(node, "n_actions", path), "system.n_actions");
    const YAML::Node tr = rd.require(node, "transitions", path);
    const YAML::Node po = rd.require(node, "policy", path);
    // Shapes first, then row sums with the row's own position.
    std::vector<std::pair<YAML::Node, std::string>> t_rows, p_rows;
    rd.expect_seq(tr, "system.transitions");
    if (tr.size() != m.n_states) rd.fail(tr, "system.transitions", "expected one entry per state");
    for (std::size_t s = 0; s < m.n_states; ++s) {
      const std::string ps = Reader::index("system.transitions", s);
      rd.expect_seq(tr[s], ps);
      if (tr[s].size() != m.n_actions) rd.fail(tr[s], ps, "expected one row per action");
      for (std::size_t a = 0; a < m.n_actions; ++a) {
        const std::string pa = Reader::index(ps, a);
        const auto row = rd.reals(tr[s][a], pa);
        if (row.size() != m.n_states) rd.fail(tr[s][a], pa, "expected one entry per next state");
        m.transitions.insert(m.transitions.end(), row.begin(), row.end());
        t_rows.emplace_back(tr[s][a], pa);
      }
    }
    rd.expect_seq(po, "system.policy");
    if (po.size() != m.n_states) rd.fail(po, "system.policy", "expected one row per state");
    for (std::size_t s = 0; s < m.n_states; ++s) {
      const std::string ps = Reader::index("system.policy", s);
      const auto row = rd.reals(po[s], ps);
      if (row.size() != m.n_actions) rd.fail(po[s], ps, "expected one entry per action");
      m.policy.insert(m.policy.end(), row.begin(), row.end());
      p_rows.emplace_back(po[s], ps);
    }
    try {
      const ControlledMarkovChain chain(m.n_states, m.n_actions, m.transitions, m.policy);
      (void)stationary_distribution(chain);
    } catch (const Error& e) {
      // Point at the first offending row when there is one.
      auto bad = [](const YAML::Node& row) {
        double sum = 0.0;
        for (const auto& v : row) {
          const double x = v.as<double>();
          if (!(x >= 0.0 && x <= 1.0)) return true;
          sum += x;
        }
        return std::abs(sum - 1.0) > 1e-12;
      };
      for (const auto& [row, p] : t_rows) {
        if (bad(row)) rd.fail(row, p, e.what());
      }
      for (const auto& [row, p] : p_rows) {
        if (bad(row)) rd.fail(row, p, e.what());
      }
      rd.fail(node, path, e.what());
    }
    return m;
  }
  rd.fail(node["kind"], "system.kind", "expected 'linear' or 'markov', got '" + kind + "'");
}

ModelSpec parse_model(const Reader& rd, const YAML::Node& node) {
  const std::string path = "model";
  rd.check_keys(node, path, {"kind", "n_a", "n_b", "n_c", "sigma", "floor"});
  ModelSpec m;
  const std::string kind = rd.text(rd.require(node, "kind", path), "model.kind");
  if (kind == "arx") {
    m.kind = ModelKind::arx;
  } else if (kind == "armax") {
    m.kind = ModelKind::armax;
  } else if (kind == "tabular") {
    m.kind = ModelKind::tabular;
  } else {
    rd.fail(node["kind"], "model.kind", "expected arx, armax or tabular, got '" + kind + "'");
  }
  if (m.kind == ModelKind::tabular) {
    if (node["floor"].IsDefined()) m.floor = rd.real(node["floor"], "model.floor");
    if (!(m.floor > 0.0)) rd.fail(node["floor"], "model.floor", "must be positive");
    return m;
  }
  if (node["n_a"].IsDefined()) m.n_a = rd.count(node["n_a"], "model.n_a");
  if (node["n_b"].IsDefined()) m.n_b = rd.count(node["n_b"], "model.n_b");
  if (node["n_c"].IsDefined()) m.n_c = rd.count(node["n_c"], "model.n_c");
  if (node["sigma"].IsDefined()) m.sigma = rd.real(node["sigma"], "model.sigma");
  if (!(m.sigma > 0.0)) rd.fail(node["sigma"], "model.sigma", "must be positive");
  if (m.kind == ModelKind::arx) {
    if (m.n_c != 0) rd.fail(node["n_c"], "model.n_c", "ARX models have n_c = 0");
    if (m.n_b == 0) rd.fail(node, "model.n_b", "ARX models need n_b >= 1");
  }
  if (m.n_a + m.n_b + m.n_c == 0) rd.fail(node, path, "model has no parameters");
  return m;
}

ThetaSet parse_theta_set(const Reader& rd, const YAML::Node& node, const std::string& path) {
  rd.check_keys(node, path, {"box", "points_per_axis", "step", "points"});
  ThetaSet set;
  if (node["points"].IsDefined()) {
    const YAML::Node pts = node["points"];
    rd.expect_seq(pts, path + ".points");
    if (pts.size() == 0) rd.fail(pts, path + ".points", "empty point list");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      set.points.push_back(rd.reals(pts[i], Reader::index(path + ".points", i)));
    }
    return set;
  }
  set.box = rd.box(rd.require(node, "box", path), path + ".box");
  if (node["points_per_axis"].IsDefined()) {
    set.points_per_axis = rd.counts(node["points_per_axis"], path + ".points_per_axis");
  } else if (node["step"].IsDefined()) {
    const double step = rd.real(node["step"], path + ".step");
    if (!(step > 0.0)) rd.fail(node["step"], path + ".step", "must be positive");
    for (const auto& iv : set.box) {
      set.points_per_axis.push_back(static_cast<std::size_t>(std::llround(iv.width() / step)) + 1);
    }
  } else {
    rd.fail(node, path, "needs points_per_axis, step or points");
  }
  if (set.points_per_axis.size() != set.box.size()) {
    rd.fail(node, path, "points_per_axis must have one entry per box axis");
  }
  for (std::size_t n : set.points_per_axis) {
    if (n == 0) rd.fail(node, path, "every axis needs at least one point");
  }
  return set;
}

FitMethod parse_method_name(const Reader& rd, const YAML::Node& node, const std::string& path) {
  const std::string name = rd.text(node, path);
  if (name == "least_squares") return FitMethod::least_squares;
  if (name == "projected_gradient") return FitMethod::projected_gradient;
  if (name == "grid_search") return FitMethod::grid_search;
  if (name == "tabular_counts") return FitMethod::tabular_counts;
  rd.fail(node, path, "unknown estimation method '" + name + "'");
}

EstimatorSpec parse_estimator(const Reader& rd, const YAML::Node& node) {
  const std::string path = "estimator";
  rd.check_keys(node, path, {"methods", "T", "box", "grid", "true_theta", "tolerance", "min_error",
                             "expect_unvisited"});
  EstimatorSpec e;
  const YAML::Node methods = rd.require(node, "methods", path);
  rd.expect_seq(methods, "estimator.methods");
  if (methods.size() == 0) rd.fail(methods, "estimator.methods", "no estimation methods");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string p = Reader::index("estimator.methods", i);
    MethodSpec ms;
    if (methods[i].IsMap()) {
      rd.check_keys(methods[i], p, {"name", "expect_error"});
      ms.method = parse_method_name(rd, rd.require(methods[i], "name", p), p + ".name");
      if (methods[i]["expect_error"].IsDefined()) {
        ms.expect_error = rd.text(methods[i]["expect_error"], p + ".expect_error");
        if (*ms.expect_error != "not_persistently_exciting") {
          rd.fail(methods[i]["expect_error"], p + ".expect_error",
                  "only 'not_persistently_exciting' is supported");
        }
      }
    } else {
      ms.method = parse_method_name(rd, methods[i], p);
    }
    e.methods.push_back(ms);
  }
  e.T_values = rd.counts(rd.require(node, "T", path), "estimator.T");
  if (e.T_values.empty()) rd.fail(node["T"], "estimator.T", "no sample sizes");
  for (std::size_t i = 0; i < e.T_values.size(); ++i) {
    if (e.T_values[i] == 0 || (i > 0 && e.T_values[i] <= e.T_values[i - 1])) {
      rd.fail(node["T"], "estimator.T", "sample sizes must be positive and increasing");
    }
  }
  if (node["box"].IsDefined()) e.box = rd.box(node["box"], "estimator.box");
  if (node["grid"].IsDefined()) e.grid = parse_theta_set(rd, node["grid"], "estimator.grid");
  if (node["true_theta"].IsDefined()) e.true_theta = rd.reals(node["true_theta"], "estimator.true_theta");
  e.tolerance = rd.opt_real(node, "tolerance", path);
  e.min_error = rd.opt_real(node, "min_error", path);
  if (node["expect_unvisited"].IsDefined()) {
    e.expect_unvisited = rd.pairs(node["expect_unvisited"], "estimator.expect_unvisited");
  }
  return e;
}

DiagnosticSpec parse_diagnostic(const Reader& rd, const YAML::Node& node, const std::string& path) {
  rd.expect_map(node, path);
  const std::string kind = rd.text(rd.require(node, "kind", path), path + ".kind");
  auto key = [&](const char* k) { return Reader::join(path, k); };
  if (kind == "s1_decay") {
    rd.check_keys(node, path, {"kind", "thetas", "s_values", "t_eval", "replications",
                               "expect_exact_finite_memory", "lambda_min", "lambda_max",
                               "r_squared_min"});
    S1DecaySpec d;
    const YAML::Node th = rd.require(node, "thetas", path);
    rd.expect_seq(th, key("thetas"));
    for (std::size_t i = 0; i < th.size(); ++i) {
      d.thetas.push_back(rd.reals(th[i], Reader::index(key("thetas"), i)));
    }
    if (d.thetas.empty()) rd.fail(th, key("thetas"), "no parameter values");
    d.s_values = rd.counts(rd.require(node, "s_values", path), key("s_values"));
    d.t_eval = rd.positive(rd.require(node, "t_eval", path), key("t_eval"));
    d.replications = rd.count(rd.require(node, "replications", path), key("replications"));
    if (d.replications < 30) rd.fail(node["replications"], key("replications"), "needs at least 30");
    for (std::size_t s : d.s_values) {
      if (s == 0 || s >= d.t_eval) rd.fail(node["s_values"], key("s_values"), "need 0 < s < t_eval");
    }
    if (node["expect_exact_finite_memory"].IsDefined()) {
      d.expect_exact_finite_memory =
          rd.boolean(node["expect_exact_finite_memory"], key("expect_exact_finite_memory"));
    }
    d.lambda_min = rd.opt_real(node, "lambda_min", path);
    d.lambda_max = rd.opt_real(node, "lambda_max", path);
    d.r_squared_min = rd.opt_real(node, "r_squared_min", path);
    return d;
  }
  if (kind == "uniform_convergence") {
    rd.check_keys(node, path, {"kind", "thetas", "T", "T_ref", "max_ratio"});
    UniformConvergenceSpec d;
    d.thetas = parse_theta_set(rd, rd.require(node, "thetas", path), key("thetas"));
    d.T_values = rd.counts(rd.require(node, "T", path), key("T"));
    if (d.T_values.size() < 2) rd.fail(node["T"], key("T"), "needs at least two sample sizes");
    d.T_ref = rd.positive(rd.require(node, "T_ref", path), key("T_ref"));
    std::size_t T_max = 0;
    for (std::size_t T : d.T_values) {
      if (T == 0) rd.fail(node["T"], key("T"), "sample sizes must be positive");
      T_max = std::max(T_max, T);
    }
    if (d.T_ref < 10 * T_max) rd.fail(node["T_ref"], key("T_ref"), "must be at least 10 * max(T)");
    if (node["max_ratio"].IsDefined()) d.max_ratio = rd.real(node["max_ratio"], key("max_ratio"));
    return d;
  }
  if (kind == "persistent_excitation") {
    rd.check_keys(node, path, {"kind", "u_lags", "y_lags", "T", "expect_pe",
                               "expect_min_eigenvalue", "eigenvalue_tolerance"});
    ExcitationSpec d;
    if (node["u_lags"].IsDefined()) d.u_lags = rd.count(node["u_lags"], key("u_lags"));
    if (node["y_lags"].IsDefined()) d.y_lags = rd.count(node["y_lags"], key("y_lags"));
    if (d.u_lags + d.y_lags == 0) rd.fail(node, path, "regressor has no lags");
    d.T = rd.positive(rd.require(node, "T", path), key("T"));
    if (d.T < 10 * (d.u_lags + d.y_lags)) rd.fail(node["T"], key("T"), "must be at least 10 * dim");
    if (node["expect_pe"].IsDefined()) d.expect_pe = rd.boolean(node["expect_pe"], key("expect_pe"));
    d.expect_min_eigenvalue = rd.opt_real(node, "expect_min_eigenvalue", path);
    if (node["eigenvalue_tolerance"].IsDefined()) {
      d.eigenvalue_tolerance = rd.real(node["eigenvalue_tolerance"], key("eigenvalue_tolerance"));
    }
    return d;
  }
  if (kind == "drift") {
    rd.check_keys(node, path, {"kind", "T", "windows", "threshold_sigmas", "expect_drift"});
    DriftSpec d;
    d.T = rd.positive(rd.require(node, "T", path), key("T"));
    if (node["windows"].IsDefined()) d.windows = rd.count(node["windows"], key("windows"));
    if (d.windows < 2) rd.fail(node["windows"], key("windows"), "needs at least 2 windows");
    if (node["threshold_sigmas"].IsDefined()) {
      d.threshold_sigmas = rd.real(node["threshold_sigmas"], key("threshold_sigmas"));
    }
    if (node["expect_drift"].IsDefined()) {
      d.expect_drift = rd.boolean(node["expect_drift"], key("expect_drift"));
    }
    return d;
  }
  if (kind == "r_mean_probe") {
    rd.check_keys(node, path, {"kind", "probes", "s_values", "t_eval", "replications"});
    RMeanSpec d;
    const YAML::Node probes = rd.require(node, "probes", path);
    rd.expect_seq(probes, key("probes"));
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const std::string p = Reader::index(key("probes"), i);
      rd.check_keys(probes[i], p, {"r", "lambda_min", "lambda_max", "r_squared_min"});
      RMeanProbeSpec probe;
      const std::size_t r = rd.count(rd.require(probes[i], "r", p), p + ".r");
      if (r != 2 && r != 4) rd.fail(probes[i]["r"], p + ".r", "r must be 2 or 4");
      probe.r = static_cast<unsigned>(r);
      probe.lambda_min = rd.opt_real(probes[i], "lambda_min", p);
      probe.lambda_max = rd.opt_real(probes[i], "lambda_max", p);
      probe.r_squared_min = rd.opt_real(probes[i], "r_squared_min", p);
      d.probes.push_back(probe);
    }
    if (d.probes.empty()) rd.fail(probes, key("probes"), "no probes");
    d.s_values = rd.counts(rd.require(node, "s_values", path), key("s_values"));
    d.t_eval = rd.positive(rd.require(node, "t_eval", path), key("t_eval"));
    d.replications = rd.count(rd.require(node, "replications", path), key("replications"));
    if (d.replications < 2) rd.fail(node["replications"], key("replications"), "needs at least 2");
    for (std::size_t s : d.s_values) {
      if (s == 0 || s >= d.t_eval) rd.fail(node["s_values"], key("s_values"), "need 0 < s < t_eval");
    }
    return d;
  }
  if (kind == "stationary") {
    rd.check_keys(node, path, {"kind", "expect_full_support", "expect_zero_set"});
    StationarySpec d;
    if (node["expect_full_support"].IsDefined()) {
      d.expect_full_support = rd.boolean(node["expect_full_support"], key("expect_full_support"));
    }
    if (node["expect_zero_set"].IsDefined()) {
      d.expect_zero_set = rd.pairs(node["expect_zero_set"], key("expect_zero_set"));
    }
    return d;
  }
  if (kind == "kl_bias") {
    rd.check_keys(node, path, {"kind", "max_bias"});
    KlBiasSpec d;
    if (node["max_bias"].IsDefined()) d.max_bias = rd.real(node["max_bias"], key("max_bias"));
    return d;
  }
  if (kind == "grid_oracle") {
    rd.check_keys(node, path, {"kind", "box", "step", "T_ref", "max_distance"});
    GridOracleSpec d;
    d.box = rd.box(rd.require(node, "box", path), key("box"));
    if (node["step"].IsDefined()) d.step = rd.real(node["step"], key("step"));
    if (!(d.step > 0.0)) rd.fail(node["step"], key("step"), "must be positive");
    d.T_ref = rd.positive(rd.require(node, "T_ref", path), key("T_ref"));
    if (node["max_distance"].IsDefined()) {
      d.max_distance = rd.real(node["max_distance"], key("max_distance"));
    }
    return d;
  }
  rd.fail(node["kind"], path + ".kind", "unknown diagnostic kind '" + kind + "'");
}

json filter_json(const FilterSpec& f) { return {{"num", f.num}, {"den", f.den}}; }

json interval_json(const std::vector<Interval>& box) {
  json out = json::array();
  for (const auto& iv : box) out.push_back({iv.lo, iv.hi});
  return out;
}

json theta_set_json(const ThetaSet& t) {
  if (t.box.empty()) return {{"points", t.points}};
  return {{"box", interval_json(t.box)}, {"points_per_axis", t.points_per_axis}};
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json diagnostic_json(const DiagnosticSpec& spec) {
  json j = std::visit(
      [](const auto& d) -> json {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, S1DecaySpec>) {
          return {{"thetas", d.thetas}, {"s_values", d.s_values}, {"t_eval", d.t_eval},
                  {"replications", d.replications},
                  {"expect_exact_finite_memory", d.expect_exact_finite_memory},
                  {"lambda_min", opt(d.lambda_min)}, {"lambda_max", opt(d.lambda_max)},
                  {"r_squared_min", opt(d.r_squared_min)}};
        } else if constexpr (std::is_same_v<D, UniformConvergenceSpec>) {
          return {{"thetas", theta_set_json(d.thetas)}, {"T", d.T_values}, {"T_ref", d.T_ref},
                  {"max_ratio", d.max_ratio}};
        } else if constexpr (std::is_same_v<D, ExcitationSpec>) {
          return {{"u_lags", d.u_lags}, {"y_lags", d.y_lags}, {"T", d.T},
                  {"expect_pe", d.expect_pe},
                  {"expect_min_eigenvalue", opt(d.expect_min_eigenvalue)},
                  {"eigenvalue_tolerance", d.eigenvalue_tolerance}};
        } else if constexpr (std::is_same_v<D, DriftSpec>) {
          return {{"T", d.T}, {"windows", d.windows}, {"threshold_sigmas", d.threshold_sigmas},
                  {"expect_drift", d.expect_drift}};
        } else if constexpr (std::is_same_v<D, RMeanSpec>) {
          json probes = json::array();
          for (const auto& p : d.probes) {
            probes.push_back({{"r", p.r}, {"lambda_min", opt(p.lambda_min)},
                              {"lambda_max", opt(p.lambda_max)},
                              {"r_squared_min", opt(p.r_squared_min)}});
          }
          return {{"probes", probes}, {"s_values", d.s_values}, {"t_eval", d.t_eval},
                  {"replications", d.replications}};
        } else if constexpr (std::is_same_v<D, StationarySpec>) {
          return {{"expect_full_support", d.expect_full_support},
                  {"expect_zero_set", opt(d.expect_zero_set)}};
        } else if constexpr (std::is_same_v<D, KlBiasSpec>) {
          return {{"max_bias", d.max_bias}};
        } else {
          return {{"box", interval_json(d.box)}, {"step", d.step}, {"T_ref", d.T_ref},
                  {"max_distance", d.max_distance}};
        }
      },
      spec);
  j["kind"] = diagnostic_kind(spec);
  return j;
}

std::string method_name(FitMethod m) { return to_string(m); }

}  // namespace

std::string diagnostic_kind(const DiagnosticSpec& spec) {
  static const char* names[] = {"s1_decay", "uniform_convergence", "persistent_excitation",
                                "drift",    "r_mean_probe",        "stationary",
                                "kl_bias",  "grid_oracle"};
  return names[spec.index()];
}

std::size_t model_dimension(const ExperimentConfig& config) {
  const auto& m = config.model;
  if (m.kind == ModelKind::tabular) {
    const auto& chain = std::get<MarkovSystemSpec>(config.system);
    return chain.n_states * chain.n_actions * chain.n_states;
  }
  return m.n_a + m.n_b + m.n_c;
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [&](const std::string& msg) { throw ConfigError(c.scenario + ": " + msg); };
  if (c.scenario.empty()) fail("scenario name is empty");
  if (c.seeds.empty()) fail("seeds: at least one seed is required");
  const bool markov = std::holds_alternative<MarkovSystemSpec>(c.system);
  const bool tabular = c.model.kind == ModelKind::tabular;
  if (markov != tabular) {
    fail(std::string("model.kind: ") +
         (markov ? "a Markov system needs a tabular model" : "a tabular model needs a Markov system"));
  }
  const std::size_t dim = model_dimension(c);
  const auto& e = c.estimator;
  for (const auto& ms : e.methods) {
    const bool counts = ms.method == FitMethod::tabular_counts;
    if (counts != tabular) {
      fail("estimator.methods: " + method_name(ms.method) + " does not apply to this model");
    }
    if (ms.method == FitMethod::least_squares && c.model.kind != ModelKind::arx) {
      fail("estimator.methods: least_squares needs an ARX model");
    }
    if ((ms.method == FitMethod::projected_gradient || ms.method == FitMethod::least_squares) &&
        e.box.size() != dim) {
      fail("estimator.box: expected " + std::to_string(dim) + " intervals");
    }
    if (ms.method == FitMethod::grid_search) {
      if (!e.grid) fail("estimator.grid: required by grid_search");
      if (!e.grid->box.empty() && e.grid->box.size() != dim) {
        fail("estimator.grid.box: expected " + std::to_string(dim) + " intervals");
      }
    }
  }
  if (e.true_theta && !tabular && e.true_theta->size() != dim) {
    fail("estimator.true_theta: expected " + std::to_string(dim) + " values");
  }
  if ((e.tolerance || e.min_error) && !e.true_theta && !tabular) {
    fail("estimator: tolerance and min_error need true_theta");
  }
  if (e.expect_unvisited && !tabular) fail("estimator.expect_unvisited: tabular models only");
  auto check_points = [&](const std::vector<std::vector<double>>& pts, const std::string& where) {
    for (const auto& p : pts) {
      if (p.size() != dim) fail(where + ": expected points of dimension " + std::to_string(dim));
    }
  };
  for (const auto& d : c.diagnostics) {
    const std::string kind = diagnostic_kind(d);
    if (const auto* s1 = std::get_if<S1DecaySpec>(&d)) check_points(s1->thetas, kind + ".thetas");
    if (const auto* u = std::get_if<UniformConvergenceSpec>(&d)) {
      check_points(u->thetas.points, kind + ".thetas.points");
      if (!u->thetas.box.empty() && u->thetas.box.size() != dim) {
        fail(kind + ".thetas.box: expected " + std::to_string(dim) + " intervals");
      }
    }
    const bool linear_only = std::holds_alternative<ExcitationSpec>(d) ||
                             std::holds_alternative<DriftSpec>(d) ||
                             std::holds_alternative<RMeanSpec>(d) ||
                             std::holds_alternative<GridOracleSpec>(d);
    const bool markov_only =
        std::holds_alternative<StationarySpec>(d) || std::holds_alternative<KlBiasSpec>(d);
    if (linear_only && markov) fail(kind + ": needs a linear system");
    if (markov_only && !markov) fail(kind + ": needs a Markov system");
    if (const auto* g = std::get_if<GridOracleSpec>(&d)) {
      if (c.model.kind != ModelKind::arx) fail(kind + ": needs an ARX model");
      if (g->box.size() != dim) fail(kind + ".box: expected " + std::to_string(dim) + " intervals");
      bool has_pg = false;
      for (const auto& ms : e.methods) has_pg = has_pg || ms.method == FitMethod::projected_gradient;
      if (!has_pg) fail(kind + ": compares projected_gradient estimates; add that method");
      if (!e.true_theta) fail(kind + ": needs estimator.true_theta");
    }
    if (std::holds_alternative<KlBiasSpec>(d)) {
      bool has_counts = false;
      for (const auto& ms : e.methods) has_counts = has_counts || ms.method == FitMethod::tabular_counts;
      if (!has_counts) fail(kind + ": needs the tabular_counts method");
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": YAML syntax error: " + e.msg);
  }
  const Reader rd(source);
  rd.check_keys(root, "", {"scenario", "description", "system", "model", "estimator",
                           "diagnostics", "seeds", "output"});
  ExperimentConfig c;
  c.scenario = rd.text(rd.require(root, "scenario", ""), "scenario");
  if (root["description"].IsDefined()) c.description = rd.text(root["description"], "description");
  c.system = parse_system(rd, rd.require(root, "system", ""));
  c.model = parse_model(rd, rd.require(root, "model", ""));
  c.estimator = parse_estimator(rd, rd.require(root, "estimator", ""));
  if (root["diagnostics"].IsDefined() && !root["diagnostics"].IsNull()) {
    const YAML::Node diags = root["diagnostics"];
    rd.expect_seq(diags, "diagnostics");
    for (std::size_t i = 0; i < diags.size(); ++i) {
      c.diagnostics.push_back(parse_diagnostic(rd, diags[i], Reader::index("diagnostics", i)));
    }
  }
  const YAML::Node seeds = rd.require(root, "seeds", "");
  for (std::size_t s : rd.counts(seeds, "seeds")) c.seeds.push_back(s);
  if (c.seeds.empty()) rd.fail(seeds, "seeds", "at least one seed is required");
  if (root["output"].IsDefined()) c.output = rd.text(root["output"], "output");
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["description"] = c.description;
  if (const auto* lin = std::get_if<LinearSystemSpec>(&c.system)) {
    j["system"] = {{"kind", "linear"},
                   {"plant", filter_json(lin->plant)},
                   {"noise", filter_json(lin->noise)},
                   {"controller", filter_json(lin->controller)},
                   {"sigma_e", lin->sigma_e},
                   {"sigma_r", lin->sigma_r},
                   {"burn_in", opt(lin->burn_in)}};
  } else {
    const auto& m = std::get<MarkovSystemSpec>(c.system);
    j["system"] = {{"kind", "markov"},
                   {"n_states", m.n_states},
                   {"n_actions", m.n_actions},
                   {"transitions", m.transitions},
                   {"policy", m.policy}};
  }
  static const char* kinds[] = {"arx", "armax", "tabular"};
  j["model"] = {{"kind", kinds[static_cast<int>(c.model.kind)]}, {"n_a", c.model.n_a},
                {"n_b", c.model.n_b},  {"n_c", c.model.n_c},
                {"sigma", c.model.sigma}, {"floor", c.model.floor}};
  json methods = json::array();
  for (const auto& ms : c.estimator.methods) {
    methods.push_back({{"name", method_name(ms.method)}, {"expect_error", opt(ms.expect_error)}});
  }
  j["estimator"] = {{"methods", methods},
                    {"T", c.estimator.T_values},
                    {"box", interval_json(c.estimator.box)},
                    {"grid", c.estimator.grid ? theta_set_json(*c.estimator.grid) : json(nullptr)},
                    {"true_theta", opt(c.estimator.true_theta)},
                    {"tolerance", opt(c.estimator.tolerance)},
                    {"min_error", opt(c.estimator.min_error)},
                    {"expect_unvisited", opt(c.estimator.expect_unvisited)}};
  json diags = json::array();
  for (const auto& d : c.diagnostics) diags.push_back(diagnostic_json(d));
  j["diagnostics"] = diags;
  j["seeds"] = c.seeds;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace loopid::runner
