#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "loopid/runner/config.hpp"
#include "loopid/runner/experiment.hpp"
#include "loopid/runner/report.hpp"
#include "loopid/runner/scenarios.hpp"

namespace fs = std::filesystem;

namespace loopid::runner {
namespace {

const char* kSmallArx = R"(scenario: small-arx
system:
  kind: linear
  plant: {num: [0.0, 1.0], den: [1.0, -0.5]}
  noise: {num: [1.0], den: [1.0, -0.5]}
  controller: {num: [0.0]}
  sigma_e: 0.1
  sigma_r: 1.0
model: {kind: arx, n_a: 1, n_b: 1, sigma: 0.1}
estimator:
  methods: [least_squares]
  T: [500, 2000]
  box: [[-1.0, 1.0], [0.0, 2.0]]
  true_theta: [0.5, 1.0]
  tolerance: TOL
DIAGS
seeds: [1, 2]
)";

std::string small_arx(const std::string& tol, const std::string& diags) {
  std::string s = kSmallArx;
  s.replace(s.find("TOL"), 3, tol);
  s.replace(s.find("DIAGS"), 5, diags);
  return s;
}

const std::string kTwoDiags = R"(diagnostics:
  - kind: persistent_excitation
    T: 2000
    expect_pe: true
  - kind: drift
    T: 4000
    expect_drift: false)";

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("loopid-runner-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / ("loopid-cli-" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string("\"") + LOOPID_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  fs::remove(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, ShippedScenariosParse) {
  const auto names = list_scenarios(scenario_dir());
  ASSERT_GE(names.size(), 5u);
  for (const auto& n : names) {
    EXPECT_NO_THROW(load_config(resolve_config_path(n, scenario_dir()))) << n;
  }
}

TEST(Config, HashIgnoresKeyOrderAndYamlStyle) {
  const auto a = parse_config(small_arx("0.05", ""), "a");
  std::string flow = small_arx("0.05", "");
  flow.replace(flow.find("model: {kind: arx, n_a: 1, n_b: 1, sigma: 0.1}"),
               std::string("model: {kind: arx, n_a: 1, n_b: 1, sigma: 0.1}").size(),
               "model:\n  sigma: 1.0e-1\n  n_b: 1\n  kind: arx\n  n_a: 1");
  const auto b = parse_config(flow, "b");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(parse_config(small_arx("0.06", ""), "c")));
  auto with_out = a;
  with_out.output = "/somewhere/else";
  EXPECT_EQ(config_hash(a), config_hash(with_out));
}

TEST(Config, BadRowSumNamesTheRowAndLine) {
  std::string text = slurp(resolve_config_path("markov-support-failure", scenario_dir()));
  text.replace(text.find("[0.3, 0.5, 0.2]"), 15, "[0.3, 0.4, 0.2]");
  try {
    parse_config(text, "bad.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.yaml:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("transitions[1][0]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0.9"), std::string::npos) << msg;
  }
}

TEST(Config, UnknownKeyReportsLineAndColumn) {
  std::string text = small_arx("0.05", "");
  text.replace(text.find("  sigma_r: 1.0"), 13, "  sigma_r: 1.0\n  sigma_x: 2.0");
  try {
    parse_config(text, "cfg.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(std::regex_search(msg, std::regex(R"(cfg\.yaml:\d+:\d+:)"))) << msg;
    EXPECT_NE(msg.find("sigma_x"), std::string::npos) << msg;
  }
}

TEST(Manifest, RoundTripAndArtifactsExist) {
  TempDir tmp;
  RunOptions opt;
  opt.output_dir = (tmp.path() / "run").string();
  const auto m = run_experiment(parse_config(small_arx("0.05", kTwoDiags), "x"), opt);
  EXPECT_TRUE(m.all_pass());
  for (const auto& a : m.artifacts) EXPECT_TRUE(fs::exists(fs::path(m.output_dir) / a)) << a;
  const auto back = read_manifest((fs::path(m.output_dir) / "manifest.json").string());
  EXPECT_EQ(back.scenario, m.scenario);
  EXPECT_EQ(back.config_hash, m.config_hash);
  EXPECT_EQ(back.seeds, m.seeds);
  EXPECT_EQ(back.artifacts, m.artifacts);
  ASSERT_EQ(back.verdicts.size(), m.verdicts.size());
  for (std::size_t i = 0; i < m.verdicts.size(); ++i) {
    EXPECT_EQ(back.verdicts[i].name, m.verdicts[i].name);
    EXPECT_EQ(back.verdicts[i].pass, m.verdicts[i].pass);
  }
  const fs::path copy = tmp.path() / "copy.json";
  write_manifest(back, copy.string());
  EXPECT_EQ(slurp(copy), slurp(fs::path(m.output_dir) / "manifest.json"));
}

TEST(Report, ListsEveryDiagnostic) {
  TempDir tmp;
  RunOptions opt;
  opt.output_dir = (tmp.path() / "run").string();
  const auto m = run_experiment(parse_config(small_arx("0.05", kTwoDiags), "x"), opt);
  const std::string text = render_report((fs::path(m.output_dir) / "manifest.json").string());
  ASSERT_EQ(m.diagnostics.size(), 2u);
  for (const auto& d : m.diagnostics) {
    EXPECT_NE(text.find("Diagnostic " + d.name + " (" + d.kind + ")"), std::string::npos) << d.name;
  }
  EXPECT_NE(text.find("least_squares"), std::string::npos);
  EXPECT_NE(text.find("Overall: PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(m.output_dir) / "report.txt"));
}

TEST(Report, NoDiagnosticsGivesEstimationOnly) {
  TempDir tmp;
  RunOptions opt;
  opt.output_dir = (tmp.path() / "run").string();
  const auto m = run_experiment(parse_config(small_arx("0.05", ""), "x"), opt);
  const std::string text = render_report((fs::path(m.output_dir) / "manifest.json").string());
  EXPECT_NE(text.find("Estimation"), std::string::npos);
  EXPECT_EQ(text.find("Diagnostic "), std::string::npos);
}

TEST(Report, MissingCsvIsAnError) {
  TempDir tmp;
  RunOptions opt;
  opt.output_dir = (tmp.path() / "run").string();
  const auto m = run_experiment(parse_config(small_arx("0.05", kTwoDiags), "x"), opt);
  fs::remove(fs::path(m.output_dir) / "estimates.csv");
  try {
    render_report((fs::path(m.output_dir) / "manifest.json").string());
    FAIL() << "expected RunError";
  } catch (const RunError& e) {
    EXPECT_NE(std::string(e.what()).find("estimates.csv"), std::string::npos);
  }
}

TEST(Runner, SeedOverrideChangesOnlySeeds) {
  TempDir tmp;
  RunOptions opt;
  opt.output_dir = (tmp.path() / "run").string();
  opt.seeds = std::vector<std::uint64_t>{7};
  const auto m = run_experiment(parse_config(small_arx("0.05", ""), "x"), opt);
  EXPECT_EQ(m.seeds, std::vector<std::uint64_t>{7});
}

// Any shipped scenario whose s1_decay verdict passes must also pass its
// uniform-convergence check.
TEST(Scenarios, S1DecayImpliesUniformConvergence) {
  TempDir tmp;
  std::size_t checked = 0;
  for (const auto& name : list_scenarios(scenario_dir())) {
    const auto cfg = load_config(resolve_config_path(name, scenario_dir()));
    bool has_s1 = false;
    for (const auto& d : cfg.diagnostics) has_s1 = has_s1 || diagnostic_kind(d) == "s1_decay";
    if (!has_s1) continue;
    RunOptions opt;
    opt.output_dir = (tmp.path() / name).string();
    const auto m = run_experiment(cfg, opt);
    bool s1_pass = false, uc_seen = false, uc_pass = true;
    for (const auto& v : m.verdicts) {
      if (v.name.find("s1_decay") != std::string::npos) s1_pass = v.pass;
      if (v.name.find("uniform_convergence") != std::string::npos) {
        uc_seen = true;
        uc_pass = uc_pass && v.pass;
      }
    }
    if (s1_pass) {
      EXPECT_TRUE(uc_seen) << name;
      EXPECT_TRUE(uc_pass) << name;
      ++checked;
    }
  }
  EXPECT_GE(checked, 2u);
}

TEST(Cli, ListScenarios) {
  std::string out;
  EXPECT_EQ(run_cli("list-scenarios", &out), 0);
  for (const auto& n : list_scenarios(scenario_dir())) EXPECT_NE(out.find(n), std::string::npos);
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  const auto good = tmp.write("good.yaml", small_arx("0.05", ""));
  const auto bad_verdict = tmp.write("strict.yaml", small_arx("1e-9", ""));
  const auto broken = tmp.write("broken.yaml", "scenario: x\nsystem: [1, 2\n");
  std::string out;
  EXPECT_EQ(run_cli("run " + good.string() + " --out " + (tmp.path() / "g").string(), &out), 0) << out;
  EXPECT_NE(out.find("manifest:"), std::string::npos);
  EXPECT_EQ(run_cli("report " + (tmp.path() / "g" / "manifest.json").string(), &out), 0) << out;
  EXPECT_EQ(run_cli("run " + bad_verdict.string() + " --out " + (tmp.path() / "s").string(), &out), 1) << out;
  EXPECT_NE(out.find("FAIL"), std::string::npos);
  EXPECT_EQ(run_cli("run " + broken.string(), &out), 2) << out;
  EXPECT_EQ(run_cli("run no-such-scenario", &out), 2) << out;
  EXPECT_EQ(run_cli("frobnicate", &out), 2) << out;
}

}  // namespace
}  // namespace loopid::runner
