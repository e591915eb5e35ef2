#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loopid/runner/config.hpp"
#include "loopid/runner/experiment.hpp"
#include "loopid/runner/report.hpp"
#include "loopid/runner/scenarios.hpp"

namespace {

// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 bad config or
// usage, 3 runtime error.
constexpr int kVerdictFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace loopid::runner;
  CLI::App app{"loopid: closed-loop identification experiments"};
  app.require_subcommand(1);

  std::string config_arg;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  auto* run = app.add_subcommand("run", "Run an experiment config or shipped scenario");
  run->add_option("config", config_arg, "YAML config path or scenario name")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seeds", seeds, "Comma-separated seeds overriding the config")
      ->delimiter(',');

  std::string manifest_path;
  auto* report = app.add_subcommand("report", "Summarize a finished run");
  report->add_option("manifest", manifest_path, "Path to manifest.json")->required();

  auto* list = app.add_subcommand("list-scenarios", "List shipped scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*list) {
      const std::string dir = scenario_dir();
      for (const auto& name : list_scenarios(dir)) std::cout << name << '\n';
      return 0;
    }
    if (*report) {
      std::cout << render_report(manifest_path);
      return 0;
    }
    const ExperimentConfig config = load_config(resolve_config_path(config_arg, scenario_dir()));
    RunOptions options;
    if (!out_dir.empty()) options.output_dir = out_dir;
    if (!seeds.empty()) options.seeds = seeds;
    const RunManifest manifest = run_experiment(config, options);
    for (const auto& v : manifest.verdicts) {
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
    }
    std::cout << "manifest: " << manifest.output_dir << "/manifest.json\n";
    return manifest.all_pass() ? 0 : kVerdictFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
