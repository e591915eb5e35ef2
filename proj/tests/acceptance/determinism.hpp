#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

#include "loopid/runner/config.hpp"
#include "loopid/runner/experiment.hpp"
#include "loopid/runner/scenarios.hpp"

namespace loopid::acceptance {

struct DeterminismResult {
  bool identical = false;
  std::string detail;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs every shipped scenario twice and compares the CSV artifacts byte for byte.
inline DeterminismResult check_determinism() {
  namespace fs = std::filesystem;
  const fs::path root =
      fs::temp_directory_path() / ("loopid-determinism-" + std::to_string(::getpid()));
  const std::string dir = runner::scenario_dir();
  const auto names = runner::list_scenarios(dir);
  if (names.empty()) return {false, "no scenarios found in " + dir};
  std::size_t csvs = 0;
  DeterminismResult result{true, ""};
  for (const auto& name : names) {
    const auto config = runner::load_config(runner::resolve_config_path(name, dir));
    runner::RunManifest runs[2];
    for (int k = 0; k < 2; ++k) {
      runner::RunOptions opts;
      opts.output_dir = (root / name / (k == 0 ? "a" : "b")).string();
      runs[k] = runner::run_experiment(config, opts);
    }
    for (const auto& artifact : runs[0].artifacts) {
      if (fs::path(artifact).extension() != ".csv") continue;
      ++csvs;
      if (slurp(fs::path(runs[0].output_dir) / artifact) !=
          slurp(fs::path(runs[1].output_dir) / artifact)) {
        result = {false, name + "/" + artifact + " differs between runs"};
        break;
      }
    }
    if (!result.identical) break;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  if (result.identical) {
    result.detail = std::to_string(csvs) + " CSV files byte-identical across two runs of " +
                    std::to_string(names.size()) + " scenarios";
  }
  return result;
}

}  // namespace loopid::acceptance
