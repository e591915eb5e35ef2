#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loopid/core/error.hpp"
#include "loopid/runner/config.hpp"

namespace loopid::runner {

inline constexpr const char* kToolVersion = "0.1.0";

/// Failure inside a run, prefixed with the module it came from.
class RunError : public Error {
 public:
  using Error::Error;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Key figures of one diagnostic, in display order.
struct DiagnosticSummary {
  std::string name;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> artifacts;
};

struct RunManifest {
  std::string scenario;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;  // relative to output_dir
  std::vector<Verdict> verdicts;
  std::vector<DiagnosticSummary> diagnostics;
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds
  double wall_clock_seconds = 0.0;

  bool all_pass() const;
};

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
};

/// Directory used when neither --out nor the config sets one:
/// $LOOPID_OUTPUT_ROOT/<scenario>, else loopid-out/<scenario>.
std::string default_output_dir(const std::string& scenario);

/// Simulation, estimation, then diagnostics. Writes CSVs, SVGs and
/// manifest.json into the output directory.
RunManifest run_experiment(ExperimentConfig config, const RunOptions& options = {});

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace loopid::runner
