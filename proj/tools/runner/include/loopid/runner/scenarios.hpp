#pragma once

#include <string>
#include <vector>

namespace loopid::runner {

/// $LOOPID_SCENARIO_DIR, else the directory compiled in at build time.
std::string scenario_dir();

/// Scenario names (file stems of *.yaml), sorted.
std::vector<std::string> list_scenarios(const std::string& dir);

/// An existing file path is returned as is; otherwise `arg` is looked up as
/// a scenario name in `dir`.
std::string resolve_config_path(const std::string& arg, const std::string& dir);

}  // namespace loopid::runner
