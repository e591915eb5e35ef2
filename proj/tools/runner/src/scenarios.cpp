#include "loopid/runner/scenarios.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "loopid/runner/config.hpp"

#ifndef LOOPID_DEFAULT_SCENARIO_DIR
#define LOOPID_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace loopid::runner {

namespace fs = std::filesystem;

std::string scenario_dir() {
  const char* env = std::getenv("LOOPID_SCENARIO_DIR");
  return (env && *env) ? std::string(env) : std::string(LOOPID_DEFAULT_SCENARIO_DIR);
}

std::vector<std::string> list_scenarios(const std::string& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".yaml") {
      out.push_back(entry.path().stem().string());
    }
  }
  if (ec) throw ConfigError("cannot list scenarios in " + dir + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::string resolve_config_path(const std::string& arg, const std::string& dir) {
  if (fs::is_regular_file(arg)) return arg;
  const fs::path candidate = fs::path(dir) / (arg + ".yaml");
  if (fs::is_regular_file(candidate)) return candidate.string();
  throw ConfigError(arg + ": no such config file or scenario (looked in " + dir + ")");
}

}  // namespace loopid::runner
