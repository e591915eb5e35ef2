#include "loopid/runner/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "loopid/diagnostics/objective.hpp"
#include "loopid/runner/experiment.hpp"

namespace loopid::runner {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(5);
  out << v;
  return out.str();
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

// Median theta_hat per (method, T) from estimates.csv.
std::string estimation_table(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  if (!std::getline(in, line)) return "  (no estimates)\n";
  const auto header = split(line);
  const std::size_t first = 3;
  const std::size_t last = header.size() - 3;  // objective, converged, iterations
  std::map<std::pair<std::string, std::size_t>, std::vector<std::vector<double>>> groups;
  std::vector<std::pair<std::string, std::size_t>> order;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != header.size()) throw RunError("report: malformed row in " + csv.string());
    const auto key = std::make_pair(cells[0], static_cast<std::size_t>(std::stoull(cells[2])));
    if (!groups.count(key)) order.push_back(key);
    auto& cols = groups[key];
    cols.resize(last - first);
    for (std::size_t i = first; i < last; ++i) cols[i - first].push_back(std::stod(cells[i]));
  }
  if (order.empty()) return "  (no successful fits)\n";
  std::ostringstream out;
  out << "  " << pad("method", 20) << pad("T", 10) << "median theta_hat over seeds\n";
  for (const auto& key : order) {
    out << "  " << pad(key.first, 20) << pad(std::to_string(key.second), 10);
    const auto& cols = groups[key];
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? " " : "") << num(median(cols[i]));
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string render_report(const std::string& manifest_path) {
  const RunManifest m = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  for (const auto& a : m.artifacts) {
    if (!fs::exists(dir / a)) throw RunError("report: missing artifact file " + (dir / a).string());
  }
  std::ostringstream out;
  out << "loopid report: " << m.scenario << '\n';
  out << "config hash " << m.config_hash << ", tool version " << m.tool_version << '\n';
  out << "seeds:";
  for (auto s : m.seeds) out << ' ' << s;
  out << "\n\nEstimation\n" << estimation_table(dir / "estimates.csv");

  out << "\nVerdicts\n";
  for (const auto& v : m.verdicts) {
    out << "  " << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  }
  for (const auto& d : m.diagnostics) {
    out << "\nDiagnostic " << d.name << " (" << d.kind << ")\n";
    for (const auto& [k, v] : d.values) out << "  " << k << ": " << v << '\n';
  }
  std::vector<std::string> figures;
  for (const auto& a : m.artifacts) {
    if (a.size() > 4 && a.substr(a.size() - 4) == ".svg") figures.push_back(a);
  }
  if (!figures.empty()) {
    out << "\nFigures\n";
    for (const auto& f : figures) out << "  " << f << '\n';
  }
  out << "\nOverall: " << (m.all_pass() ? "PASS" : "FAIL") << '\n';

  const std::string text = out.str();
  std::ofstream file(dir / "report.txt", std::ios::binary);
  if (!file) throw RunError("report: cannot write " + (dir / "report.txt").string());
  file << text;
  return text;
}

}  // namespace loopid::runner
