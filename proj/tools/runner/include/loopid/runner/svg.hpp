#pragma once

#include <string>
#include <vector>

namespace loopid::runner {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool lines = true;  // false: markers only
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Standalone SVG document. Points that are not finite, or not positive on a
/// log axis, are skipped.
std::string render_svg(const LinePlot& plot);

void write_svg(const std::string& path, const LinePlot& plot);

}  // namespace loopid::runner
