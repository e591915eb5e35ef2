#include "loopid/runner/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "loopid/core/error.hpp"
#include "loopid/core/trajectory.hpp"

namespace loopid::runner {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 160.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double transform(double v) const { return log ? std::log10(v) : v; }

  void fit(const std::vector<double>& values) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (double v : values) {
      mn = std::min(mn, transform(v));
      mx = std::max(mx, transform(v));
    }
    if (!std::isfinite(mn)) {
      mn = 0.0;
      mx = 1.0;
    }
    if (mx - mn < 1e-12) {
      mn -= 0.5;
      mx += 0.5;
    }
    const double pad = 0.05 * (mx - mn);
    lo = mn - pad;
    hi = mx + pad;
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::ceil(lo); d <= hi; d += 1.0) out.push_back(d);
      if (out.size() > 8) {
        std::vector<double> thin;
        const std::size_t stride = (out.size() + 7) / 8;
        for (std::size_t i = 0; i < out.size(); i += stride) thin.push_back(out[i]);
        out = thin;
      }
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double t = std::ceil(lo / step) * step; t <= hi; t += step) {
      out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return out;
  }

  std::string label(double t) const { return log ? "1e" + fmt(t) : fmt(t); }
};

}  // namespace

std::string render_svg(const LinePlot& plot) {
  Axis ax{plot.log_x}, ay{plot.log_y};
  std::vector<double> xs, ys;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
        xs.push_back(s.x[i]);
        ys.push_back(s.y[i]);
      }
    }
  }
  ax.fit(xs);
  ay.fit(ys);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + (ay.hi - ay.transform(v)) / (ay.hi - ay.lo) * ph; };
  auto tx = [&](double t) { return kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto ty = [&](double t) { return kTop + (ay.hi - t) / (ay.hi - ay.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    out << "<line x1=\"" << format_real(tx(t)) << "\" y1=\"" << kTop + ph << "\" x2=\""
        << format_real(tx(t)) << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << format_real(tx(t)) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << ax.label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << format_real(ty(t)) << "\" x2=\"" << kLeft
        << "\" y2=\"" << format_real(ty(t)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << format_real(ty(t) + 4)
        << "\" text-anchor=\"end\">" << ay.label(t) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::ostringstream pts;
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      pts << (n++ ? " " : "") << format_real(px(s.x[i])) << ',' << format_real(py(s.y[i]));
      out << "<circle cx=\"" << format_real(px(s.x[i])) << "\" cy=\"" << format_real(py(s.y[i]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    if (s.lines && n > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
          << pts.str() << "\"/>\n";
    }
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + pw + 35 << "\" y=\"" << ly + 4 << "\">" << escape(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::string& path, const LinePlot& plot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << render_svg(plot);
}

}  // namespace loopid::runner
