#include "loopid/core/parameter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loopid/core/error.hpp"

namespace loopid {

Box::Box(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const auto& b = bounds_[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi) {
      throw InvalidArgument("parameter box coordinate " + std::to_string(i) +
                            " is not a bounded interval");
    }
  }
}

Box Box::uniform(std::size_t dim, double lo, double hi) {
  return Box(std::vector<Interval>(dim, Interval{lo, hi}));
}

bool Box::contains(std::span<const double> x) const noexcept {
  if (x.size() != bounds_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= bounds_[i].lo && x[i] <= bounds_[i].hi)) return false;
  }
  return true;
}

std::vector<double> Box::project(std::span<const double> x) const {
  if (x.size() != bounds_.size()) {
    throw InvalidArgument("projection: dimension " + std::to_string(x.size()) +
                          " does not match box dimension " + std::to_string(bounds_.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::clamp(x[i], bounds_[i].lo, bounds_[i].hi);
  }
  return out;
}

std::vector<double> Box::center() const {
  std::vector<double> out;
  out.reserve(bounds_.size());
  for (const auto& b : bounds_) out.push_back(0.5 * (b.lo + b.hi));
  return out;
}

bool operator==(const Box& a, const Box& b) noexcept {
  if (a.bounds_.size() != b.bounds_.size()) return false;
  for (std::size_t i = 0; i < a.bounds_.size(); ++i) {
    if (a.bounds_[i].lo != b.bounds_[i].lo || a.bounds_[i].hi != b.bounds_[i].hi) return false;
  }
  return true;
}

ParameterVector::ParameterVector(std::vector<double> values, Box box)
    : values_(std::move(values)), box_(std::move(box)) {
  if (!box_.contains(values_)) {
    throw InvalidArgument("parameter vector lies outside its box (or has the wrong dimension)");
  }
}

ParameterVector ParameterVector::projected(std::span<const double> values, Box box) {
  auto clamped = box.project(values);
  return ParameterVector(std::move(clamped), std::move(box));
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("max_abs_difference: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace loopid
