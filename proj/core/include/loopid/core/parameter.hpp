#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace loopid {

struct Interval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
};

/// Compact parameter set: a product of bounded closed intervals.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> bounds);
  static Box uniform(std::size_t dim, double lo, double hi);

  std::size_t dimension() const noexcept { return bounds_.size(); }
  const Interval& operator[](std::size_t i) const { return bounds_.at(i); }
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }

  bool contains(std::span<const double> x) const noexcept;
  /// Coordinate-wise clamp; idempotent.
  std::vector<double> project(std::span<const double> x) const;
  std::vector<double> center() const;

  friend bool operator==(const Box& a, const Box& b) noexcept;

 private:
  std::vector<Interval> bounds_;
};

/// A parameter value theta together with its admissible set. Always inside
/// the box.
class ParameterVector {
 public:
  ParameterVector(std::vector<double> values, Box box);
  /// Clamps `values` into `box` instead of rejecting them.
  static ParameterVector projected(std::span<const double> values, Box box);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const noexcept { return values_; }
  const Box& box() const noexcept { return box_; }

  operator std::span<const double>() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  Box box_;
};

double max_abs_difference(std::span<const double> a, std::span<const double> b);

}  // namespace loopid
