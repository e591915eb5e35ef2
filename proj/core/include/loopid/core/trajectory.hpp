#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loopid/core/obs_space.hpp"

namespace loopid {

/// One observed signal over time. Continuous values are stored row-major
/// (time-major, `dim` coordinates per step) as doubles; finite symbols as
/// unsigned indices into the alphabet.
///
/// Construction only checks the storage shape. Membership of each value in
/// the declared space is checked by `validate_trajectory`, so that invalid
/// data can be represented and reported.
class Signal {
 public:
  static Signal continuous(std::vector<double> values, std::size_t dim = 1);
  static Signal finite(std::vector<std::uint32_t> symbols, std::size_t alphabet_size);

  const ObsSpace& space() const noexcept { return space_; }
  std::size_t length() const noexcept;

  double real(std::size_t t, std::size_t coord = 0) const;
  std::uint32_t symbol(std::size_t t) const;

  std::span<const double> reals() const noexcept { return reals_; }
  std::span<const std::uint32_t> symbols() const noexcept { return symbols_; }

 private:
  Signal(ObsSpace space, std::vector<double> reals, std::vector<std::uint32_t> symbols);

  ObsSpace space_;
  std::vector<double> reals_;
  std::vector<std::uint32_t> symbols_;
};

/// Paired input/output record (u_1..u_T, y_1..y_T). `t0` is the absolute time
/// index of the first sample (e.g. burn-in + 1 for simulated data).
struct Trajectory {
  Signal u;
  Signal y;
  std::int64_t t0 = 1;

  /// Number of time steps; the output length when u and y disagree.
  std::size_t length() const noexcept { return y.length(); }

  static Trajectory scalar(std::vector<double> u, std::vector<double> y,
                           std::int64_t t0 = 1);
  static Trajectory symbolic(std::vector<std::uint32_t> actions, std::size_t n_actions,
                             std::vector<std::uint32_t> states, std::size_t n_states,
                             std::int64_t t0 = 1);
};

enum class ViolationReason {
  length_mismatch,
  space_mismatch,
  out_of_alphabet,
  non_finite,
  bad_start_index,
};

std::string to_string(ViolationReason reason);

struct Violation {
  std::string signal;  // "u", "y" or "" for whole-trajectory problems
  std::optional<std::size_t> index;
  ViolationReason reason;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Lists every violation of the trajectory invariants against the declared
/// spaces. Never throws on bad data.
ValidationReport validate_trajectory(const Trajectory& traj, const ObsSpace& in_space,
                                     const ObsSpace& out_space);

/// CSV with header `t,u...,y...`: one column per coordinate (`u`, `y` for
/// scalar signals, `u0,u1,...` otherwise), symbols written as integers and
/// reals in shortest round-trip form.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in, const ObsSpace& in_space,
                               const ObsSpace& out_space);

/// Shortest decimal representation that round-trips to the same double.
std::string format_real(double value);

}  // namespace loopid
