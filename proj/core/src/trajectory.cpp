#include "loopid/core/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "loopid/core/error.hpp"

namespace loopid {

Signal::Signal(ObsSpace space, std::vector<double> reals, std::vector<std::uint32_t> symbols)
    : space_(space), reals_(std::move(reals)), symbols_(std::move(symbols)) {}

Signal Signal::continuous(std::vector<double> values, std::size_t dim) {
  ObsSpace space = ObsSpace::continuous(dim);
  if (values.size() % dim != 0) {
    throw InvalidArgument("continuous signal storage is not a multiple of its dimension");
  }
  return Signal(space, std::move(values), {});
}

Signal Signal::finite(std::vector<std::uint32_t> symbols, std::size_t alphabet_size) {
  return Signal(ObsSpace::finite(alphabet_size), {}, std::move(symbols));
}

std::size_t Signal::length() const noexcept {
  return space_.is_finite() ? symbols_.size() : reals_.size() / space_.size();
}

double Signal::real(std::size_t t, std::size_t coord) const {
  if (!space_.is_continuous()) throw InvalidArgument("real() on a finite-alphabet signal");
  return reals_.at(t * space_.size() + coord);
}

std::uint32_t Signal::symbol(std::size_t t) const {
  if (!space_.is_finite()) throw InvalidArgument("symbol() on a continuous signal");
  return symbols_.at(t);
}

Trajectory Trajectory::scalar(std::vector<double> u, std::vector<double> y, std::int64_t t0) {
  return Trajectory{Signal::continuous(std::move(u)), Signal::continuous(std::move(y)), t0};
}

Trajectory Trajectory::symbolic(std::vector<std::uint32_t> actions, std::size_t n_actions,
                                std::vector<std::uint32_t> states, std::size_t n_states,
                                std::int64_t t0) {
  return Trajectory{Signal::finite(std::move(actions), n_actions),
                    Signal::finite(std::move(states), n_states), t0};
}

std::string to_string(ViolationReason reason) {
  switch (reason) {
    case ViolationReason::length_mismatch: return "length-mismatch";
    case ViolationReason::space_mismatch: return "space-mismatch";
    case ViolationReason::out_of_alphabet: return "out-of-alphabet";
    case ViolationReason::non_finite: return "non-finite";
    case ViolationReason::bad_start_index: return "bad-start-index";
  }
  return "unknown";
}

namespace {

void check_signal(const Signal& signal, const ObsSpace& declared, const std::string& name,
                  std::vector<Violation>& out) {
  if (!(signal.space() == declared)) {
    out.push_back({name, std::nullopt, ViolationReason::space_mismatch,
                   "declared " + declared.describe() + ", stored " + signal.space().describe()});
    return;
  }
  if (declared.is_finite()) {
    const auto symbols = signal.symbols();
    for (std::size_t t = 0; t < symbols.size(); ++t) {
      if (symbols[t] >= declared.size()) {
        out.push_back({name, t, ViolationReason::out_of_alphabet,
                       "symbol " + std::to_string(symbols[t])});
      }
    }
  } else {
    const std::size_t dim = declared.size();
    const auto values = signal.reals();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        out.push_back({name, i / dim, ViolationReason::non_finite, format_real(values[i])});
      }
    }
  }
}

}  // namespace

ValidationReport validate_trajectory(const Trajectory& traj, const ObsSpace& in_space,
                                     const ObsSpace& out_space) {
  ValidationReport report;
  if (traj.t0 < 1) {
    report.violations.push_back(
        {"", std::nullopt, ViolationReason::bad_start_index, "t0 = " + std::to_string(traj.t0)});
  }
  if (traj.u.length() != traj.y.length()) {
    report.violations.push_back({"", std::nullopt, ViolationReason::length_mismatch,
                                 "len(u) = " + std::to_string(traj.u.length()) +
                                     ", len(y) = " + std::to_string(traj.y.length())});
  }
  check_signal(traj.u, in_space, "u", report.violations);
  check_signal(traj.y, out_space, "y", report.violations);
  return report;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

void write_header(std::ostream& out, const Signal& s, char name) {
  const std::size_t cols = s.space().is_finite() ? 1 : s.space().size();
  if (cols == 1) {
    out << ',' << name;
  } else {
    for (std::size_t c = 0; c < cols; ++c) out << ',' << name << c;
  }
}

void write_row(std::ostream& out, const Signal& s, std::size_t t) {
  if (s.space().is_finite()) {
    out << ',' << s.symbol(t);
  } else {
    for (std::size_t c = 0; c < s.space().size(); ++c) out << ',' << format_real(s.real(t, c));
  }
}

double parse_real(const std::string& cell, std::size_t line) {
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return INFINITY;
  if (cell == "-inf") return -INFINITY;
  double value = 0.0;
  const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (result.ec != std::errc{} || result.ptr != cell.data() + cell.size()) {
    throw InvalidArgument("trajectory CSV line " + std::to_string(line) + ": bad number '" +
                          cell + "'");
  }
  return value;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.u.length() != traj.y.length()) {
    throw InvalidArgument("cannot serialize a trajectory with len(u) != len(y)");
  }
  out << 't';
  write_header(out, traj.u, 'u');
  write_header(out, traj.y, 'y');
  out << '\n';
  for (std::size_t t = 0; t < traj.length(); ++t) {
    out << traj.t0 + static_cast<std::int64_t>(t);
    write_row(out, traj.u, t);
    write_row(out, traj.y, t);
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, const ObsSpace& in_space,
                               const ObsSpace& out_space) {
  const std::size_t u_cols = in_space.is_finite() ? 1 : in_space.size();
  const std::size_t y_cols = out_space.is_finite() ? 1 : out_space.size();
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trajectory CSV is empty");
  {
    std::size_t commas = 0;
    for (char c : line) commas += c == ',';
    if (commas != u_cols + y_cols) {
      throw InvalidArgument("trajectory CSV header has " + std::to_string(commas + 1) +
                            " columns, expected " + std::to_string(1 + u_cols + y_cols));
    }
  }
  std::vector<double> u_real, y_real;
  std::vector<std::uint32_t> u_sym, y_sym;
  std::int64_t t0 = 1;
  std::size_t line_no = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 1 + u_cols + y_cols) {
      throw InvalidArgument("trajectory CSV line " + std::to_string(line_no) +
                            ": wrong number of columns");
    }
    if (first) {
      t0 = static_cast<std::int64_t>(parse_real(cells[0], line_no));
      first = false;
    }
    auto take = [&](const ObsSpace& space, std::size_t offset, std::size_t cols,
                    std::vector<double>& reals, std::vector<std::uint32_t>& syms) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = parse_real(cells[offset + c], line_no);
        if (space.is_finite()) {
          if (v < 0 || v != std::floor(v)) {
            throw InvalidArgument("trajectory CSV line " + std::to_string(line_no) +
                                  ": symbol is not a nonnegative integer");
          }
          syms.push_back(static_cast<std::uint32_t>(v));
        } else {
          reals.push_back(v);
        }
      }
    };
    take(in_space, 1, u_cols, u_real, u_sym);
    take(out_space, 1 + u_cols, y_cols, y_real, y_sym);
  }
  auto make = [](const ObsSpace& space, std::vector<double> reals,
                 std::vector<std::uint32_t> syms) {
    return space.is_finite() ? Signal::finite(std::move(syms), space.size())
                             : Signal::continuous(std::move(reals), space.size());
  };
  return Trajectory{make(in_space, std::move(u_real), std::move(u_sym)),
                    make(out_space, std::move(y_real), std::move(y_sym)), t0};
}

}  // namespace loopid
