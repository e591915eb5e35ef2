#include "loopid/linsys/polynomial.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "loopid/core/error.hpp"

namespace loopid {

namespace {

void trim_trailing_zeros(std::vector<double>& c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.empty()) c.push_back(0.0);
}

// Parlett-Reinsch balancing with radix 2 so the scaling is exact in binary
// floating point.
void balance(Eigen::MatrixXd& m) {
  constexpr double kRadix = 2.0;
  const Eigen::Index n = m.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::abs(m(j, i));
        row += std::abs(m(i, j));
      }
      if (col == 0.0 || row == 0.0) continue;
      const double total = col + row;
      double f = 1.0;
      double g = row / kRadix;
      while (col < g) {
        f *= kRadix;
        col *= kRadix * kRadix;
      }
      g = row * kRadix;
      while (col > g) {
        f /= kRadix;
        col /= kRadix * kRadix;
      }
      if ((col + row) / f < 0.95 * total) {
        converged = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

std::vector<std::complex<double>> companion_roots(std::span<const double> c) {
  const std::size_t n = c.size() - 1;
  std::vector<std::complex<double>> roots;
  if (n == 0) return roots;
  if (n == 1) {
    roots.emplace_back(-c[1] / c[0], 0.0);
    return roots;
  }
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) companion(0, static_cast<Eigen::Index>(j)) = -c[j + 1] / c[0];
  for (std::size_t i = 1; i < n; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  }
  balance(companion);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw Error("companion-matrix eigenvalue solver failed");
  const auto& ev = solver.eigenvalues();
  roots.reserve(n);
  for (Eigen::Index i = 0; i < ev.size(); ++i) roots.push_back(ev[i]);
  return roots;
}

}  // namespace

ShiftPolynomial::ShiftPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw InvalidArgument("polynomial coefficient is not finite");
  }
  trim_trailing_zeros(coeffs_);
}

std::vector<std::complex<double>> ShiftPolynomial::roots() const {
  if (coeffs_[0] == 0.0) {
    throw InvalidArgument("polynomial has a zero leading coefficient c_0");
  }
  return companion_roots(coeffs_);
}

ShiftPolynomial operator+(const ShiftPolynomial& a, const ShiftPolynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
  return ShiftPolynomial(std::move(c));
}

ShiftPolynomial operator*(const ShiftPolynomial& a, const ShiftPolynomial& b) {
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return ShiftPolynomial(std::move(c));
}

ShiftPolynomial operator*(double k, const ShiftPolynomial& p) {
  std::vector<double> c = p.coeffs_;
  for (double& x : c) x *= k;
  return ShiftPolynomial(std::move(c));
}

double stability_radius(const ShiftPolynomial& p) {
  double radius = 0.0;
  for (const auto& z : p.roots()) radius = std::max(radius, std::abs(z));
  return radius;
}

std::vector<std::complex<double>> finite_roots(const ShiftPolynomial& p) {
  const auto& c = p.coeffs();
  std::size_t lead = 0;
  while (lead < c.size() && c[lead] == 0.0) ++lead;
  if (lead == c.size()) return {};
  return companion_roots(std::span<const double>(c).subspan(lead));
}

RationalFilter::RationalFilter(ShiftPolynomial num, ShiftPolynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_[0] == 0.0) throw InvalidArgument("rational filter denominator has c_0 = 0");
}

FilterState::FilterState(const RationalFilter& filter)
    : num_(filter.num().coeffs()),
      den_(filter.den().coeffs()),
      past_in_(filter.num().degree(), 0.0),
      past_out_(filter.den().degree(), 0.0) {}

double FilterState::peek(double input) const noexcept {
  double acc = num_[0] * input;
  for (std::size_t k = 0; k < past_in_.size(); ++k) acc += num_[k + 1] * past_in_[k];
  for (std::size_t k = 0; k < past_out_.size(); ++k) acc -= den_[k + 1] * past_out_[k];
  return acc / den_[0];
}

void FilterState::commit(double input, double output) noexcept {
  if (!past_in_.empty()) {
    std::copy_backward(past_in_.begin(), past_in_.end() - 1, past_in_.end());
    past_in_[0] = input;
  }
  if (!past_out_.empty()) {
    std::copy_backward(past_out_.begin(), past_out_.end() - 1, past_out_.end());
    past_out_[0] = output;
  }
}

void FilterState::fill_output_history(double value) noexcept {
  std::fill(past_out_.begin(), past_out_.end(), value);
}

}  // namespace loopid
