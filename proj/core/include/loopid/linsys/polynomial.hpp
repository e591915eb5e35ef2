#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace loopid {

/// Polynomial in the backward shift q^-1: c_0 + c_1 q^-1 + ... + c_n q^-n.
/// Trailing zero coefficients are trimmed on construction; the zero
/// polynomial is stored as {0}.
class ShiftPolynomial {
 public:
  ShiftPolynomial() : coeffs_{0.0} {}
  explicit ShiftPolynomial(std::vector<double> coeffs);
  ShiftPolynomial(std::initializer_list<double> coeffs)
      : ShiftPolynomial(std::vector<double>(coeffs)) {}

  std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  /// Coefficient of q^-i, zero beyond the degree.
  double operator[](std::size_t i) const noexcept {
    return i < coeffs_.size() ? coeffs_[i] : 0.0;
  }
  bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  /// Roots of c_0 z^n + c_1 z^(n-1) + ... + c_n, i.e. the poles of 1/p.
  /// Requires c_0 != 0.
  std::vector<std::complex<double>> roots() const;

  friend ShiftPolynomial operator+(const ShiftPolynomial& a, const ShiftPolynomial& b);
  friend ShiftPolynomial operator*(const ShiftPolynomial& a, const ShiftPolynomial& b);
  friend ShiftPolynomial operator*(double k, const ShiftPolynomial& p);
  friend bool operator==(const ShiftPolynomial&, const ShiftPolynomial&) = default;

 private:
  std::vector<double> coeffs_;
};

/// Max modulus of the roots of p (in z); 0 for constants.
/// Throws InvalidArgument for a zero leading coefficient.
double stability_radius(const ShiftPolynomial& p);

/// Roots in z of a polynomial whose leading coefficients may vanish (a pure
/// delay q^-k contributes no finite root). Zero polynomial has no roots.
std::vector<std::complex<double>> finite_roots(const ShiftPolynomial& p);

/// num(q) / den(q) with den.c_0 != 0.
class RationalFilter {
 public:
  RationalFilter() : num_{0.0}, den_{1.0} {}
  RationalFilter(ShiftPolynomial num, ShiftPolynomial den);

  static RationalFilter fir(ShiftPolynomial num) { return {std::move(num), ShiftPolynomial{1.0}}; }
  static RationalFilter gain(double k) { return fir(ShiftPolynomial{k}); }

  const ShiftPolynomial& num() const noexcept { return num_; }
  const ShiftPolynomial& den() const noexcept { return den_; }

  bool strictly_proper() const noexcept { return num_[0] == 0.0; }
  bool monic() const noexcept { return num_[0] == 1.0 && den_[0] == 1.0; }
  bool is_zero() const noexcept { return num_.is_zero(); }

  friend bool operator==(const RationalFilter&, const RationalFilter&) = default;

 private:
  ShiftPolynomial num_;
  ShiftPolynomial den_;
};

/// Running state of a RationalFilter as a difference equation
/// den(q) out_t = num(q) in_t.
class FilterState {
 public:
  explicit FilterState(const RationalFilter& filter);

  /// Output at the current step given the current input; does not advance.
  double peek(double input) const noexcept;
  /// Records (input, output) as the newest step.
  void commit(double input, double output) noexcept;
  double step(double input) noexcept {
    const double out = peek(input);
    commit(input, out);
    return out;
  }
  /// Overwrites the stored past outputs.
  void fill_output_history(double value) noexcept;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
  std::vector<double> past_in_;   // past_in_[k] = in_{t-1-k}
  std::vector<double> past_out_;  // past_out_[k] = out_{t-1-k}
};

}  // namespace loopid
