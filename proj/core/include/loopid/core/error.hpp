#pragma once

#include <stdexcept>
#include <string>

namespace loopid {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A closed-loop system or filter has a pole on or outside the unit circle.
class UnstableSystemError : public Error {
 public:
  UnstableSystemError(const std::string& what, double radius)
      : Error(what), radius_(radius) {}
  double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

/// A pole and a zero of the loop coincide on the unit circle.
class UnitCircleCancellationError : public Error {
 public:
  using Error::Error;
};

/// The noise model numerator has a root on or outside the unit circle, so the
/// one-step predictor would be unstable.
class NonMinimumPhaseError : public Error {
 public:
  using Error::Error;
};

/// The regressor moment matrix is singular.
class NotPersistentlyExcitingError : public Error {
 public:
  using Error::Error;
};

/// Power iteration on the regressor chain did not settle on a unique fixed
/// point.
class NonErgodicError : public Error {
 public:
  NonErgodicError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace loopid
