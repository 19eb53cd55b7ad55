#pragma once

#include <stdexcept>
#include <string>

namespace nlsstab {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the admissible set of the model (e.g. omega not in Omega).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two fields (or a field and a model) live on different grids.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was called with inputs violating its stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel (eigensolver, shooting, Newton) failed to deliver.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// The state left the tube around the bound-state orbit.
class TubeExitError : public Error {
 public:
  TubeExitError(const std::string& what, double distance)
      : Error(what), distance_(distance) {}
  double distance() const noexcept { return distance_; }

 private:
  double distance_;
};

/// (M(u), J^2 phi)_X vanished, so P(u) is undefined.
class AlignmentSingularError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IntegratorError : public NumericError {
 public:
  IntegratorError(const std::string& what, long step)
      : NumericError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class BlowUpError : public IntegratorError {
 public:
  using IntegratorError::IntegratorError;
};

}  // namespace nlsstab
