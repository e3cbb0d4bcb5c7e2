#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fdsurvey {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad shape, bad parameter,
/// out-of-range index, malformed file). Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A time value outside the grid span, or similar out-of-domain argument.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Inconsistent or unusable configuration (e.g. a residual kernel that is not
/// positive semidefinite on the grid).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Exhaustive enumeration would exceed the configured cap.
class EnumerationCapError : public ValidationError {
 public:
  EnumerationCapError(std::uint64_t required, std::uint64_t cap);
  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t required_;
  std::uint64_t cap_;
};

/// Numerically singular or indefinite input. Maps to CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Singular moment matrix; carries the smallest eigenvalue that was found.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// A covariance whose diagonal vanishes (or is negative) at some grid point;
/// simultaneous bands cannot be normalized there.
class DegenerateVarianceError : public NumericalError {
 public:
  DegenerateVarianceError(std::size_t grid_index, double variance);
  std::size_t grid_index() const noexcept { return grid_index_; }
  double variance() const noexcept { return variance_; }

 private:
  std::size_t grid_index_;
  double variance_;
};

}  // namespace fdsurvey
