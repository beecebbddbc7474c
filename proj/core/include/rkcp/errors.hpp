#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rkcp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An index outside its admissible range; the message names the offending axis.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Structurally malformed input: duplicate observations, inconsistent
/// dimensions, invalid generation or solve parameters.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A symmetric factorization met a negative pivot beyond tolerance.
class PsdError : public Error {
public:
  PsdError(const std::string& what, double pivot) : Error(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

private:
  double pivot_;
};

/// A Jacobi entry or diagonal-block factorization is not positive definite.
class PrecondSingularError : public Error {
public:
  PrecondSingularError(const std::string& what, std::int64_t slice)
      : Error(what), slice_(slice) {}
  std::int64_t slice() const noexcept { return slice_; }

private:
  std::int64_t slice_;
};

/// A dense-oracle operation was requested beyond its size cap.
class OracleScaleError : public Error {
public:
  using Error::Error;
};

/// The PCG direction lost definiteness (near-zero curvature denominator).
class BreakdownError : public Error {
public:
  BreakdownError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

/// The dense direct solve could not factor the system.
class SingularSystemError : public Error {
public:
  using Error::Error;
};

/// File I/O failure; the message carries the path.
class IoError : public Error {
public:
  using Error::Error;
};

/// An eigensolve or model fit inside a diagnostic failed.
class DiagnosticError : public Error {
public:
  using Error::Error;
};

}  // namespace rkcp
