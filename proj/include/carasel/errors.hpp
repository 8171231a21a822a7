#pragma once

#include <stdexcept>
#include <string>

namespace carasel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or dimensionally inconsistent input (H on the empty set, mismatched dims, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Internal tables disagree with each other (e.g. an empty value inside a claimed domain).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// A construction ran but its output failed certification.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// None of the hypotheses that make an instance solvable could be established.
class UnsupportedInstanceError : public Error {
 public:
  using Error::Error;
};

/// A solver finished without reaching the requested tolerance.
class NoCertificateError : public Error {
 public:
  NoCertificateError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace carasel
