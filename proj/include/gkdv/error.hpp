#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dealiased product was requested on a grid without enough padding.
class HeadroomError : public Error {
 public:
  HeadroomError(int degree, int n, int m, int required);
  int required_points() const { return required_; }

 private:
  int required_;
};

/// A brute-force enumeration would exceed its configured work budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Exact integer arithmetic would overflow.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Time integration produced a non-finite state or exceeded the blow-up cap.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Invalid user configuration (bad key, wrong type, out of range).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gkdv
