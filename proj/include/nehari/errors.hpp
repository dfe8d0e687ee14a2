#pragma once

#include <stdexcept>
#include <string>

namespace nehari {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent problem description. Carries the offending
/// line when the error comes from the configuration parser (0 otherwise).
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Two fields (or a field and a weight) built on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// The iterate no longer has the sign pattern required by the Nehari
/// rescaling (a nonpositive denominator was met).
class SignPatternLost : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a map (vanishing denominator, parameter
/// outside its cube, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace nehari
