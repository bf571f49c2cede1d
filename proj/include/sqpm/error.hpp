#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sqpm {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite arguments.
class invalid_input : public error {
 public:
  using error::error;
};

/// Argument outside a function's domain (e.g. entropy at a simplex face).
class domain_error : public error {
 public:
  using error::error;
};

/// Cost family has no registered smoothness constant for the norm.
class unsupported_norm : public error {
 public:
  using error::error;
};

/// Quadrature or other numeric routine did not converge.
class numeric_failure : public error {
 public:
  using error::error;
};

/// Constrained trade solver stopped before reaching tolerance. Carries the
/// best feasible bundle seen (possibly the zero bundle).
class solver_failure : public numeric_failure {
 public:
  solver_failure(const std::string& what, std::vector<double> best_feasible)
      : numeric_failure(what), best_feasible_(std::move(best_feasible)) {}

  const std::vector<double>& best_feasible() const noexcept { return best_feasible_; }

 private:
  std::vector<double> best_feasible_;
};

/// Scenario configuration failed to parse or validate.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace sqpm
