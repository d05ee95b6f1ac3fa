#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fpg {

// Input outside the mathematical domain of an operation (non-positive u,
// inverse of f' evaluated past its range, lambda = 0 where a temperature is
// required, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Structurally invalid data: non-stochastic rows, rewards outside [0, 1],
// unknown config keys, size mismatches.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An iterative routine failed to converge; carries the last residual.
struct NumericError : std::runtime_error {
  double residual;
  NumericError(const std::string& what, double residual_)
      : std::runtime_error(what + " (residual " + format(residual_) + ")"),
        residual(residual_) {}

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
};

}  // namespace fpg
