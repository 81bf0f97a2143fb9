// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared across the toolkit.
#pragma once

#include <stdexcept>
#include <string>

namespace mdagg {

// A scenario (or one rate within a rate sweep) has no solution satisfying the
// fairness/budget system.  `constraint()` names the constraint that failed.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(std::string constraint)
      : std::runtime_error("infeasible: " + constraint),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

// An iterative solver hit its iteration cap; carries the last residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, double residual)
      : std::runtime_error(std::move(what) + " (residual " +
                           std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Malformed config file or config value.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mdagg
