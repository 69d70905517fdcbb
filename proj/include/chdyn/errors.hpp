#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace chdyn {

/// Bad arguments: dimension mismatches, non-positive parameters, sizes out of range.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state that violates the preconditions of the operation it was passed to
/// (inconsistent constraint data, missing chemical potential, ...).
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear algebra breakdown (singular factorization).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton failed to reach tolerance within the iteration budget.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, std::vector<double> history, Eigen::VectorXd last)
      : std::runtime_error(what),
        residual_history(std::move(history)),
        last_iterate(std::move(last)) {}

  std::vector<double> residual_history;
  Eigen::VectorXd last_iterate;
};

}  // namespace chdyn
