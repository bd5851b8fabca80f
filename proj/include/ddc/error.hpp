#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ddc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when two objects that must share a state space disagree in size.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& context, Eigen::Index expected, Eigen::Index actual)
      : Error(context + ": dimension mismatch (expected " + std::to_string(expected) +
              ", got " + std::to_string(actual) + ")"),
        expected_(expected),
        actual_(actual) {}

  Eigen::Index expected() const { return expected_; }
  Eigen::Index actual() const { return actual_; }

 private:
  Eigen::Index expected_;
  Eigen::Index actual_;
};

/// NaN or Inf showed up inside an iterative method.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& context, int iteration)
      : Error(context + ": non-finite value at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// An iteration hit its cap. Carries the last iterate and the remaining gap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double gap)
      : Error(what), last_iterate_(std::move(last_iterate)), gap_(gap) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double gap() const { return gap_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gap_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddc
