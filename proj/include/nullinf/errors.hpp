// Error categories; the CLI maps them to exit codes 2, 3 and 4.
#pragma once

#include <stdexcept>
#include <string>

namespace nullinf {

// Invalid input: wrong vector class, bad config, violated precondition.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A quadrature, extrapolation or root solve did not reach its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stated identity or invariant failed beyond tolerance.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nullinf
