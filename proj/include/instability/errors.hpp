#pragma once

#include <stdexcept>
#include <string>

namespace instab {

// Malformed input files or JSON payloads.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs violating a documented precondition (non-Hermitian, not a state,
// parameters outside their admissible region, dimension mismatch, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The SDP or fixed-point solver could not produce a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation would exceed its dimension or evaluation budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace instab
