#pragma once

#include <stdexcept>
#include <string>

namespace mwsq {

/// Malformed input: bad grid parameters, arity mismatch, unreadable files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A geometric precondition failed, e.g. a cell outside the cube it is paired with.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A matrix or weight that must be positive definite is not.
class DefinitenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stopping parameter escalation exhausted without the verifier passing.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwsq
