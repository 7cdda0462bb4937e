#pragma once

#include <stdexcept>
#include <string>

namespace fogtap {

// Argument outside an operation's domain (e.g. a probability not in (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input data or configuration violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No distribution in the admissible family reproduces the requested summary.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested solver cannot handle the instance it was given.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptionNotOfferedError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fogtap
