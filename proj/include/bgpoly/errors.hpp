#pragma once

#include <stdexcept>
#include <string>

namespace bgpoly {

/// Argument outside the open parameter domain of a Mellin family.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Value outside the support / probability range an operation accepts.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Requested order or size beyond what is implemented.
class CapabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model parameters or path specs that violate a stated constraint.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not possible in the object's current state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure (quadrature non-convergence, probabilities out of range).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bgpoly
