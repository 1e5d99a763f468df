#pragma once

#include <stdexcept>
#include <string>

namespace thermoforge {

// Each error class maps onto one CLI exit code (see cli.hpp).

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an incoherent-only routine receives a state with coherences.
class CoherenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace thermoforge
