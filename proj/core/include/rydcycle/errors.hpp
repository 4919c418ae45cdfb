#pragma once

#include <stdexcept>
#include <string>

namespace rydcycle {

// Malformed or inconsistent configuration (unknown key, bad value, degenerate setup).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical integration left its validity domain (trace drift, divergence).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class NotPeriodicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two finite-difference stencils of the Jacobian disagree.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rydcycle
