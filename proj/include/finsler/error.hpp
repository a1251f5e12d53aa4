#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Input outside the domain where an operation is defined (chart range,
/// Myers range, unsupported parameter combination).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Vector/covector/matrix sizes that do not match the norm or domain.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce an answer (no bracket, step-size
/// underflow, non-finite state, disconnected graph).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finsler
