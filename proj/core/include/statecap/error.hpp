#pragma once

#include <stdexcept>
#include <string>

namespace statecap {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition or structural invariant failed (bad shapes, non-stochastic
/// rows, unknown axis names, cyclic factor graphs, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A configured hard limit would be exceeded (strategy alphabet cap,
/// grid oracle evaluation budget, codebook size cap).
class CapExceededError : public Error {
 public:
  explicit CapExceededError(const std::string& what) : Error(what) {}
};

}  // namespace statecap
