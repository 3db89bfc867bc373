#ifndef YTM_ERRORS_HPP
#define YTM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace ytm {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid model, distribution, parameter or input file.  CLI exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Thrown when a chain is reducible; carries the strongly connected
// components of the support graph.
class ReducibleError : public ValidationError {
 public:
  ReducibleError(const std::string& what, std::vector<std::vector<int>> sccs)
      : ValidationError(what), components(std::move(sccs)) {}
  std::vector<std::vector<int>> components;
};

// Enumeration caps (dY^k too large and similar resource limits).
class CapExceededError : public ValidationError {
 public:
  explicit CapExceededError(const std::string& what) : ValidationError(what) {}
};

// Numerical failure or a value inside a declared indeterminate band.
// CLI exit code 3.
class IndeterminateError : public Error {
 public:
  explicit IndeterminateError(const std::string& what) : Error(what) {}
};

// A cross-check between two independent computations disagreed.  This
// indicates tolerance breakdown, not user error.  CLI exit code 4.
class InternalCheckError : public Error {
 public:
  explicit InternalCheckError(const std::string& what) : Error(what) {}
};

}  // namespace ytm

#endif
