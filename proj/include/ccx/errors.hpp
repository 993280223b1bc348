#pragma once

#include <stdexcept>
#include <string>

namespace ccx {

/// Raised when a request exceeds what an algorithm is built to handle
/// (site counts, tree sizes, terminal counts).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a kernel is evaluated at a singular point.
class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when a fixed-point iteration stops contracting.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccx
