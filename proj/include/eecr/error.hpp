#pragma once

#include <stdexcept>
#include <string>

namespace eecr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value violates its documented invariants.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Total power consumption is zero, so the EE ratio is undefined.
class DegenerateObjective : public Error {
 public:
  using Error::Error;
};

/// The effective price of power is zero on a sample with positive gain,
/// so the water-filling root is unbounded.
class UnboundedPower : public Error {
 public:
  using Error::Error;
};

/// A per-sample function produced a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t index)
      : Error(what + " (sample " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace eecr
