#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ratelab {

/// Thrown when a vector or matrix argument has the wrong size.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& what_arg, std::size_t expected,
                 std::size_t actual)
      : std::invalid_argument(what_arg + ": expected size " +
                              std::to_string(expected) + ", got " +
                              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Thrown when an operation is invoked in a state that does not allow it
/// (backward without forward, stepping a finished episode, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when a value that must stay finite is not.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed files, configs and payloads.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ratelab
