#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vgforge {

/// Bad argument or precondition violation (maps to CLI exit code 2).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The chaos game produced a non-finite coordinate.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(std::size_t iteration)
      : std::runtime_error("chaos game diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Dataset build failure, e.g. rejection cap exceeded (maps to CLI exit code 3).
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File read/write failure; the message always names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vgforge
