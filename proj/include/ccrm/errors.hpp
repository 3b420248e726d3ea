#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccrm {

/// Inputs violate a documented precondition (dimensions, ranges, file layout).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A solver produced NaN/Inf.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The calibration trace could not be located for some frame.
class ExtractionFailure : public std::runtime_error {
public:
  ExtractionFailure(std::size_t frame, const std::string &what)
      : std::runtime_error("frame " + std::to_string(frame) + ": " + what),
        frame_(frame) {}

  std::size_t frame() const noexcept { return frame_; }

private:
  std::size_t frame_;
};

} // namespace ccrm
