#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractal_lab {

// Precondition violations on arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Request would exceed the addressable/memory budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every sample point coincides; no pair to measure.
class DegenerateCurve : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameter outside the range the discretization supports (e.g. rho <= -2).
class UnsupportedParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Monte Carlo cutoffs accepted nothing.
class DegenerateCutoff : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raster too coarse to trace a contour; advise a finer mesh.
class MeshAdvisory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownExperiment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fractal_lab
