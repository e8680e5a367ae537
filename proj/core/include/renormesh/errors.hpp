#pragma once

#include <stdexcept>
#include <string>

namespace renormesh {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The adaptive step fell below the minimum step size. For the Burgers runs
/// this is the signature of contact with a (near-)singularity.
class StepUnderflow : public NumericalError {
 public:
  StepUnderflow(double t, double dt)
      : NumericalError("step size underflow at t=" + std::to_string(t) +
                       " (dt=" + std::to_string(dt) + ")"),
        time(t),
        step(dt) {}

  double time;
  double step;
};

}  // namespace renormesh
