#pragma once

#include <functional>
#include <span>
#include <vector>

#include "renormesh/spectral.hpp"

namespace renormesh {

enum class StepMethod {
  adaptive_dp45,  ///< Dormand-Prince 5(4) with per-step error control
  fixed_rk4,      ///< classical fourth-order Runge-Kutta, constant step
};

struct IntegratorSettings {
  StepMethod method = StepMethod::adaptive_dp45;
  double rtol = 1e-10;
  double atol = 1e-12;
  double dt_initial = 1e-3;
  double dt_fixed = 1e-3;
  double dt_max = 5e-2;
  double dt_min = 1e-14;
};

using RhsFunction =
    std::function<void(double t, std::span<const Complex> y, std::span<Complex> dydt)>;

/// One system of complex ODEs dy/dt = f(t, y).
struct OdeSystem {
  std::vector<Complex> state;
  RhsFunction rhs;
};

struct StepOutcome {
  double dt_taken = 0.0;
  double dt_next = 0.0;
  int rejected = 0;
};

/// Advances one or more coupled systems with a common step. For the adaptive
/// method a trial step is accepted only if it passes the error test in every
/// system, so the accepted step is the minimum over the systems.
class Integrator {
 public:
  explicit Integrator(IntegratorSettings settings = {});

  const IntegratorSettings& settings() const { return settings_; }

  /// Takes one step from time t. dt_proposal is ignored in fixed-step mode
  /// except as an upper bound (to land on an end time). Throws StepUnderflow
  /// when the adaptive step drops below settings().dt_min.
  StepOutcome step(std::span<OdeSystem* const> systems, double t, double dt_proposal);

 private:
  StepOutcome step_fixed(std::span<OdeSystem* const> systems, double t, double dt);
  StepOutcome step_adaptive(std::span<OdeSystem* const> systems, double t, double dt);

  IntegratorSettings settings_;
};

}  // namespace renormesh
