#include "renormesh/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "renormesh/errors.hpp"

namespace renormesh {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384,     0.0, 500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600,    0.0,       7571.0 / 16695,
                                    393.0 / 640,       -92097.0 / 339200,
                                    187.0 / 2100,      1.0 / 40};

using Stages = std::vector<std::vector<Complex>>;

}  // namespace

Integrator::Integrator(IntegratorSettings settings) : settings_(settings) {
  if (settings_.rtol <= 0.0 || settings_.atol <= 0.0) {
    throw std::invalid_argument("integrator tolerances must be positive");
  }
  if (settings_.dt_fixed <= 0.0 || settings_.dt_initial <= 0.0) {
    throw std::invalid_argument("integrator step sizes must be positive");
  }
}

StepOutcome Integrator::step(std::span<OdeSystem* const> systems, double t,
                             double dt_proposal) {
  if (settings_.method == StepMethod::fixed_rk4) {
    return step_fixed(systems, t, std::min(settings_.dt_fixed, dt_proposal));
  }
  return step_adaptive(systems, t, dt_proposal);
}

StepOutcome Integrator::step_fixed(std::span<OdeSystem* const> systems, double t,
                                   double dt) {
  for (OdeSystem* sys : systems) {
    const std::size_t n = sys->state.size();
    std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const auto& y = sys->state;
    sys->rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    sys->rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    sys->rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    sys->rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      sys->state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return {dt, settings_.dt_fixed, 0};
}

StepOutcome Integrator::step_adaptive(std::span<OdeSystem* const> systems, double t,
                                      double dt) {
  dt = std::min(dt, settings_.dt_max);
  std::vector<Stages> stages(systems.size());
  std::vector<std::vector<Complex>> trial(systems.size());
  int rejected = 0;

  for (;;) {
    if (dt < settings_.dt_min) throw StepUnderflow(t, dt);

    double err = 0.0;
    for (std::size_t s = 0; s < systems.size(); ++s) {
      OdeSystem& sys = *systems[s];
      const std::size_t n = sys.state.size();
      Stages& k = stages[s];
      k.assign(7, std::vector<Complex>(n));
      std::vector<Complex> tmp(n);
      sys.rhs(t, sys.state, k[0]);
      for (int stage = 1; stage < 7; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
          Complex acc{};
          for (int j = 0; j < stage; ++j) acc += kA[stage][j] * k[static_cast<std::size_t>(j)][i];
          tmp[i] = sys.state[i] + dt * acc;
        }
        sys.rhs(t + kC[static_cast<std::size_t>(stage)] * dt, tmp,
                k[static_cast<std::size_t>(stage)]);
      }
      // Stage 7 is evaluated at the fifth-order solution, which is tmp.
      trial[s] = tmp;

      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Complex e{};
        for (std::size_t j = 0; j < 7; ++j) e += (kB5[j] - kB4[j]) * k[j][i];
        e *= dt;
        const double scale =
            settings_.atol +
            settings_.rtol * std::max(std::abs(sys.state[i]), std::abs(tmp[i]));
        const double r = std::abs(e) / scale;
        sum += r * r;
      }
      const double sys_err = n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
      if (!std::isfinite(sys_err)) {
        err = std::numeric_limits<double>::infinity();
      } else {
        err = std::max(err, sys_err);
      }
    }

    if (err <= 1.0) {
      for (std::size_t s = 0; s < systems.size(); ++s) {
        systems[s]->state = std::move(trial[s]);
      }
      const double growth =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      return {dt, std::min(dt * growth, settings_.dt_max), rejected};
    }
    ++rejected;
    const double shrink =
        std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
    dt *= shrink;
  }
}

}  // namespace renormesh
