#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "renormesh/errors.hpp"
#include "renormesh/integrator.hpp"

using namespace renormesh;

namespace {

OdeSystem linear(Complex rate, Complex y0) {
  return {{y0}, [rate](double, std::span<const Complex> y, std::span<Complex> d) {
            d[0] = rate * y[0];
          }};
}

// Integrates to exactly t_end and returns the number of accepted steps.
long integrate(Integrator& integ, std::vector<OdeSystem*> systems, double t_end) {
  double t = 0.0;
  double dt = integ.settings().method == StepMethod::fixed_rk4 ? integ.settings().dt_fixed
                                                               : integ.settings().dt_initial;
  long n = 0;
  while (t < t_end) {
    const StepOutcome out = integ.step(systems, t, std::min(dt, t_end - t));
    t += out.dt_taken;
    dt = out.dt_next;
    ++n;
  }
  return n;
}

}  // namespace

TEST(Integrator, AdaptiveLinearDecay) {
  Integrator integ;
  OdeSystem s = linear(-1.0, 1.0);
  integrate(integ, {&s}, 1.0);
  EXPECT_NEAR(s.state[0].real(), std::exp(-1.0), 1e-9);
}

TEST(Integrator, AdaptiveOscillator) {
  Integrator integ;
  OdeSystem s = linear(Complex(0.0, 3.0), 1.0);
  integrate(integ, {&s}, 2.0);
  EXPECT_NEAR(std::abs(s.state[0] - std::exp(Complex(0.0, 6.0))), 0.0, 1e-8);
}

TEST(Integrator, FixedRk4IsFourthOrder) {
  auto error_at = [](double dt) {
    IntegratorSettings cfg;
    cfg.method = StepMethod::fixed_rk4;
    cfg.dt_fixed = dt;
    Integrator integ(cfg);
    OdeSystem s = linear(-2.0, 1.0);
    integrate(integ, {&s}, 1.0);
    return std::abs(s.state[0].real() - std::exp(-2.0));
  };
  const double ratio = error_at(0.05) / error_at(0.025);
  EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(Integrator, FixedStepIgnoresErrorControl) {
  IntegratorSettings cfg;
  cfg.method = StepMethod::fixed_rk4;
  cfg.dt_fixed = 0.125;
  Integrator integ(cfg);
  OdeSystem s = linear(-1.0, 1.0);
  const StepOutcome out = integ.step(std::vector<OdeSystem*>{&s}, 0.0, 1.0);
  EXPECT_EQ(out.dt_taken, 0.125);
  EXPECT_EQ(out.rejected, 0);
  EXPECT_EQ(integrate(integ, {&s}, 1.0), 8);
}

TEST(Integrator, CommonStepIsTheStricterOne) {
  IntegratorSettings cfg;
  cfg.dt_initial = 0.5;
  Integrator a(cfg), b(cfg), c(cfg);
  OdeSystem fast = linear(-40.0, 1.0);
  OdeSystem slow = linear(-0.1, 1.0);
  OdeSystem fast2 = fast, slow2 = slow;
  const double dt_fast = a.step(std::vector<OdeSystem*>{&fast}, 0.0, 0.5).dt_taken;
  const double dt_slow = b.step(std::vector<OdeSystem*>{&slow}, 0.0, 0.5).dt_taken;
  const double dt_both = c.step(std::vector<OdeSystem*>{&fast2, &slow2}, 0.0, 0.5).dt_taken;
  EXPECT_LT(dt_fast, dt_slow);
  EXPECT_EQ(dt_both, dt_fast);
}

TEST(Integrator, UnderflowOnNonFiniteRhs) {
  Integrator integ;
  OdeSystem s{{1.0}, [](double, std::span<const Complex>, std::span<Complex> d) {
                d[0] = std::numeric_limits<double>::quiet_NaN();
              }};
  try {
    integ.step(std::vector<OdeSystem*>{&s}, 0.25, 1e-3);
    FAIL() << "expected StepUnderflow";
  } catch (const StepUnderflow& e) {
    EXPECT_EQ(e.time, 0.25);
    EXPECT_LT(e.step, 1e-14);
  }
  EXPECT_EQ(s.state[0], Complex(1.0));
}

TEST(Integrator, RejectsBadSettings) {
  IntegratorSettings cfg;
  cfg.rtol = 0.0;
  EXPECT_THROW(Integrator{cfg}, std::invalid_argument);
  cfg = {};
  cfg.dt_fixed = -1.0;
  EXPECT_THROW(Integrator{cfg}, std::invalid_argument);
}
