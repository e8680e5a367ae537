#include "renormesh/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "renormesh/errors.hpp"

namespace renormesh {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

CharacteristicSolution::CharacteristicSolution(double t, double newton_tol, int max_iter)
    : t_(t), tol_(newton_tol), max_iter_(max_iter) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("CharacteristicSolution: time must be finite and >= 0");
  }
  if (!(newton_tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("CharacteristicSolution: bad solver settings");
  }
}

double CharacteristicSolution::foot(double x) const {
  if (t_ == 0.0) return x;
  // g is increasing on [0, hi]; for t > 1 hi is where g' = 1 + t cos xi = 0.
  const double hi_bound = t_ <= 1.0 ? kPi : std::acos(-1.0 / t_);
  auto g = [&](double xi) { return xi + t_ * std::sin(xi) - x; };

  double lo = 0.0;
  double hi = hi_bound;
  if (g(lo) > 0.0 || g(hi) < 0.0) {
    std::ostringstream msg;
    msg << "characteristic foot not bracketed for x=" << x << ", t=" << t_;
    throw NumericalError(msg.str());
  }
  double xi = x / (1.0 + t_);
  if (xi > hi) xi = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter_; ++it) {
    const double r = g(xi);
    if (std::abs(r) <= tol_) return xi;
    if (r < 0.0) {
      lo = xi;
    } else {
      hi = xi;
    }
    const double slope = 1.0 + t_ * std::cos(xi);
    double next = slope > 0.0 ? xi - r / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == xi) return xi;
    xi = next;
  }
  const double r = g(xi);
  if (std::abs(r) <= tol_) return xi;
  std::ostringstream msg;
  msg << "Newton iteration for the characteristic foot did not converge (x=" << x
      << ", t=" << t_ << ", residual=" << r << ")";
  throw NumericalError(msg.str());
}

double CharacteristicSolution::eval(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("oracle: non-finite position");
  x = std::fmod(x, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  if (x == kPi) return 0.0;
  if (x > kPi) return -eval(2.0 * kPi - x);
  return std::sin(foot(x));
}

std::vector<double> CharacteristicSolution::eval(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(eval(x));
  return out;
}

double CharacteristicSolution::shock_amplitude() const {
  if (t_ <= 1.0) return 0.0;
  return std::sin(foot(kPi));
}

double CharacteristicSolution::energy() const {
  if (t_ <= 1.0) return 0.5;
  // Substituting x = xi + t sin xi on the left half, where the characteristics
  // reaching [0, pi) start from [0, xi_s).
  const double xi_s = foot(kPi);
  auto integrand = [t = t_](double xi) {
    const double s = std::sin(xi);
    return s * s * (1.0 + t * std::cos(xi));
  };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, xi_s, 15, 1e-14, &error);
  if (!std::isfinite(integral) || error > 1e-10) {
    throw NumericalError("oracle energy quadrature failed to converge");
  }
  return integral / kPi;
}

double oracle_eval(double x, double t) { return CharacteristicSolution(t).eval(x); }

double oracle_energy(double t) { return CharacteristicSolution(t).energy(); }

}  // namespace renormesh
