#pragma once

#include <span>
#include <vector>

namespace renormesh {

/// Entropy solution of inviscid Burgers u_t + u u_x = 0 on [0, 2pi) with
/// u(x, 0) = sin x, obtained from the characteristics x = xi + t sin(xi).
/// For t > 1 a stationary shock sits at x = pi (the solution is odd about pi)
/// and the foot xi is taken on the side of the shock the point lies on.
class CharacteristicSolution {
 public:
  explicit CharacteristicSolution(double t, double newton_tol = 1e-13,
                                  int max_iter = 100);

  double time() const { return t_; }

  /// Velocity at x in [0, 2pi). At the shock itself returns the mean of the
  /// two one-sided limits, i.e. 0. Throws NumericalError if the foot cannot
  /// be located to newton_tol.
  double eval(double x) const;
  std::vector<double> eval(std::span<const double> xs) const;

  /// Foot xi of the characteristic through x in [0, pi], on the left branch.
  double foot(double x) const;

  /// Left limit u(pi-, t); zero before the shock forms.
  double shock_amplitude() const;

  /// E1(t) = (1/2pi) int_0^{2pi} u^2 dx, normalized like sum_k |u_k|^2.
  double energy() const;

 private:
  double t_;
  double tol_;
  int max_iter_;
};

double oracle_eval(double x, double t);
double oracle_energy(double t);

}  // namespace renormesh
