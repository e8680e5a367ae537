#pragma once

#include <array>
#include <complex>
#include <utility>

#include "renormesh/models.hpp"
#include "renormesh/spectral.hpp"

namespace renormesh {

/// Row-major 2x2 real matrix; m[i][j] is row i, column j.
using Matrix2 = std::array<std::array<double, 2>, 2>;

double determinant(const Matrix2& m);

/// E1 = sum_F |u_k|^2 and E2 = sum_F |u_k|^4.
struct Quantities {
  double e1 = 0.0;
  double e2 = 0.0;
};

Quantities quantities(const SpectralField& f, ModeRange resolved);

/// Contribution C[i][j] of term family j to the rate of quantity i, before
/// coefficient weighting:
///   C[0][j] = sum_F 2 Re(r_{j,k} conj(u_k))
///   C[1][j] = sum_F 4 Re(r_{j,k} |u_k|^2 conj(u_k)).
Matrix2 rate_contributions(const TermEvaluation& terms, const SpectralField& f,
                           ModeRange resolved);

struct QuantityRates {
  double dE1 = 0.0;
  double dE2 = 0.0;
  Matrix2 contributions{};
};

/// dE_i = sum_j a_j C[i][j].
QuantityRates weighted_rates(const Matrix2& contributions, CoefficientVector a);

using EigenPair = std::pair<std::complex<double>, std::complex<double>>;

/// |det B| below this is treated as singular.
inline constexpr double kSingularDetB = 1e-28;

/// Renormalization data at one instant. A holds the full system's
/// contributions, B the reduced system's, and M solves A = M B.
struct RenormState {
  Matrix2 A{};
  Matrix2 B{};
  Matrix2 M{};
  double detB = 0.0;
  EigenPair eig{};
  std::array<int, 2> digits{16, 16};
  double time = 0.0;
  bool b_singular = true;
};

/// A = full_C, B = reduced_C, detB = det(B), singular flag for
/// |detB| < kSingularDetB. M and the eigenvalues are left for solve_M.
RenormState build_matrices(const Matrix2& full_C, const Matrix2& reduced_C);

/// M = A B^{-1} by the explicit 2x2 inverse and its eigenvalues by the
/// closed-form quadratic. A near-singular B is not regularized; an exactly
/// singular one yields M = 0 with zero eigenvalues.
void solve_M(RenormState& state);

/// Eigenvalues of a real 2x2 matrix, in the order the quadratic formula
/// yields them (+ root first).
EigenPair eigenvalues(const Matrix2& m);

/// Eigenvalues of A B^{-1}, i.e. roots of det(A - lambda B) = 0, computed
/// from the entries of A and B without forming the inverse. Same values as
/// eigenvalues(A B^{-1}) but far less sensitive to a nearly singular B.
EigenPair generalized_eigenvalues(const Matrix2& a, const Matrix2& b);

/// Orders `current` to minimize the total distance to `previous`. Ties keep
/// the order of `current`.
EigenPair match_eigenvalues(const EigenPair& previous, const EigenPair& current);

/// Orders a pair so that the value nearest 1 comes first.
EigenPair order_nearest_one(const EigenPair& pair);

/// floor(-log10(|x - y| / max(|x|, |y|, 1e-300))) clamped to [0, 16].
int digits_agreement(double x, double y);

}  // namespace renormesh
