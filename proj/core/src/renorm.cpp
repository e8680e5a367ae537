#include "renormesh/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace renormesh {

double determinant(const Matrix2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

Quantities quantities(const SpectralField& f, ModeRange resolved) {
  if (!f.range().contains(resolved)) {
    throw std::invalid_argument("quantities: resolved range exceeds the field");
  }
  Quantities q;
  for (int k = resolved.lo; k <= resolved.hi; ++k) {
    const double a2 = std::norm(f[k]);
    q.e1 += a2;
    q.e2 += a2 * a2;
  }
  return q;
}

Matrix2 rate_contributions(const TermEvaluation& terms, const SpectralField& f,
                           ModeRange resolved) {
  if (!terms.target.contains(resolved) || !f.range().contains(resolved)) {
    throw std::invalid_argument("rate_contributions: incompatible ranges");
  }
  Matrix2 c{};
  for (int k = resolved.lo; k <= resolved.hi; ++k) {
    const Complex uc = std::conj(f[k]);
    const double mag2 = std::norm(f[k]);
    const Complex r1 = terms.r1_at(k);
    const Complex r2 = terms.r2_at(k);
    c[0][0] += 2.0 * (r1 * uc).real();
    c[0][1] += 2.0 * (r2 * uc).real();
    c[1][0] += 4.0 * (r1 * mag2 * uc).real();
    c[1][1] += 4.0 * (r2 * mag2 * uc).real();
  }
  return c;
}

QuantityRates weighted_rates(const Matrix2& contributions, CoefficientVector a) {
  QuantityRates r;
  r.contributions = contributions;
  r.dE1 = a.a1 * contributions[0][0] + a.a2 * contributions[0][1];
  r.dE2 = a.a1 * contributions[1][0] + a.a2 * contributions[1][1];
  return r;
}

RenormState build_matrices(const Matrix2& full_C, const Matrix2& reduced_C) {
  RenormState s;
  s.A = full_C;
  s.B = reduced_C;
  s.detB = determinant(reduced_C);
  s.b_singular = std::abs(s.detB) < kSingularDetB;
  return s;
}

EigenPair eigenvalues(const Matrix2& m) {
  const double tr = m[0][0] + m[1][1];
  const double det = determinant(m);
  const double disc = 0.25 * tr * tr - det;
  const double half = 0.5 * tr;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    // Avoid cancellation: compute the larger-magnitude root first.
    const double big = half >= 0.0 ? half + root : half - root;
    const double small = big != 0.0 ? det / big : 0.0;
    return half >= 0.0 ? EigenPair{big, small} : EigenPair{small, big};
  }
  const double root = std::sqrt(-disc);
  return {{half, root}, {half, -root}};
}

EigenPair generalized_eigenvalues(const Matrix2& a, const Matrix2& b) {
  // det(A - lambda B) = detB lambda^2 - c lambda + detA.
  const double det_a = determinant(a);
  const double det_b = determinant(b);
  const double c = a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] -
                   a[1][0] * b[0][1];
  const double disc = c * c - 4.0 * det_a * det_b;
  if (disc >= 0.0) {
    const double q = c + std::copysign(std::sqrt(disc), c);
    if (q == 0.0) return {0.0, 0.0};
    const double big = q / (2.0 * det_b);
    const double small = 2.0 * det_a / q;
    return c >= 0.0 ? EigenPair{big, small} : EigenPair{small, big};
  }
  const double re = c / (2.0 * det_b);
  const double im = std::sqrt(-disc) / (2.0 * std::abs(det_b));
  return {{re, im}, {re, -im}};
}

void solve_M(RenormState& state) {
  const double det = state.detB;
  if (det == 0.0 || !std::isfinite(det)) {
    state.M = Matrix2{};
    state.eig = {0.0, 0.0};
    state.b_singular = true;
    return;
  }
  const Matrix2& b = state.B;
  const Matrix2 inv{{{b[1][1] / det, -b[0][1] / det}, {-b[1][0] / det, b[0][0] / det}}};
  Matrix2 m{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      m[i][j] = state.A[i][0] * inv[0][j] + state.A[i][1] * inv[1][j];
    }
  }
  state.M = m;
  state.eig = generalized_eigenvalues(state.A, state.B);
}

EigenPair match_eigenvalues(const EigenPair& previous, const EigenPair& current) {
  const double keep = std::abs(current.first - previous.first) +
                      std::abs(current.second - previous.second);
  const double swap = std::abs(current.second - previous.first) +
                      std::abs(current.first - previous.second);
  return swap < keep ? EigenPair{current.second, current.first} : current;
}

EigenPair order_nearest_one(const EigenPair& pair) {
  return std::abs(pair.second - 1.0) < std::abs(pair.first - 1.0)
             ? EigenPair{pair.second, pair.first}
             : pair;
}

int digits_agreement(double x, double y) {
  const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
  const double rel = std::abs(x - y) / scale;
  if (rel == 0.0) return 16;
  if (!std::isfinite(rel)) return 0;
  const double d = std::floor(-std::log10(rel));
  return static_cast<int>(std::clamp(d, 0.0, 16.0));
}

}  // namespace renormesh
