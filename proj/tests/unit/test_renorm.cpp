#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "renormesh/renorm.hpp"

using namespace renormesh;

namespace {

SpectralField random_field(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> v(static_cast<std::size_t>(n));
  for (int k = 1; k < n / 2; ++k) {
    const Complex z = Complex{g(rng), g(rng)} / static_cast<double>(k * k);
    v[static_cast<std::size_t>(k + n / 2)] = z;
    v[static_cast<std::size_t>(-k + n / 2)] = std::conj(z);
  }
  return SpectralField::from_modes(n, v);
}

Matrix2 random_matrix(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  return {{{d(rng), d(rng)}, {d(rng), d(rng)}}};
}

Matrix2 multiply(const Matrix2& a, const Matrix2& b) {
  Matrix2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

bool same_pair(const EigenPair& p, std::complex<double> a, std::complex<double> b, double tol) {
  return (std::abs(p.first - a) <= tol && std::abs(p.second - b) <= tol) ||
         (std::abs(p.first - b) <= tol && std::abs(p.second - a) <= tol);
}

}  // namespace

TEST(Quantities, SineValues) {
  const SpectralField u = field_from_sine(16);
  const Quantities q = quantities(u, ModeRange::centered(8));
  EXPECT_DOUBLE_EQ(q.e1, 0.5);
  EXPECT_DOUBLE_EQ(q.e2, 0.125);
  EXPECT_THROW(quantities(u, ModeRange::centered(32)), std::invalid_argument);
}

TEST(RateContributions, FiniteDifferenceOracle) {
  // C[i][j] is the derivative of E_i along the direction r_j.
  const SpectralField u = random_field(32, 4);
  const ModePartition p(16, 32);
  const TermEvaluation terms = evaluate_terms(restrict_field(u, 16), p, 0.02, 0.7,
                                              SystemRole::reduced);
  const SpectralField ur = restrict_field(u, 16);
  const Matrix2 c = rate_contributions(terms, ur, p.resolved());
  const double eps = 1e-6;
  for (int j = 0; j < 2; ++j) {
    const auto& r = j == 0 ? terms.r1 : terms.r2;
    std::vector<Complex> plus(ur.modes().begin(), ur.modes().end());
    std::vector<Complex> minus = plus;
    for (std::size_t i = 0; i < plus.size(); ++i) {
      plus[i] += eps * r[i];
      minus[i] -= eps * r[i];
    }
    const Quantities qp = quantities(SpectralField::from_modes(16, plus), p.resolved());
    const Quantities qm = quantities(SpectralField::from_modes(16, minus), p.resolved());
    EXPECT_NEAR(c[0][j], (qp.e1 - qm.e1) / (2 * eps), 1e-8 * std::max(1.0, std::abs(c[0][j])));
    EXPECT_NEAR(c[1][j], (qp.e2 - qm.e2) / (2 * eps), 1e-8 * std::max(1.0, std::abs(c[1][j])));
  }
}

TEST(WeightedRates, LinearInCoefficients) {
  const Matrix2 c{{{1.5, -0.25}, {0.75, 2.0}}};
  const QuantityRates r = weighted_rates(c, {2.0, 3.0});
  EXPECT_DOUBLE_EQ(r.dE1, 1.5 * 2.0 - 0.25 * 3.0);
  EXPECT_DOUBLE_EQ(r.dE2, 0.75 * 2.0 + 2.0 * 3.0);
}

TEST(WeightedRates, ReconstructsRhsRate) {
  const SpectralField u = random_field(32, 9);
  const ModePartition p(16, 32);
  const CoefficientVector a{0.9, 0.4};
  const TermEvaluation terms = evaluate_terms(u, p, 0.01, 0.5, SystemRole::full);
  const Matrix2 c = rate_contributions(terms, u, p.resolved());
  const auto d = rhs(u, p, a, 0.01, 0.5, SystemRole::full);
  double e1 = 0.0, e2 = 0.0;
  for (int k = p.resolved().lo; k <= p.resolved().hi; ++k) {
    const Complex dk = d[static_cast<std::size_t>(k - p.total().lo)];
    e1 += 2.0 * (dk * std::conj(u[k])).real();
    e2 += 4.0 * std::norm(u[k]) * (dk * std::conj(u[k])).real();
  }
  const QuantityRates r = weighted_rates(c, a);
  EXPECT_NEAR(r.dE1, e1, 1e-12);
  EXPECT_NEAR(r.dE2, e2, 1e-12);
}

TEST(SolveM, IdentityWhenAEqualsB) {
  const Matrix2 b{{{1.0, 2.0}, {3.0, 5.0}}};
  RenormState s = build_matrices(b, b);
  solve_M(s);
  EXPECT_FALSE(s.b_singular);
  EXPECT_NEAR(s.M[0][0], 1.0, 1e-15);
  EXPECT_NEAR(s.M[0][1], 0.0, 1e-15);
  EXPECT_NEAR(s.M[1][0], 0.0, 1e-15);
  EXPECT_NEAR(s.M[1][1], 1.0, 1e-15);
  EXPECT_TRUE(same_pair(s.eig, 1.0, 1.0, 1e-12));
}

TEST(SolveM, DiagonalExample) {
  RenormState s = build_matrices({{{2.0, 0.0}, {0.0, 3.0}}}, {{{1.0, 0.0}, {0.0, 1.0}}});
  solve_M(s);
  EXPECT_TRUE(same_pair(s.eig, 2.0, 3.0, 1e-14));
}

TEST(SolveM, RoundTripOracle) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix2 m0 = random_matrix(rng);
    const Matrix2 b = random_matrix(rng);
    if (std::abs(determinant(b)) < 1e-2) continue;
    RenormState s = build_matrices(multiply(m0, b), b);
    solve_M(s);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(s.M[i][j], m0[i][j], 1e-10);
    const EigenPair direct = eigenvalues(m0);
    EXPECT_TRUE(same_pair(s.eig, direct.first, direct.second, 1e-9));
  }
}

TEST(SolveM, ExactlySingularGivesSentinel) {
  RenormState s = build_matrices({{{1.0, 2.0}, {3.0, 4.0}}}, {{{1.0, 2.0}, {2.0, 4.0}}});
  solve_M(s);
  EXPECT_TRUE(s.b_singular);
  EXPECT_EQ(s.detB, 0.0);
  for (const auto& row : s.M)
    for (double v : row) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.eig.first, 0.0);
  EXPECT_EQ(s.eig.second, 0.0);
}

TEST(SolveM, NearSingularIsFlaggedButSolved) {
  RenormState s = build_matrices({{{1.0, 0.0}, {0.0, 1.0}}}, {{{1e-15, 0.0}, {0.0, 1e-15}}});
  solve_M(s);
  EXPECT_TRUE(s.b_singular);
  EXPECT_NEAR(s.M[0][0], 1e15, 1.0);
  EXPECT_TRUE(std::isfinite(s.eig.first.real()));
}

TEST(SolveM, SharedFirstColumnGivesUnitEigenvalue) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix2 a = random_matrix(rng);
    Matrix2 b = random_matrix(rng);
    b[0][0] = a[0][0];
    b[1][0] = a[1][0];
    if (std::abs(determinant(b)) < 1e-3) continue;
    RenormState s = build_matrices(a, b);
    solve_M(s);
    const EigenPair e = order_nearest_one(s.eig);
    EXPECT_NEAR(std::abs(e.first - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(e.second.real(), determinant(a) / determinant(b), 1e-10);
  }
}

TEST(Eigenvalues, ComplexPair) {
  const EigenPair e = eigenvalues({{{0.0, -1.0}, {1.0, 0.0}}});
  EXPECT_TRUE(same_pair(e, {0.0, 1.0}, {0.0, -1.0}, 1e-15));
}

TEST(Eigenvalues, GeneralizedMatchesExplicitInverse) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix2 a = random_matrix(rng);
    const Matrix2 b = random_matrix(rng);
    const double det = determinant(b);
    if (std::abs(det) < 1e-2) continue;
    const Matrix2 binv{{{b[1][1] / det, -b[0][1] / det}, {-b[1][0] / det, b[0][0] / det}}};
    const EigenPair ref = eigenvalues(multiply(a, binv));
    const EigenPair gen = generalized_eigenvalues(a, b);
    EXPECT_TRUE(same_pair(gen, ref.first, ref.second, 1e-9));
  }
}

TEST(MatchEigenvalues, Examples) {
  EigenPair m = match_eigenvalues({1.0, 0.1}, {0.12, 0.99});
  EXPECT_EQ(m.first, 0.99);
  EXPECT_EQ(m.second, 0.12);
  m = match_eigenvalues({1.0, 0.1}, {1.0, 0.1});
  EXPECT_EQ(m.first, 1.0);
  m = match_eigenvalues({1.0, 0.0}, {1.0 + 1e-9, 1e-9});
  EXPECT_EQ(m.first, 1.0 + 1e-9);
  EXPECT_EQ(m.second, 1e-9);
}

TEST(OrderNearestOne, PutsUnitFirst) {
  const EigenPair e = order_nearest_one({0.2, 1.01});
  EXPECT_EQ(e.first, 1.01);
  EXPECT_EQ(e.second, 0.2);
}

TEST(DigitsAgreement, Examples) {
  EXPECT_EQ(digits_agreement(1.0, 1.001), 3);
  EXPECT_EQ(digits_agreement(0.25, 0.25), 16);
  EXPECT_EQ(digits_agreement(1.0, 2.0), 0);
  EXPECT_EQ(digits_agreement(0.0, 0.0), 16);
  EXPECT_EQ(digits_agreement(1.0, -1.0), 0);
  EXPECT_EQ(digits_agreement(1.0, 1.0 + 1e-20), 16);
  EXPECT_EQ(digits_agreement(std::nan(""), 1.0), 0);
  EXPECT_EQ(digits_agreement(-3.0, -3.0003), 4);
}
