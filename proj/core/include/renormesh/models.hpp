#pragma once

#include <string>
#include <vector>

#include "renormesh/spectral.hpp"

namespace renormesh {

/// Weights (a1, a2) of the two right-hand-side term families.
struct CoefficientVector {
  double a1 = 1.0;
  double a2 = 0.0;

  friend bool operator==(const CoefficientVector&, const CoefficientVector&) = default;
};

/// Which reduced model drives the resolved modes.
class ModelKind {
 public:
  enum class Kind { tmodel, galerkin, identified };

  static ModelKind tmodel() { return ModelKind(Kind::tmodel, {1.0, 1.0}); }
  static ModelKind galerkin() { return ModelKind(Kind::galerkin, {1.0, 0.0}); }
  /// Throws std::invalid_argument on non-finite coefficients.
  static ModelKind identified(CoefficientVector a);

  Kind kind() const { return kind_; }
  CoefficientVector coefficients() const { return coeffs_; }
  std::string name() const;

 private:
  ModelKind(Kind k, CoefficientVector a) : kind_(k), coeffs_(a) {}
  Kind kind_;
  CoefficientVector coeffs_;
};

/// Resolved set F = [-N/2, N/2-1], unresolved band G = [-M/2, M/2-1] \ F and
/// auxiliary band I beyond F u G. With padding factor p, I holds p*M modes:
/// p = 1 gives [-M, M-1] \ [-M/2, M/2-1].
class ModePartition {
 public:
  ModePartition(int n_resolved, int n_total, int padding_factor = 1);

  int n_resolved() const { return n_resolved_; }
  int n_total() const { return n_total_; }
  int padding_factor() const { return padding_; }

  ModeRange resolved() const { return ModeRange::centered(n_resolved_); }
  ModeRange total() const { return ModeRange::centered(n_total_); }
  ModeBand unresolved() const { return {total(), resolved()}; }
  ModeBand padding() const;

 private:
  int n_resolved_;
  int n_total_;
  int padding_;
};

/// Full system lives on F u G with I as its unresolved band; the reduced
/// model lives on F with G as its unresolved band.
enum class SystemRole { full, reduced };

/// Per-mode values of both term families on a target range.
struct TermEvaluation {
  std::vector<Complex> r1;
  std::vector<Complex> r2;
  ModeRange target;

  Complex r1_at(int k) const { return r1[static_cast<std::size_t>(k - target.lo)]; }
  Complex r2_at(int k) const { return r2[static_cast<std::size_t>(k - target.lo)]; }
};

/// Quadratic plus viscous term on support S:
///   r1_k = -(ik/2) sum_{p+q=k; p,q in S} u_p u_q - nu k^2 u_k.
std::vector<Complex> term1(const SpectralField& u, ModeRange support, double nu);

/// Cubic t-model-form term on the resolved support P with unresolved band Q:
///   w_q  = -t (iq/2) sum_{r+s=q; r,s in P} u_r u_s,           q in Q
///   r2_k = -(ik/2) [sum_{p in P, q in Q} u_p w_q + sum_{p in Q, q in P} w_p u_q].
/// Throws std::invalid_argument if Q overlaps P.
std::vector<Complex> term2(const SpectralField& u, ModeRange resolved,
                           ModeBand unresolved, double t);

/// Both term families for the given role. For SystemRole::full the field must
/// carry n_total modes; for SystemRole::reduced, n_resolved modes.
TermEvaluation evaluate_terms(const SpectralField& u, const ModePartition& partition,
                              double nu, double t, SystemRole role);

/// du_k/dt = a1 r1_k + a2 r2_k on the role's target range. term2 is skipped
/// when a2 == 0.
std::vector<Complex> rhs(const SpectralField& u, const ModePartition& partition,
                         CoefficientVector a, double nu, double t, SystemRole role);

}  // namespace renormesh
