#include "renormesh/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "renormesh/convolution.hpp"

namespace renormesh {

namespace {

constexpr Complex kI{0.0, 1.0};

ModeSpan support_view(const SpectralField& u, ModeRange support) {
  if (!u.range().contains(support)) {
    throw std::invalid_argument("term support exceeds the field's mode range");
  }
  const auto offset = static_cast<std::size_t>(support.lo - u.range().lo);
  return {support, u.modes().subspan(offset, static_cast<std::size_t>(support.size()))};
}

ModeRange role_range(const ModePartition& partition, SystemRole role) {
  return role == SystemRole::full ? partition.total() : partition.resolved();
}

ModeBand role_band(const ModePartition& partition, SystemRole role) {
  return role == SystemRole::full ? partition.padding() : partition.unresolved();
}

void check_role_size(const SpectralField& u, const ModePartition& partition,
                     SystemRole role) {
  const int expected = role == SystemRole::full ? partition.n_total()
                                                : partition.n_resolved();
  if (u.size() != expected) {
    std::ostringstream msg;
    msg << "field of size " << u.size() << " does not match "
        << (role == SystemRole::full ? "full" : "reduced")
        << " partition size " << expected;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ModelKind ModelKind::identified(CoefficientVector a) {
  if (!std::isfinite(a.a1) || !std::isfinite(a.a2)) {
    throw std::invalid_argument("identified model needs finite coefficients");
  }
  return ModelKind(Kind::identified, a);
}

std::string ModelKind::name() const {
  switch (kind_) {
    case Kind::tmodel:
      return "tmodel";
    case Kind::galerkin:
      return "galerkin";
    case Kind::identified:
      return "identified";
  }
  return "unknown";
}

ModePartition::ModePartition(int n_resolved, int n_total, int padding_factor)
    : n_resolved_(n_resolved), n_total_(n_total), padding_(padding_factor) {
  if (!is_power_of_two(n_resolved) || !is_power_of_two(n_total) ||
      n_resolved < 2 || n_resolved > n_total) {
    throw std::invalid_argument("ModePartition: need powers of two with 2 <= N <= M");
  }
  if (padding_factor < 1) {
    throw std::invalid_argument("ModePartition: padding factor must be >= 1");
  }
}

ModeBand ModePartition::padding() const {
  const int half = n_total_ / 2 + padding_ * n_total_ / 2;
  return {{-half, half - 1}, total()};
}

std::vector<Complex> term1(const SpectralField& u, ModeRange support, double nu) {
  if (nu < 0.0) throw std::invalid_argument("term1: negative viscosity");
  const ModeSpan us = support_view(u, support);
  std::vector<Complex> r = truncated_convolution(us, us, support);
  for (int k = support.lo; k <= support.hi; ++k) {
    auto& rk = r[static_cast<std::size_t>(k - support.lo)];
    const double kd = k;
    rk = -0.5 * kI * kd * rk - nu * kd * kd * u[k];
  }
  enforce_hermitian(r);
  return r;
}

std::vector<Complex> term2(const SpectralField& u, ModeRange resolved,
                           ModeBand unresolved, double t) {
  if (unresolved.intersects(resolved)) {
    throw std::invalid_argument("term2: resolved and unresolved sets overlap");
  }
  std::vector<Complex> r(static_cast<std::size_t>(resolved.size()));
  if (t == 0.0) return r;

  const ModeSpan us = support_view(u, resolved);
  const ModeRange wr = unresolved.outer;
  std::vector<Complex> w = truncated_convolution(us, us, wr);
  for (int q = wr.lo; q <= wr.hi; ++q) {
    auto& wq = w[static_cast<std::size_t>(q - wr.lo)];
    wq = unresolved.contains(q) ? -t * 0.5 * kI * static_cast<double>(q) * wq
                                : Complex{};
  }
  // The two cross sums coincide after swapping p and q.
  const std::vector<Complex> c =
      truncated_convolution(us, ModeSpan{wr, w}, resolved);
  for (int k = resolved.lo; k <= resolved.hi; ++k) {
    const auto i = static_cast<std::size_t>(k - resolved.lo);
    r[i] = -kI * static_cast<double>(k) * c[i];
  }
  enforce_hermitian(r);
  return r;
}

TermEvaluation evaluate_terms(const SpectralField& u, const ModePartition& partition,
                              double nu, double t, SystemRole role) {
  check_role_size(u, partition, role);
  const ModeRange target = role_range(partition, role);
  return {term1(u, target, nu), term2(u, target, role_band(partition, role), t),
          target};
}

std::vector<Complex> rhs(const SpectralField& u, const ModePartition& partition,
                         CoefficientVector a, double nu, double t, SystemRole role) {
  check_role_size(u, partition, role);
  const ModeRange target = role_range(partition, role);
  std::vector<Complex> out = term1(u, target, nu);
  if (a.a1 != 1.0) {
    for (auto& z : out) z *= a.a1;
  }
  if (a.a2 != 0.0) {
    const std::vector<Complex> r2 = term2(u, target, role_band(partition, role), t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a.a2 * r2[i];
  }
  return out;
}

}  // namespace renormesh
