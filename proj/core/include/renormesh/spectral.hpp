#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <vector>

namespace renormesh {

using Complex = std::complex<double>;

/// Contiguous inclusive range of wavenumbers [lo, hi]. Empty when hi < lo.
struct ModeRange {
  int lo = 0;
  int hi = -1;

  /// The range [-n/2, n/2 - 1] carried by a field of n modes.
  static constexpr ModeRange centered(int n) { return {-n / 2, n / 2 - 1}; }

  constexpr int size() const { return hi >= lo ? hi - lo + 1 : 0; }
  constexpr bool empty() const { return hi < lo; }
  constexpr bool contains(int k) const { return k >= lo && k <= hi; }
  constexpr bool contains(ModeRange other) const {
    return other.empty() || (other.lo >= lo && other.hi <= hi);
  }
  constexpr bool intersects(ModeRange other) const {
    return !empty() && !other.empty() && other.lo <= hi && other.hi >= lo;
  }

  friend constexpr bool operator==(ModeRange, ModeRange) = default;
};

/// The wavenumbers of `outer` that are not in `hole`, e.g. the unresolved
/// band G = [-M/2, M/2-1] \ [-N/2, N/2-1].
struct ModeBand {
  ModeRange outer;
  ModeRange hole;

  constexpr bool contains(int k) const {
    return outer.contains(k) && !hole.contains(k);
  }
  constexpr int size() const {
    int overlap = 0;
    if (outer.intersects(hole)) {
      overlap = std::min(outer.hi, hole.hi) - std::max(outer.lo, hole.lo) + 1;
    }
    return outer.size() - overlap;
  }
  /// True if some wavenumber of `r` lies in the band.
  constexpr bool intersects(ModeRange r) const {
    if (!outer.intersects(r)) return false;
    ModeRange clipped{std::max(outer.lo, r.lo), std::min(outer.hi, r.hi)};
    return !hole.contains(clipped);
  }
};

/// Read-only view of amplitudes over a contiguous range; values[i] is the
/// amplitude of wavenumber range.lo + i.
struct ModeSpan {
  ModeRange range;
  std::span<const Complex> values;
};

bool is_power_of_two(int n);
int next_power_of_two(int n);

/// Fourier amplitudes u_k, k in [-M/2, M/2-1], of a real 2pi-periodic
/// function at time t. The stored amplitudes are Hermitian
/// (u_{-k} = conj(u_k), u_0 real), the unpaired amplitude at -M/2 is zero and
/// every value is finite.
class SpectralField {
 public:
  SpectralField() = default;

  static SpectralField zeros(int size, double time = 0.0);

  /// Builds a field from dense storage indexed by k + size/2. The input is
  /// projected onto the Hermitian subspace (a no-op, bit for bit, when it is
  /// already Hermitian) and the Nyquist amplitude is zeroed.
  static SpectralField from_modes(int size, std::vector<Complex> modes,
                                  double time = 0.0);

  int size() const { return size_; }
  double time() const { return time_; }
  ModeRange range() const { return ModeRange::centered(size_); }

  /// Amplitude of wavenumber k; zero outside the stored range.
  Complex operator[](int k) const {
    return range().contains(k) ? modes_[static_cast<std::size_t>(k + size_ / 2)]
                               : Complex{};
  }

  std::span<const Complex> modes() const { return modes_; }
  ModeSpan view() const { return {range(), modes_}; }

  SpectralField with_time(double t) const;

 private:
  SpectralField(int size, std::vector<Complex> modes, double time)
      : size_(size), time_(time), modes_(std::move(modes)) {}

  int size_ = 0;
  double time_ = 0.0;
  std::vector<Complex> modes_;
};

/// In-place projection of centered storage of n = values.size() modes onto
/// Hermitian amplitudes with a zero Nyquist mode.
void enforce_hermitian(std::span<Complex> values);

/// u_0(x) = sin x, i.e. u_1 = -i/2, u_{-1} = i/2.
SpectralField field_from_sine(int size);

/// Refinement by appending zero-amplitude high modes.
SpectralField spectral_interpolate(const SpectralField& f, int new_size);

/// Projection onto [-n/2, n/2-1].
SpectralField restrict_field(const SpectralField& f, int n);

/// Evaluates sum_k u_k e^{ikx} at each x. Throws if the imaginary residual
/// exceeds 1e-12 (relative to the l1 norm of the amplitudes).
std::vector<double> eval_realspace(const SpectralField& f,
                                   std::span<const double> xs);

/// Collocation grid x_j = 2 pi j / n.
std::vector<double> uniform_grid(int n);

}  // namespace renormesh
