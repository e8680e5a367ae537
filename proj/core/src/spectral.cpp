#include "renormesh/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace renormesh {

namespace {

void require_valid_size(int n, int minimum, const char* what) {
  if (n < minimum || !is_power_of_two(n)) {
    throw std::invalid_argument(std::string(what) + ": size " +
                                std::to_string(n) +
                                " must be a power of two >= " +
                                std::to_string(minimum));
  }
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void enforce_hermitian(std::span<Complex> values) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (n == 0) return;
  const std::ptrdiff_t half = n / 2;
  values[0] = Complex{};  // k = -n/2
  values[static_cast<std::size_t>(half)].imag(0.0);
  for (std::ptrdiff_t k = 1; k < half; ++k) {
    auto& pos = values[static_cast<std::size_t>(half + k)];
    auto& neg = values[static_cast<std::size_t>(half - k)];
    const Complex avg = 0.5 * (pos + std::conj(neg));
    pos = avg;
    neg = std::conj(avg);
  }
}

SpectralField SpectralField::zeros(int size, double time) {
  require_valid_size(size, 2, "SpectralField");
  return SpectralField(size, std::vector<Complex>(static_cast<std::size_t>(size)),
                       time);
}

SpectralField SpectralField::from_modes(int size, std::vector<Complex> modes,
                                        double time) {
  require_valid_size(size, 2, "SpectralField");
  if (modes.size() != static_cast<std::size_t>(size)) {
    throw std::invalid_argument("SpectralField: expected " +
                                std::to_string(size) + " amplitudes, got " +
                                std::to_string(modes.size()));
  }
  for (const auto& z : modes) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("SpectralField: non-finite amplitude");
    }
  }
  enforce_hermitian(modes);
  return SpectralField(size, std::move(modes), time);
}

SpectralField SpectralField::with_time(double t) const {
  return SpectralField(size_, modes_, t);
}

SpectralField field_from_sine(int size) {
  require_valid_size(size, 4, "field_from_sine");
  std::vector<Complex> modes(static_cast<std::size_t>(size));
  const auto half = static_cast<std::size_t>(size / 2);
  modes[half + 1] = Complex{0.0, -0.5};
  modes[half - 1] = Complex{0.0, 0.5};
  return SpectralField::from_modes(size, std::move(modes), 0.0);
}

SpectralField spectral_interpolate(const SpectralField& f, int new_size) {
  require_valid_size(new_size, 2, "spectral_interpolate");
  if (new_size < f.size()) {
    throw std::invalid_argument("spectral_interpolate: new size " +
                                std::to_string(new_size) +
                                " is smaller than " + std::to_string(f.size()));
  }
  std::vector<Complex> modes(static_cast<std::size_t>(new_size));
  const auto offset = static_cast<std::size_t>((new_size - f.size()) / 2);
  std::copy(f.modes().begin(), f.modes().end(), modes.begin() + offset);
  return SpectralField::from_modes(new_size, std::move(modes), f.time());
}

SpectralField restrict_field(const SpectralField& f, int n) {
  require_valid_size(n, 2, "restrict_field");
  if (n > f.size()) {
    throw std::invalid_argument("restrict_field: target size " +
                                std::to_string(n) + " exceeds " +
                                std::to_string(f.size()));
  }
  const auto offset = static_cast<std::size_t>((f.size() - n) / 2);
  std::vector<Complex> modes(f.modes().begin() + offset,
                             f.modes().begin() + offset + n);
  return SpectralField::from_modes(n, std::move(modes), f.time());
}

std::vector<double> eval_realspace(const SpectralField& f,
                                   std::span<const double> xs) {
  const ModeRange r = f.range();
  double l1 = 0.0;
  for (const auto& z : f.modes()) l1 += std::abs(z);
  const double limit = 1e-12 * std::max(1.0, l1);

  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("eval_realspace: non-finite position");
    }
    Complex sum{};
    for (int k = r.lo; k <= r.hi; ++k) {
      const Complex u = f[k];
      if (u == Complex{}) continue;
      sum += u * std::polar(1.0, static_cast<double>(k) * x);
    }
    if (std::abs(sum.imag()) > limit) {
      throw std::logic_error("eval_realspace: imaginary residual " +
                             std::to_string(sum.imag()) +
                             " exceeds tolerance");
    }
    out.push_back(sum.real());
  }
  return out;
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    xs[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / n;
  }
  return xs;
}

}  // namespace renormesh
