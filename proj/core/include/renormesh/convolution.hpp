#pragma once

#include <vector>

#include "renormesh/spectral.hpp"

namespace renormesh {

/// Truncated convolution c_k = sum_{p in a, q in b, p + q = k} a_p b_q for
/// every k in `out`, with no aliasing. Result is indexed by k - out.lo.
///
/// Two independent routes are provided. The direct sum is the O(|A||B|)
/// reference; the FFT route zero-pads to the smallest power of two
/// >= |A| + |B| so the circular wrap never lands on a requested wavenumber.
std::vector<Complex> convolve_direct(ModeSpan a, ModeSpan b, ModeRange out);
std::vector<Complex> convolve_fft(ModeSpan a, ModeSpan b, ModeRange out);

/// Dispatches to the direct sum for tiny supports and the FFT route otherwise.
std::vector<Complex> truncated_convolution(ModeSpan a, ModeSpan b,
                                           ModeRange out);

}  // namespace renormesh
