#include "renormesh/convolution.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace renormesh {

namespace {

void require_finite(ModeSpan s) {
  if (static_cast<int>(s.values.size()) != s.range.size()) {
    throw std::invalid_argument("convolution: span length does not match range");
  }
  for (const auto& z : s.values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("convolution: non-finite input amplitude");
    }
  }
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))),
        size(n) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  Complex* as_complex() { return reinterpret_cast<Complex*>(data); }

  fftw_complex* data;
  std::size_t size;
};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; executing an existing plan on new arrays
// is. Plans live for the lifetime of the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    FftwBuffer in(static_cast<std::size_t>(n));
    FftwBuffer out(static_cast<std::size_t>(n));
    PlanPair p;
    p.forward = fftw_plan_dft_1d(n, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_1d(n, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (p.forward == nullptr || p.backward == nullptr) {
      throw std::runtime_error("FFTW failed to create a plan");
    }
    plans_.emplace(n, p);
    return p;
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

struct Workspace {
  std::unique_ptr<FftwBuffer> a, b, fa, fb;

  void reserve(std::size_t n) {
    if (a && a->size == n) return;
    a = std::make_unique<FftwBuffer>(n);
    b = std::make_unique<FftwBuffer>(n);
    fa = std::make_unique<FftwBuffer>(n);
    fb = std::make_unique<FftwBuffer>(n);
  }
};

}  // namespace

std::vector<Complex> convolve_direct(ModeSpan a, ModeSpan b, ModeRange out) {
  require_finite(a);
  require_finite(b);
  std::vector<Complex> c(static_cast<std::size_t>(out.size()));
  for (int p = a.range.lo; p <= a.range.hi; ++p) {
    const Complex up = a.values[static_cast<std::size_t>(p - a.range.lo)];
    if (up == Complex{}) continue;
    const int qlo = std::max(b.range.lo, out.lo - p);
    const int qhi = std::min(b.range.hi, out.hi - p);
    for (int q = qlo; q <= qhi; ++q) {
      c[static_cast<std::size_t>(p + q - out.lo)] +=
          up * b.values[static_cast<std::size_t>(q - b.range.lo)];
    }
  }
  return c;
}

std::vector<Complex> convolve_fft(ModeSpan a, ModeSpan b, ModeRange out) {
  require_finite(a);
  require_finite(b);
  std::vector<Complex> c(static_cast<std::size_t>(out.size()));
  if (a.range.empty() || b.range.empty() || out.empty()) return c;

  const int na = a.range.size();
  const int nb = b.range.size();
  const int n = next_power_of_two(na + nb);
  const auto un = static_cast<std::size_t>(n);

  thread_local Workspace ws;
  ws.reserve(un);
  Complex* bufa = ws.a->as_complex();
  Complex* bufb = ws.b->as_complex();
  std::fill(bufa, bufa + n, Complex{});
  std::fill(bufb, bufb + n, Complex{});
  std::copy(a.values.begin(), a.values.end(), bufa);
  std::copy(b.values.begin(), b.values.end(), bufb);

  const PlanPair plan = PlanCache::instance().get(n);
  fftw_execute_dft(plan.forward, ws.a->data, ws.fa->data);
  fftw_execute_dft(plan.forward, ws.b->data, ws.fb->data);
  Complex* fa = ws.fa->as_complex();
  const Complex* fb = ws.fb->as_complex();
  for (std::size_t i = 0; i < un; ++i) fa[i] *= fb[i];
  fftw_execute_dft(plan.backward, ws.fa->data, ws.a->data);

  // Linear index j of the product corresponds to wavenumber j + a.lo + b.lo.
  const int shift = a.range.lo + b.range.lo;
  const int last = na + nb - 2;
  const double scale = 1.0 / n;
  for (int k = out.lo; k <= out.hi; ++k) {
    const int j = k - shift;
    if (j < 0 || j > last) continue;
    c[static_cast<std::size_t>(k - out.lo)] = bufa[j] * scale;
  }
  return c;
}

std::vector<Complex> truncated_convolution(ModeSpan a, ModeSpan b,
                                           ModeRange out) {
  constexpr long kDirectWorkLimit = 64;
  const long work = static_cast<long>(a.range.size()) * b.range.size();
  return work <= kDirectWorkLimit ? convolve_direct(a, b, out)
                                  : convolve_fft(a, b, out);
}

}  // namespace renormesh
