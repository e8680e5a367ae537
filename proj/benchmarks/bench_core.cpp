#include <benchmark/benchmark.h>

#include <random>

#include "renormesh/convolution.hpp"
#include "renormesh/integrator.hpp"
#include "renormesh/models.hpp"
#include "renormesh/renorm.hpp"
#include "renormesh/tracker.hpp"

using namespace renormesh;

namespace {

SpectralField random_field(int n) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  std::vector<Complex> v(static_cast<std::size_t>(n));
  for (int k = 1; k < n / 2; ++k) {
    const Complex z = Complex{g(rng), g(rng)} / static_cast<double>(k * k);
    v[static_cast<std::size_t>(n / 2 + k)] = z;
    v[static_cast<std::size_t>(n / 2 - k)] = std::conj(z);
  }
  return SpectralField::from_modes(n, v);
}

}  // namespace

static void BM_ConvolveDirect(benchmark::State& state) {
  const SpectralField u = random_field(static_cast<int>(state.range(0)));
  const ModeSpan s{u.range(), u.modes()};
  for (auto _ : state) benchmark::DoNotOptimize(convolve_direct(s, s, u.range()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveDirect)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

static void BM_ConvolveFft(benchmark::State& state) {
  const SpectralField u = random_field(static_cast<int>(state.range(0)));
  const ModeSpan s{u.range(), u.modes()};
  for (auto _ : state) benchmark::DoNotOptimize(convolve_fft(s, s, u.range()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveFft)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

// Right-hand side of the full system (N modes, padding band beyond).
static void BM_RhsFull(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = random_field(n);
  const ModePartition p(n / 2, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rhs(u, p, {1.0, 0.0}, 0.0, 0.5, SystemRole::full));
  }
}
BENCHMARK(BM_RhsFull)->RangeMultiplier(2)->Range(64, 2048);

static void BM_RhsReducedTModel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = random_field(n / 2);
  const ModePartition p(n / 2, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rhs(u, p, {1.0, 1.0}, 0.0, 0.5, SystemRole::reduced));
  }
}
BENCHMARK(BM_RhsReducedTModel)->RangeMultiplier(2)->Range(64, 2048);

static void BM_RenormState(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField full = random_field(n);
  const SpectralField reduced = restrict_field(full, n / 2);
  const ModePartition p(n / 2, n);
  for (auto _ : state) {
    const Matrix2 a = rate_contributions(evaluate_terms(full, p, 0.0, 0.5, SystemRole::full),
                                         full, p.resolved());
    const Matrix2 b = rate_contributions(
        evaluate_terms(reduced, p, 0.0, 0.5, SystemRole::reduced), reduced, p.resolved());
    RenormState s = build_matrices(a, b);
    solve_M(s);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_RenormState)->RangeMultiplier(4)->Range(64, 1024);

static void BM_Dp45Step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ModePartition p(n / 2, n);
  const SpectralField u0 = field_from_sine(n);
  OdeSystem sys{{u0.modes().begin(), u0.modes().end()},
                [&](double t, std::span<const Complex> y, std::span<Complex> d) {
                  const auto f = SpectralField::from_modes(
                      n, std::vector<Complex>(y.begin(), y.end()), t);
                  const auto r = rhs(f, p, {1.0, 0.0}, 0.0, t, SystemRole::full);
                  std::copy(r.begin(), r.end(), d.begin());
                }};
  const std::vector<Complex> start = sys.state;
  Integrator integ;
  for (auto _ : state) {
    sys.state = start;
    benchmark::DoNotOptimize(integ.step(std::vector<OdeSystem*>{&sys}, 0.0, 1e-3));
  }
}
BENCHMARK(BM_Dp45Step)->RangeMultiplier(4)->Range(64, 1024);

static void BM_RefineToExhaustion(benchmark::State& state) {
  ExperimentConfig c;
  c.n_start = 32;
  c.n_final = static_cast<int>(state.range(0));
  c.t_end = 1.1;
  c.record_stride = 1 << 20;
  for (auto _ : state) benchmark::DoNotOptimize(run_refine(c).exhaustion_time);
}
BENCHMARK(BM_RefineToExhaustion)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
