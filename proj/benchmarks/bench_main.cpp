// Microbenchmarks for the hot paths: kernel table assembly, kernel
// evaluation, descent iterations, the dispersion multiplier, and the
// spectral quadratic form.

#include <benchmark/benchmark.h>

#include <vector>

#include "nlphase/energy.hpp"
#include "nlphase/kernels.hpp"
#include "nlphase/minimize.hpp"
#include "nlphase/model.hpp"
#include "nlphase/spectral.hpp"

using namespace nlphase;

namespace {

void BM_Kernel1DBuild(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain dom = Domain::interval(-1.0, 1.0, cells);
  for (auto _ : state) {
    Kernel1D k(dom, 0.25, 8.0);
    benchmark::DoNotOptimize(k.w(1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Kernel1DBuild)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void BM_Kernel2DBuild(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain dom = Domain::box2(-1.0, 1.0, cells, -1.0, 1.0, cells);
  for (auto _ : state) {
    Kernel2D k(dom, 0.25, 8.0, /*with_exterior=*/true);
    benchmark::DoNotOptimize(k.w(1, 0));
  }
}
BENCHMARK(BM_Kernel2DBuild)->Arg(32)->Arg(64);

void BM_KernelEval1D(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain dom = Domain::interval(-1.0, 1.0, cells);
  const Kernel1D k(dom, 0.25, 8.0);
  const ScalarField u = voxelize(GeometricSet::half_line(0.0, +1), dom);
  const Kernel1D::ExteriorData ext = k.materialize(u);
  for (auto _ : state) {
    const double e = k.K_int(u.v.data()) + k.K_ext(u.v.data(), ext);
    benchmark::DoNotOptimize(e);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KernelEval1D)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void BM_KernelGradient1D(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain dom = Domain::interval(-1.0, 1.0, cells);
  const Kernel1D k(dom, 0.25, 8.0);
  const ScalarField u = voxelize(GeometricSet::half_line(0.0, +1), dom);
  const Kernel1D::ExteriorData ext = k.materialize(u);
  std::vector<double> g(u.v.size());
  for (auto _ : state) {
    std::fill(g.begin(), g.end(), 0.0);
    k.add_grad_K_int(u.v.data(), 1.0, g.data());
    k.add_grad_K_ext(u.v.data(), ext, 1.0, g.data());
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_KernelGradient1D)->Arg(1024);

void BM_FracPerimeter2D(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain omega = Domain::box2(-2.0, 2.0, cells, -2.0, 2.0, cells);
  const GeometricSet E = GeometricSet::box({-1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frac_perimeter(E, omega, 0.25, KernelPart::Interior));
  }
}
BENCHMARK(BM_FracPerimeter2D)->Arg(32)->Arg(64);

void BM_DescentIterations(benchmark::State& state) {
  const Domain dom = Domain::interval(-1.0, 1.0, 1024);
  const GeometricSet E = GeometricSet::half_line(0.0, +1);
  EnergySpec spec;
  spec.tag = EnergyTag::MM;
  spec.eps = 0.05;
  const ScalarField seed = make_seed(SeedKind::Linear, E, dom);
  MinimizeOptions opt;
  opt.max_iters = 25;
  opt.grad_tol = 0.0;  // run the full iteration budget
  for (auto _ : state) {
    const MinimizeResult res = minimize_energy(spec, seed, opt);
    benchmark::DoNotOptimize(res.final_energy);
  }
}
BENCHMARK(BM_DescentIterations);

void BM_MultiplierS(benchmark::State& state) {
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 1; i <= 1000; ++i) acc += multiplier_S(0.75, 0.05 * i);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_MultiplierS);

void BM_SpectralEnergy(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const Domain dom = Domain::interval(0.0, 1.0, cells);
  ScalarField u = ScalarField::constant(dom, 0.0, ValueRange::ZeroOne);
  for (int i = 0; i < cells; ++i)
    u.v[static_cast<size_t>(i)] = (i % 7) / 7.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_energy(u, 0.1, 0.25, /*rescaled=*/false));
  }
}
BENCHMARK(BM_SpectralEnergy)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
