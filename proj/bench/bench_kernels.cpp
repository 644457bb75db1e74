// Serial reference vs OpenMP kernels. Arg 0 selects Exec::serial, 1 Exec::parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "wlsq/certify.hpp"
#include "wlsq/christoffel.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/sampler.hpp"

using namespace wlsq;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

// The torus Christoffel function is constant, so only Legendre exercises the grid loop.
void BM_christoffel_sup(benchmark::State& state) {
  const auto model = SpectralModel::legendre(2.0);
  const auto grid = GridSpec::uniform(model, 1 << 16);
  for (auto _ : state) benchmark::DoNotOptimize(christoffel_sup(model, 200, grid, exec_of(state)));
}
BENCHMARK(BM_christoffel_sup)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_certify_sup(benchmark::State& state) {
  const auto model = SpectralModel::trigonometric(WeightModel::sharp(2.0, 1));
  const std::size_t m = 24;
  const std::size_t n = 4096;
  const auto nodes = draw_nodes(model, m, n, DensityVariant::none, 1);
  const FactoredOperator op(fit(assemble(model, nodes, m, false), std::vector<cplx>(n, 0.0)));
  const auto grid = GridSpec::uniform(model, 4096);
  const double eps = kernel_eps(model, m, default_kernel_rel_eps(model));
  CertifyOptions options;
  options.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(certify_sup(op, model, grid, eps, options).sup_value);
}
BENCHMARK(BM_certify_sup)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_legendre_certify_sup(benchmark::State& state) {
  const auto model = SpectralModel::legendre(2.0);
  const std::size_t m = 32;
  const std::size_t n = 6000;
  const auto nodes = draw_nodes(model, m, n, DensityVariant::krieg_ullrich, 2);
  const FactoredOperator op(fit(assemble(model, nodes, m, true), std::vector<cplx>(n, 0.0)));
  const auto grid = GridSpec::defaults(model);
  const double eps = kernel_eps(model, m, default_kernel_rel_eps(model));
  CertifyOptions options;
  options.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(certify_sup(op, model, grid, eps, options).sup_value);
}
BENCHMARK(BM_legendre_certify_sup)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
