// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to compare.
#include "fracspace/discrete_operators.hpp"
#include "fracspace/k_functional.hpp"
#include "fracspace/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fracspace;

namespace {

Execution mode(const benchmark::State& s) { return s.range(1) ? Execution::parallel : Execution::serial; }

void BM_InterpIntegrand(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> lam(n), csq(n), tau(4097), out(4097);
  for (std::size_t j = 0; j < n; ++j) {
    lam[j] = std::pow((j + 1) * std::numbers::pi, 2);
    csq[j] = std::pow(j + 1.0, -3.0);
  }
  for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = -20.0 + 30.0 * i / (tau.size() - 1);
  for (auto _ : state) {
    kernels::interp_integrand(lam, csq, 0.3, tau, out, mode(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * tau.size()));
}

void BM_LadderSums(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) terms[j] = 1.0 / (j + 1.0);
  std::vector<std::size_t> counts;
  for (std::size_t c = 16; c <= n; c *= 2) counts.push_back(c);
  std::vector<double> out(counts.size());
  for (auto _ : state) {
    kernels::ladder_partial_sums(terms, counts, out, mode(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_InterpNorm(benchmark::State& state) {
  const SpectralModel m = laplacian_1d_analytic(static_cast<int>(state.range(0)));
  Vector c(m.dim());
  for (Eigen::Index j = 0; j < m.dim(); ++j) c[j] = std::pow(j + 1.0, -1.5);
  const CoeffVector u = make_coeffs(m, c);
  for (auto _ : state) benchmark::DoNotOptimize(interp_norm(m, 0.3, u, {}, mode(state)).value);
}

}  // namespace

BENCHMARK(BM_InterpIntegrand)->ArgsProduct({{256, 2048}, {0, 1}});
BENCHMARK(BM_LadderSums)->ArgsProduct({{1 << 14, 1 << 20}, {0, 1}});
BENCHMARK(BM_InterpNorm)->ArgsProduct({{256}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
