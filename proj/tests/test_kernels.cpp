#include <doctest.h>

#include "fracspace/kernels.hpp"
#include "fracspace/linalg.hpp"

#include <omp.h>

#include <cmath>
#include <vector>

using namespace fracspace;

namespace {

struct ThreadGuard {
  int saved = omp_get_max_threads();
  explicit ThreadGuard(int n) { omp_set_num_threads(n); }
  ~ThreadGuard() { omp_set_num_threads(saved); }
};

std::vector<double> data(std::size_t n, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
  ThreadGuard g(4);
  const auto lam = data(300, 1, 1.0, 1e5);
  const auto csq = data(300, 2, 0.0, 1.0);
  const auto tau = data(1001, 3, -15.0, 10.0);

  std::vector<double> a(tau.size()), b(tau.size());
  kernels::interp_integrand(lam, csq, 0.37, tau, a, Execution::serial);
  kernels::interp_integrand(lam, csq, 0.37, tau, b, Execution::parallel);
  CHECK(a == b);

  std::vector<double> t(tau.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(tau[i]);
  kernels::k_squared(lam, csq, t, a, Execution::serial);
  kernels::k_squared(lam, csq, t, b, Execution::parallel);
  CHECK(a == b);

  const auto terms = data(1 << 12, 4, 0.0, 1.0);
  const std::vector<std::size_t> counts = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::vector<double> s(counts.size()), p(counts.size());
  kernels::ladder_partial_sums(terms, counts, s, Execution::serial);
  kernels::ladder_partial_sums(terms, counts, p, Execution::parallel);
  CHECK(s == p);
}

TEST_CASE("kernel values against direct formulas") {
  const std::vector<double> lam = {1.0, 4.0, 9.0};
  const std::vector<double> csq = {1.0, 0.25, 0.5};
  const std::vector<double> t = {0.0, 0.5, 2.0};
  std::vector<double> out(3);
  kernels::k_squared(lam, csq, t, out, Execution::serial);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double k2 = 0.0;
    for (std::size_t j = 0; j < lam.size(); ++j) {
      const double tl = t[i] * lam[j];
      k2 += tl * tl * csq[j] / (1.0 + tl * tl);
    }
    CHECK(out[i] == doctest::Approx(k2).epsilon(1e-15));
  }

  std::vector<double> tau = {-1.0, 0.0, 1.5}, f(3);
  kernels::interp_integrand(lam, csq, 0.3, tau, f, Execution::serial);
  std::vector<double> et = {std::exp(-1.0), 1.0, std::exp(1.5)}, k2(3);
  kernels::k_squared(lam, csq, et, k2, Execution::serial);
  for (std::size_t i = 0; i < 3; ++i) CHECK(f[i] == doctest::Approx(std::exp(-0.6 * tau[i]) * k2[i]).epsilon(1e-14));

  const std::vector<double> terms = {1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<std::size_t> counts = {2, 4, 8};
  std::vector<double> sums(3);
  kernels::ladder_partial_sums(terms, counts, sums, Execution::serial);
  CHECK(sums == std::vector<double>{3, 10, 36});
}

TEST_CASE("for_each_index visits every slot once") {
  ThreadGuard g(3);
  std::vector<int> hits(97, 0);
  kernels::for_each_index(hits.size(), [&](std::size_t i) { hits[i] += 1; }, Execution::parallel);
  for (int h : hits) CHECK(h == 1);
  CHECK(kernels::max_threads() >= 1);
}
