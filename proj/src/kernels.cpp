#include "fracspace/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracspace::kernels {

namespace {

// Fixed summation order over modes so serial and parallel agree bitwise.
inline double k_sq_at(std::span<const double> lambdas, std::span<const double> coeff_sq, double t) {
  double s = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double x = t * lambdas[j];
    const double x2 = x * x;
    s += coeff_sq[j] * (x2 / (1.0 + x2));
  }
  return s;
}

}  // namespace

void interp_integrand(std::span<const double> lambdas, std::span<const double> coeff_sq,
                      double theta, std::span<const double> tau, std::span<double> out,
                      Execution exec) {
  const auto n = static_cast<long long>(tau.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
      out[i] = std::exp(-2.0 * theta * tau[i]) * k_sq_at(lambdas, coeff_sq, std::exp(tau[i]));
  } else {
    for (long long i = 0; i < n; ++i)
      out[i] = std::exp(-2.0 * theta * tau[i]) * k_sq_at(lambdas, coeff_sq, std::exp(tau[i]));
  }
}

void k_squared(std::span<const double> lambdas, std::span<const double> coeff_sq,
               std::span<const double> t, std::span<double> out, Execution exec) {
  const auto n = static_cast<long long>(t.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[i] = k_sq_at(lambdas, coeff_sq, t[i]);
  } else {
    for (long long i = 0; i < n; ++i) out[i] = k_sq_at(lambdas, coeff_sq, t[i]);
  }
}

void ladder_partial_sums(std::span<const double> terms, std::span<const std::size_t> counts,
                         std::span<double> out, Execution exec) {
  // Each rung sums its own prefix from scratch: O(sum counts) work, but
  // every rung is independent and uses the same left-to-right order.
  const auto n = static_cast<long long>(counts.size());
  auto rung = [&](long long i) {
    double s = 0.0;
    const std::size_t m = counts[i] < terms.size() ? counts[i] : terms.size();
    for (std::size_t j = 0; j < m; ++j) s += terms[j];
    out[i] = s;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) rung(i);
  } else {
    for (long long i = 0; i < n; ++i) rung(i);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fracspace::kernels
