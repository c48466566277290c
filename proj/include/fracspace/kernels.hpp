#pragma once

#include <cstddef>
#include <span>

namespace fracspace {

/// Serial kernels are the reference implementation; the OpenMP variants
/// must produce bit-identical output. Parallelism is only over independent
/// output slots, never inside a reduction.
enum class Execution { serial, parallel };

namespace kernels {

/// out[i] = exp(-2 theta tau[i]) * K(exp(tau[i]))^2 with
/// K(t)^2 = sum_j t^2 lambda_j^2 c_j^2 / (1 + t^2 lambda_j^2).
/// `coeff_sq` holds c_j^2.
void interp_integrand(std::span<const double> lambdas, std::span<const double> coeff_sq,
                      double theta, std::span<const double> tau, std::span<double> out,
                      Execution exec);

/// out[i] = K(t[i])^2, same closed form.
void k_squared(std::span<const double> lambdas, std::span<const double> coeff_sq,
               std::span<const double> t, std::span<double> out, Execution exec);

/// Partial sums of `terms` at each ladder index (1-based counts, ascending).
void ladder_partial_sums(std::span<const double> terms, std::span<const std::size_t> counts,
                         std::span<double> out, Execution exec);

/// Runs body(i) for i in [0, n); body must only write to slot i.
template <class Body>
void for_each_index(std::size_t n, Body&& body, Execution exec) {
  const auto count = static_cast<long long>(n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

int max_threads();

}  // namespace kernels
}  // namespace fracspace
