#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>

namespace fracspace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest entry of |M - M^T|.
double asymmetry(const Matrix& m);

/// Largest entry of |Q^T G Q - I|; G defaults to the identity.
double orthonormality_defect(const Matrix& q, const std::optional<Matrix>& gram = std::nullopt);

/// Modified Gram-Schmidt with one reorthogonalization pass, in the inner
/// product <x, y> = x^T G y. Columns are processed left to right so the
/// span of the leading k columns is preserved.
Matrix gram_schmidt(const Matrix& columns, const std::optional<Matrix>& gram = std::nullopt);

/// True when an LLT factorization of the symmetric matrix succeeds.
bool is_positive_definite(const Matrix& m);

/// Deterministic uniform doubles on [lo, hi) from a 64-bit Mersenne twister.
/// The mapping from engine output to double is fixed here so that reports
/// do not depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform(double lo = 0.0, double hi = 1.0);
  Vector uniform_vector(Eigen::Index n, double lo = -1.0, double hi = 1.0);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fracspace
