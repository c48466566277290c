#pragma once

#include "fracspace/linalg.hpp"
#include "fracspace/report.hpp"

#include <cstdint>
#include <optional>

namespace fracspace {

/// Eigen-data of a positive self-adjoint operator with compact inverse,
/// truncated to `dim()` modes. Columns of `basis()` are the eigenvectors,
/// orthonormal in the ambient inner product given by `ambient_gram()`
/// (Euclidean when absent). Eigenvalues are ascending and strictly positive.
///
/// Immutable after construction; copies share the same `id()`.
class SpectralModel {
 public:
  /// Validates positivity and orthonormality (Gram defect <= 1e-8), then
  /// stably sorts eigenvalues ascending, permuting basis columns with them.
  /// Throws NonPositiveEigenvalue, NotOrthonormal or DimensionMismatch.
  static SpectralModel build(Vector eigenvalues, Matrix basis,
                             std::optional<Matrix> ambient_gram = std::nullopt);

  /// Model with the canonical basis of R^N: coefficients are the vector.
  static SpectralModel diagonal(Vector eigenvalues);

  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& basis() const { return basis_; }
  const std::optional<Matrix>& ambient_gram() const { return gram_; }
  Eigen::Index dim() const { return eigenvalues_.size(); }
  Eigen::Index ambient_dim() const { return basis_.rows(); }
  double lambda_min() const { return eigenvalues_[0]; }
  double lambda_max() const { return eigenvalues_[dim() - 1]; }
  std::uint64_t id() const { return id_; }

  /// Same eigenvectors, eigenvalues raised to `power` (A -> A^power).
  SpectralModel with_power(double power) const;

  static constexpr double kOrthonormalTol = 1e-8;

 private:
  SpectralModel() = default;
  Vector eigenvalues_;
  Matrix basis_;
  std::optional<Matrix> gram_;
  std::uint64_t id_ = 0;
};

/// Coefficients u_j of u = sum_j u_j w_j. `model_id == 0` means the vector
/// is not bound to a particular model (e.g. read back from JSON).
struct CoeffVector {
  Vector coeffs;
  std::uint64_t model_id = 0;
};

CoeffVector make_coeffs(const SpectralModel& model, Vector coeffs);

/// u_j = <u, w_j>_ambient.
CoeffVector to_coeffs(const SpectralModel& model, const Vector& ambient_vector);
/// sum_j u_j w_j in ambient coordinates.
Vector from_coeffs(const SpectralModel& model, const CoeffVector& u);

CoeffVector apply_fractional_power(const SpectralModel& model, double alpha, const CoeffVector& u);
/// (sum_j lambda_j^{2 alpha} |u_j|^2)^{1/2}; alpha may be negative.
double frac_norm(const SpectralModel& model, double alpha, const CoeffVector& u);
double frac_inner(const SpectralModel& model, double alpha, const CoeffVector& u,
                  const CoeffVector& v);

/// Checks ||u||_{D(A^beta)} == ||A^{beta-alpha} u||_{D(A^alpha)} to
/// 1e-10 relative. Requires beta >= alpha >= 0.
VerificationReport higher_power_decomposition_check(const SpectralModel& model, double alpha,
                                                    double beta, const CoeffVector& u);

json to_json(const SpectralModel& model);
SpectralModel spectral_model_from_json(const json& j);
json to_json(const CoeffVector& u);
CoeffVector coeff_vector_from_json(const json& j);

}  // namespace fracspace
