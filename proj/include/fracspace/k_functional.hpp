#pragma once

#include "fracspace/kernels.hpp"
#include "fracspace/linalg.hpp"
#include "fracspace/spectral_core.hpp"

#include <functional>
#include <optional>

namespace fracspace {

/// Norm pair (X, Y) given by SPD Gram forms: ||x||_X^2 = x^T m1 x and
/// ||y||_Y^2 = y^T m2 y. With a subspace basis Z (orthonormal columns) the
/// admissible decompositions are restricted to span(Z) and all work happens
/// in Z-coordinates with the reduced forms Z^T m_i Z.
class QuadraticPair {
 public:
  /// Throws DimensionMismatch, SingularSystem (not symmetric to 1e-12 or
  /// factorization fails), NotOrthonormal (subspace basis).
  static QuadraticPair build(Matrix m1, Matrix m2, std::optional<Matrix> subspace_basis = std::nullopt);

  const Matrix& m1() const { return m1_; }
  const Matrix& m2() const { return m2_; }
  const std::optional<Matrix>& subspace_basis() const { return basis_; }
  const Matrix& reduced_m1() const { return basis_ ? rm1_ : m1_; }
  const Matrix& reduced_m2() const { return basis_ ? rm2_ : m2_; }
  Eigen::Index ambient_dim() const { return m1_.rows(); }
  Eigen::Index reduced_dim() const { return reduced_m1().rows(); }

  /// Z-coordinates of u (identity without a subspace). Throws
  /// NotInSubspace when ||u - Z Z^T u|| > 1e-8 max(1, ||u||).
  Vector reduce(const Vector& u) const;
  Vector lift(const Vector& c) const;

  double x_norm(const Vector& u) const { return std::sqrt(std::max(0.0, u.dot(m1_ * u))); }
  double y_norm(const Vector& u) const { return std::sqrt(std::max(0.0, u.dot(m2_ * u))); }

 private:
  QuadraticPair() = default;
  Matrix m1_, m2_;
  std::optional<Matrix> basis_;
  Matrix rm1_, rm2_;
};

/// Discretization of L^2(0, inf; dt/t) in tau = ln t. Unset window ends
/// default to ln(1e-4 / lambda_max) and ln(1e4 / lambda_min) of the
/// operator at hand; with `extend_window` the window is widened until the
/// analytic tail bounds fall below refinement_tol of the integral.
struct QuadratureRule {
  std::optional<double> log_t_min;
  std::optional<double> log_t_max;
  double refinement_tol = 1e-6;
  long max_panels = 1L << 20;
  bool extend_window = true;

  /// Throws InvalidConfig on a violated invariant.
  void validate() const;
};

struct InterpNormResult {
  double value = 0.0;          // ||u||_theta
  double value_squared = 0.0;
  long panels = 0;
  double log_t_min = 0.0;
  double log_t_max = 0.0;
  double tail_bound = 0.0;     // analytic bound on the omitted integral (squared units)
  bool window_extended = false;
};

/// Optimal splitting u = x + y for K(u, t), ambient coordinates.
struct Decomposition {
  Vector x;
  Vector y;
  double k = 0.0;
};

struct BruteOptions {
  int grid_points = 65;            // <= 1 means the degenerate grid {0}
  int max_iterations = 500000;
  double gradient_tol = 1e-13;     // relative to ||(M1 + t^2 M2) y|| + ||M1 u||
};

/// Closed form (sum_j t^2 lambda_j^2 |u_j|^2 / (1 + t^2 lambda_j^2))^{1/2}.
double k_spectral(const SpectralModel& model, const CoeffVector& u, double t);
Decomposition optimal_decomposition(const SpectralModel& model, const CoeffVector& u, double t);

/// K(u,t)^2 = u^T M1 u - (M1 u)^T (M1 + t^2 M2)^{-1} (M1 u), one Cholesky
/// factorization per call.
double k_quadratic(const QuadraticPair& pair, const Vector& u, double t);
Decomposition optimal_decomposition(const QuadraticPair& pair, const Vector& u, double t);

/// Test oracles: minimize the decomposition objective directly, without
/// the closed form. The spectral version does a per-mode grid search with
/// golden-section refinement; the pair version runs conjugate directions
/// with exact line search from the best point of the grid {s u : s in [0,1]}.
double k_brute(const SpectralModel& model, const CoeffVector& u, double t,
               const BruteOptions& opts = {});
double k_brute(const QuadraticPair& pair, const Vector& u, double t, const BruteOptions& opts = {});

/// inf_{x+y=u} ||x||_X + t ||y||_Y by brute force, using
/// (a + t b)^2 = min_{c in (0,1)} a^2/c + t^2 b^2/(1-c): a convex scan in c
/// whose inner problem is solved by `k_brute`.
double k_sum_brute(const SpectralModel& model, const CoeffVector& u, double t);
double k_sum_brute(const QuadraticPair& pair, const Vector& u, double t);

/// The operator L with ||y||_Y = ||L y||_X on the (reduced) pair, as a
/// spectral model over reduced coordinates with ambient Gram reduced_m1:
/// eigenvalues are sqrt(mu) for the generalized problem M2 v = mu M1 v.
/// K for the pair equals k_spectral on this model.
SpectralModel pair_operator_model(const QuadraticPair& pair);

/// (int_0^inf t^{-2 theta} K(u,t)^2 dt/t)^{1/2} by composite Simpson in
/// tau = ln t, doubling panels until the relative change is below
/// refinement_tol. Throws ThetaOutOfRange, QuadratureNotConverged.
InterpNormResult interp_norm(const SpectralModel& model, double theta, const CoeffVector& u,
                             const QuadratureRule& rule = {}, Execution exec = Execution::parallel);
/// Pair version; u in ambient coordinates (must lie in the subspace).
InterpNormResult interp_norm(const QuadraticPair& pair, double theta, const Vector& u,
                             const QuadratureRule& rule = {}, Execution exec = Execution::parallel);

/// Same quadrature for an arbitrary K^2 evaluator. `x_norm_sq` and
/// `y_norm_sq` feed the tail bounds K^2 <= ||u||_X^2 and K^2 <= t^2 ||u||_Y^2;
/// `default_window` is used for unset rule ends. `k_squared` must be
/// safe to call concurrently.
InterpNormResult interp_norm_generic(double theta, const std::function<double(double)>& k_squared,
                                     double x_norm_sq, double y_norm_sq,
                                     std::pair<double, double> default_window,
                                     const QuadratureRule& rule = {},
                                     Execution exec = Execution::parallel);

/// pi / (2 sin(pi theta)), theta in (0, 1).
double i_theta(double theta);
/// int_0^inf s^{1-2 theta} / (1 + s^2) ds by the trapezoid rule in ln s
/// (exponentially convergent for this integrand), tails bounded below 1e-17.
double i_theta_numeric(double theta);

}  // namespace fracspace
