#pragma once

#include "fracspace/discrete_operators.hpp"
#include "fracspace/k_functional.hpp"
#include "fracspace/report.hpp"

#include <string>
#include <vector>

namespace fracspace {

/// Bounded linear T on the ambient space with T|_{span Z} = identity.
/// `h_bound` is ||T|| in the H form and `d_bound` ||T|| as a map D -> D,
/// both exact operator norms of the discrete map.
struct Retraction {
  Matrix map;
  Matrix subspace_basis;
  double h_bound = 0.0;
  double d_bound = 0.0;

  /// The constant C of the intersection argument: max(h_bound, d_bound).
  double constant() const { return std::max(h_bound, d_bound); }
  Vector apply(const Vector& f) const { return map * f; }
};

/// sup_f ||T f||_M / ||f||_M for SPD M, via Cholesky M = L L^T and the
/// largest eigenvalue of (L^T T L^{-T})^T (L^T T L^{-T}).
double operator_norm(const Matrix& t, const Matrix& gram);

/// Largest ||T z - z|| / ||z|| over the columns of Z.
double identity_defect(const Matrix& t, const Matrix& z);

/// Discrete harmonic correction: w = 0 on the boundary and, at interior
/// nodes, stiffness rows satisfy (S w)_I = (S u)_I, i.e. the weak form
/// <grad w, grad phi> = <grad u, grad phi> for zero-boundary phi.
/// Throws DimensionMismatch, SolverFailure.
Vector harmonic_lift(const GridDomain& domain, const SobolevGrams& grams, const Vector& u);

/// The lift as a Retraction for the pair (g1, g2) with H0 = zero-boundary
/// grid functions.
Retraction harmonic_retraction(const SobolevGrams& grams);

/// T = Z (Z^T A Z)^{-1} Z^T A, the discrete A_S^{-1} P A. `model_a` is the
/// spectral model of A_h over the velocity unknowns; the H form is the
/// identity and the D form is A^2 (||f||_D = ||A f||).
/// Throws DimensionMismatch, SingularConstrainedOperator,
/// RetractionIdentityViolated.
Retraction stokes_retraction(const StokesSystem& sys, const SpectralModel& model_a);

struct IntersectionOptions {
  std::string lemma = "intersection";
  std::string grid;          // label copied into every record
  int t_points = 161;        // log-uniform t-grid over the quadrature window
  double inequality_tol = 1e-9;
  Execution exec = Execution::parallel;
};

/// Checks, for each probe u in span(Z) and each t on the grid,
///   K(u,t) <= K0(u,t) <= sqrt(||Tf||_H^2 + t^2 ||Tg||_D^2) <= C K(u,t)
/// where u = f + g is the optimal ambient splitting and K0 is the
/// K-functional of the subspace pair; then for each theta compares
/// ||u||_theta <= ||u||_{0,theta} <= sqrt(2) max(C, h_bound) ||u||_theta.
/// Throws RetractionIdentityViolated when T does not fix a probe.
VerificationReport verify_intersection_lemma(const QuadraticPair& pair_ambient, const Retraction& retraction,
                                             const std::vector<double>& thetas,
                                             const std::vector<Vector>& probes,
                                             const QuadratureRule& rule,
                                             const IntersectionOptions& opts = {});

/// 20 random vectors c = sum_j j^{-1.5} xi_j w_j (xi uniform on [-1,1]) and
/// the 5 lowest eigenvectors of the subspace pair, lifted to the ambient
/// space. `count_random` and `count_low` override the defaults.
std::vector<Vector> subspace_probes(const QuadraticPair& subspace_pair, Rng& rng, int count_random = 20,
                                    int count_low = 5);

}  // namespace fracspace
