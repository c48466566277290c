#pragma once

#include "fracspace/linalg.hpp"
#include "fracspace/spectral_core.hpp"

#include <iosfwd>
#include <vector>

namespace fracspace {

/// Unit interval (dimension 1) or unit square (dimension 2) with n interior
/// grid points per axis and mesh width h = 1 / (n + 1).
struct GridDomain {
  int dimension = 1;
  int n = 2;
  double h = 1.0 / 3.0;

  static constexpr int kMax1d = 2048;
  static constexpr int kMax2d = 32;

  /// Throws InvalidGrid for dimension not in {1, 2}, n < 2, or n above the cap.
  static GridDomain make(int dimension, int n);

  /// Interior unknowns (n^d).
  Eigen::Index interior_count() const;
  /// Nodes including the boundary ((n + 2)^d).
  Eigen::Index node_count() const;
};

/// -u'' on (0,1), u(0) = u(1) = 0: eigenvalues (k pi)^2 with eigenfunctions
/// sqrt(2) sin(k pi x) sampled at x_i = i / M, i = 0..M (boundary included),
/// ambient Gram = trapezoid mass matrix, re-orthonormalized by Gram-Schmidt.
/// `grid_intervals` defaults to max(16, 4 n_modes) and must exceed n_modes.
SpectralModel laplacian_1d_analytic(int n_modes, int grid_intervals = 0);

/// Dirichlet stencil matrix on interior nodes: 3-point (1D) or 5-point (2D),
/// scaled by 1/h^2.
Matrix laplacian_fd_matrix(const GridDomain& domain);

/// Dense eigendecomposition of `laplacian_fd_matrix`. The ambient Gram is
/// the discrete L^2 form h^d I, basis columns scaled to be orthonormal in it.
SpectralModel laplacian_fd(const GridDomain& domain);

/// Discrete Sobolev forms on all grid nodes (boundary included).
///   g0: trapezoid mass
///   g1: g0 + stiffness, stiffness = sum over grid edges of h^d |du/h|^2
///   g2: g1 + h^d sum over interior nodes of |D_xx u|^2 (+ |D_yy u|^2)
///       (+ 2 h^2 sum over cells of |D_xy u|^2 in 2D)
struct SobolevGrams {
  GridDomain domain;
  Matrix g0;
  Matrix stiffness;
  Matrix g1;
  Matrix g2;
  bool boundary_values_included = true;

  /// Node indices (row-major, x fastest) of interior nodes, ascending.
  std::vector<Eigen::Index> interior_nodes() const;
  /// Coordinate columns of the interior nodes: orthonormal basis of the
  /// zero-boundary subspace.
  Matrix interior_basis() const;
};

SobolevGrams sobolev_grams(const GridDomain& domain);

/// MAC discretization of the Dirichlet Stokes problem on the unit square
/// with m = n + 1 cells per axis. Velocity unknowns are the interior faces:
/// u at (i h, (j + 1/2) h), i = 1..m-1, j = 0..m-1, then v at
/// ((i + 1/2) h, j h), i = 0..m-1, j = 1..m-1; both x-fastest. Tangential
/// wall values use the reflected ghost (u_ghost = -u).
struct StokesSystem {
  GridDomain domain;
  Matrix vector_laplacian;  // A_h, SPD
  Matrix divergence;        // D_h, m^2 x velocity_dim
  Matrix nullbasis;         // Z, orthonormal, D_h Z = 0
  Matrix projector;         // P_h = Z Z^T
  Matrix constrained_op;    // Z^T A_h Z
  Eigen::Index divergence_rank = 0;

  Eigen::Index cells_per_axis() const { return domain.n + 1; }
  Eigen::Index velocity_dim() const { return vector_laplacian.rows(); }
  Eigen::Index pressure_dim() const { return divergence.rows(); }
  Eigen::Index nullspace_dim() const { return nullbasis.cols(); }
};

/// Assembles the system, extracts ker D_h by a column-pivoted Householder
/// QR of D_h^T (pivots below 1e-10 of the largest treated as zero) and
/// verifies the projector and constrained-operator invariants.
/// Throws InvalidGrid, EmptyNullspace, FactorizationFailure.
StokesSystem build_stokes(const GridDomain& domain);

/// Eigendecomposition of Z^T A_h Z over Z-coordinates (identity Gram).
SpectralModel stokes_spectral_model(const StokesSystem& sys);
/// Eigendecomposition of A_h over the velocity unknowns (identity Gram).
SpectralModel vector_laplacian_model(const StokesSystem& sys);

/// Symmetric eigendecomposition helper shared by the builders. Throws
/// EigensolveFailure.
SpectralModel symmetric_model(const Matrix& op);

void write_matrix_csv(std::ostream& out, const Matrix& m);
json matrix_to_json(const Matrix& m);

}  // namespace fracspace
