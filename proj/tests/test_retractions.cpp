#include <doctest.h>

#include "fracspace/discrete_operators.hpp"
#include "fracspace/error.hpp"
#include "fracspace/retractions.hpp"

#include <cmath>

using namespace fracspace;

namespace {

// ||T||_M^2 as the top eigenvalue of the pencil (T^T M T, M)
double pencil_norm(const Matrix& t, const Matrix& m) {
  const Matrix a = t.transpose() * m * t;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), m, Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

double energy(const SobolevGrams& g, const Vector& u) { return std::sqrt(std::max(0.0, u.dot(g.stiffness * u))); }

}  // namespace

TEST_CASE("operator norm against the generalized eigenproblem and sampling") {
  Rng rng(5);
  const Eigen::Index n = 14;
  Matrix t(n, n), b(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    t.col(j) = rng.uniform_vector(n);
    b.col(j) = rng.uniform_vector(n);
  }
  const Matrix m = b * b.transpose() + Matrix::Identity(n, n);
  const double norm = operator_norm(t, m);
  CHECK(norm == doctest::Approx(pencil_norm(t, m)).epsilon(1e-10));
  // Courant-Fischer: every Rayleigh quotient is below the maximum
  for (int i = 0; i < 200; ++i) {
    const Vector f = rng.uniform_vector(n);
    const Vector tf = t * f;
    CHECK(std::sqrt(tf.dot(m * tf) / f.dot(m * f)) <= norm * (1 + 1e-12));
  }
  CHECK(operator_norm(Matrix::Identity(n, n), m) == doctest::Approx(1.0));
}

TEST_CASE("harmonic lift fixes zero-boundary data and does not increase energy") {
  for (int dim : {1, 2}) {
    const GridDomain d = GridDomain::make(dim, dim == 1 ? 30 : 8);
    const SobolevGrams g = sobolev_grams(d);
    Rng rng(100 + dim);
    const Matrix z = g.interior_basis();
    for (int i = 0; i < 20; ++i) {
      const Vector u = z * rng.uniform_vector(z.cols());
      CHECK((harmonic_lift(d, g, u) - u).cwiseAbs().maxCoeff() <= 1e-10);
    }
    for (int i = 0; i < 100; ++i) {
      const Vector u = rng.uniform_vector(d.node_count());
      const Vector w = harmonic_lift(d, g, u);
      CHECK(energy(g, w) <= energy(g, u) + 1e-10);
      for (Eigen::Index k = 0; k < u.size(); ++k) {
        const auto idx = g.interior_nodes();
        if (std::find(idx.begin(), idx.end(), k) == idx.end()) CHECK(w[k] == 0.0);
      }
      // u - w is discretely harmonic in the interior
      const Vector r = g.stiffness * (u - w);
      for (Eigen::Index k : g.interior_nodes()) CHECK(std::abs(r[k]) <= 1e-9 * (1.0 + std::abs((g.stiffness * u)[k])));
    }
    CHECK_THROWS_AS(harmonic_lift(d, g, Vector::Ones(3)), Error);
  }
}

TEST_CASE("harmonic retraction matrix") {
  const GridDomain d = GridDomain::make(2, 6);
  const SobolevGrams g = sobolev_grams(d);
  const Retraction t = harmonic_retraction(g);
  CHECK(identity_defect(t.map, t.subspace_basis) < 1e-12);
  CHECK((t.map * t.map - t.map).cwiseAbs().maxCoeff() < 1e-10);
  Rng rng(9);
  const Vector u = rng.uniform_vector(d.node_count());
  CHECK((t.apply(u) - harmonic_lift(d, g, u)).norm() < 1e-10 * u.norm());
  CHECK(t.h_bound == doctest::Approx(pencil_norm(t.map, g.g1)).epsilon(1e-8));
  CHECK(t.d_bound == doctest::Approx(pencil_norm(t.map, g.g2)).epsilon(1e-8));
  CHECK(t.constant() == std::max(t.h_bound, t.d_bound));
}

TEST_CASE("Stokes retraction") {
  const StokesSystem sys = build_stokes(GridDomain::make(2, 6));
  const SpectralModel ma = vector_laplacian_model(sys);
  const Retraction t = stokes_retraction(sys, ma);
  CHECK(identity_defect(t.map, sys.nullbasis) < 1e-10);
  // T = A_S^{-1} P A: range in ker D and T^2 = T
  CHECK((sys.divergence * t.map).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((t.map * t.map - t.map).cwiseAbs().maxCoeff() < 1e-10);
  // Galerkin: for any f, A (T f - f) is orthogonal to the kernel
  Rng rng(2);
  const Vector f = rng.uniform_vector(sys.velocity_dim());
  CHECK((sys.nullbasis.transpose() * sys.vector_laplacian * (t.apply(f) - f)).norm() < 1e-9 * (sys.vector_laplacian * f).norm());
  CHECK(t.h_bound >= 1.0 - 1e-12);
  CHECK(t.h_bound == doctest::Approx(t.d_bound).epsilon(1e-8));
  const Matrix a2 = sys.vector_laplacian * sys.vector_laplacian;
  CHECK(t.d_bound == doctest::Approx(pencil_norm(t.map, a2)).epsilon(1e-7));

  const SpectralModel small = symmetric_model(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(stokes_retraction(sys, small), Error);
}

TEST_CASE("intersection check passes and detects an understated constant") {
  const GridDomain d = GridDomain::make(2, 5);
  const SobolevGrams g = sobolev_grams(d);
  const Retraction t = harmonic_retraction(g);
  const QuadraticPair amb = QuadraticPair::build(g.g1, g.g2);
  const QuadraticPair sub = QuadraticPair::build(g.g1, g.g2, t.subspace_basis);
  Rng rng(42);
  const auto probes = subspace_probes(sub, rng, 4, 2);
  CHECK(probes.size() == 6);
  IntersectionOptions opts;
  opts.t_points = 41;
  const VerificationReport r = verify_intersection_lemma(amb, t, {0.3, 0.7}, probes, {}, opts);
  CHECK(r.cells.size() == 6 + 12);
  CHECK(r.all_pass());
  for (const auto& c : r.cells) {
    if (c.fields["kind"] == "k_functional") {
      CHECK(c.fields["min_ratio"].get<double>() >= 1.0 - 1e-9);
      CHECK(c.fields["violations"] == 0);
    }
  }

  Retraction fake = t;
  fake.h_bound = fake.d_bound = 0.5;
  CHECK_FALSE(verify_intersection_lemma(amb, fake, {}, probes, {}, opts).all_pass());

  std::vector<Vector> outside = {Vector::Ones(d.node_count())};
  try {
    verify_intersection_lemma(amb, t, {}, outside, {}, opts);
    FAIL("expected RetractionIdentityViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RetractionIdentityViolated);
  }
}
