#include "fracspace/retractions.hpp"

#include "fracspace/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracspace {

double operator_norm(const Matrix& t, const Matrix& gram) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "norm Gram is not SPD");
  const Matrix l = llt.matrixL();
  // B = L^T T L^{-T}
  const Matrix lt_t = l.transpose() * t;
  const Matrix b = llt.matrixU().transpose().solve(lt_t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.transpose() * b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFailure, "operator norm eigensolve failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double identity_defect(const Matrix& t, const Matrix& z) {
  const Matrix diff = t * z - z;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    worst = std::max(worst, diff.col(j).norm() / std::max(z.col(j).norm(), 1e-300));
  return worst;
}

// ------------------------------------------------------------ harmonic lift

namespace {

struct InteriorSolver {
  std::vector<Eigen::Index> interior;
  Eigen::LLT<Matrix> llt;
};

InteriorSolver interior_solver(const SobolevGrams& grams) {
  InteriorSolver s;
  s.interior = grams.interior_nodes();
  const auto ni = static_cast<Eigen::Index>(s.interior.size());
  Matrix sii(ni, ni);
  for (Eigen::Index a = 0; a < ni; ++a)
    for (Eigen::Index b = 0; b < ni; ++b) sii(a, b) = grams.stiffness(s.interior[a], s.interior[b]);
  s.llt.compute(sii);
  if (s.llt.info() != Eigen::Success)
    throw Error(ErrorCode::SolverFailure, "interior stiffness block is not SPD");
  return s;
}

}  // namespace

Vector harmonic_lift(const GridDomain& domain, const SobolevGrams& grams, const Vector& u) {
  if (u.size() != domain.node_count() || grams.g0.rows() != domain.node_count())
    throw Error(ErrorCode::DimensionMismatch, "grid function does not match the domain");
  const InteriorSolver s = interior_solver(grams);
  const Vector su = grams.stiffness * u;
  const auto ni = static_cast<Eigen::Index>(s.interior.size());
  Vector rhs(ni);
  for (Eigen::Index a = 0; a < ni; ++a) rhs[a] = su[s.interior[a]];
  const Vector wi = s.llt.solve(rhs);
  Vector w = Vector::Zero(u.size());
  for (Eigen::Index a = 0; a < ni; ++a) w[s.interior[a]] = wi[a];
  return w;
}

Retraction harmonic_retraction(const SobolevGrams& grams) {
  const InteriorSolver s = interior_solver(grams);
  const Eigen::Index nodes = grams.g0.rows();
  const auto ni = static_cast<Eigen::Index>(s.interior.size());
  Matrix s_rows(ni, nodes);
  for (Eigen::Index a = 0; a < ni; ++a) s_rows.row(a) = grams.stiffness.row(s.interior[a]);
  const Matrix wi = s.llt.solve(s_rows);
  Retraction r;
  r.map = Matrix::Zero(nodes, nodes);
  for (Eigen::Index a = 0; a < ni; ++a) r.map.row(s.interior[a]) = wi.row(a);
  r.subspace_basis = grams.interior_basis();
  const double defect = identity_defect(r.map, r.subspace_basis);
  if (defect > 1e-10)
    throw Error(ErrorCode::RetractionIdentityViolated, "harmonic lift moves a zero-boundary vector by " +
                                                           std::to_string(defect));
  r.h_bound = operator_norm(r.map, grams.g1);
  r.d_bound = operator_norm(r.map, grams.g2);
  return r;
}

// ------------------------------------------------------------ Stokes

Retraction stokes_retraction(const StokesSystem& sys, const SpectralModel& model_a) {
  if (model_a.ambient_dim() != sys.velocity_dim() || model_a.dim() != sys.velocity_dim())
    throw Error(ErrorCode::DimensionMismatch, "vector Laplacian model does not match the Stokes layout");
  const Matrix& z = sys.nullbasis;
  Eigen::LLT<Matrix> llt(sys.constrained_op);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularConstrainedOperator, "Z^T A Z is not positive definite");

  const Matrix& v = model_a.basis();
  const Vector& lam = model_a.eigenvalues();
  const Matrix a = v * lam.asDiagonal() * v.transpose();
  const Matrix a2 = v * lam.array().square().matrix().asDiagonal() * v.transpose();

  Retraction r;
  r.map = z * llt.solve(z.transpose() * a);
  r.subspace_basis = z;
  const double defect = identity_defect(r.map, z);
  if (defect > 1e-10)
    throw Error(ErrorCode::RetractionIdentityViolated, "Stokes retraction moves a kernel vector by " +
                                                           std::to_string(defect));
  r.h_bound = operator_norm(r.map, Matrix::Identity(z.rows(), z.rows()));
  r.d_bound = operator_norm(r.map, 0.5 * (a2 + a2.transpose()));
  return r;
}

// ------------------------------------------------------------ probes

std::vector<Vector> subspace_probes(const QuadraticPair& subspace_pair, Rng& rng, int count_random,
                                    int count_low) {
  const SpectralModel model = pair_operator_model(subspace_pair);
  std::vector<Vector> probes;
  const Eigen::Index n = model.dim();
  for (int p = 0; p < count_random; ++p) {
    Vector c(n);
    for (Eigen::Index j = 0; j < n; ++j) c[j] = std::pow(static_cast<double>(j + 1), -1.5) * rng.uniform(-1.0, 1.0);
    probes.push_back(subspace_pair.lift(model.basis() * c));
  }
  for (int p = 0; p < count_low && p < n; ++p) probes.push_back(subspace_pair.lift(model.basis().col(p)));
  return probes;
}

// ------------------------------------------------------------ intersection lemma

VerificationReport verify_intersection_lemma(const QuadraticPair& pair_ambient, const Retraction& retraction,
                                             const std::vector<double>& thetas,
                                             const std::vector<Vector>& probes,
                                             const QuadratureRule& rule,
                                             const IntersectionOptions& opts) {
  if (pair_ambient.subspace_basis())
    throw Error(ErrorCode::InvalidConfig, "ambient pair must not carry a subspace restriction");
  const Matrix& z = retraction.subspace_basis;
  const QuadraticPair sub = QuadraticPair::build(pair_ambient.m1(), pair_ambient.m2(), z);
  const SpectralModel amb_model = pair_operator_model(pair_ambient);
  const SpectralModel sub_model = pair_operator_model(sub);

  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Vector tu = retraction.apply(probes[p]);
    const double rel = (tu - probes[p]).norm() / std::max(probes[p].norm(), 1e-300);
    if (rel > 1e-10)
      throw Error(ErrorCode::RetractionIdentityViolated,
                  "probe " + std::to_string(p) + " moved by " + std::to_string(rel));
  }

  const double c_const = retraction.constant();
  const double bound = std::sqrt(2.0) * c_const;
  const double lo = rule.log_t_min.value_or(std::log(1e-4 / amb_model.lambda_max()));
  const double hi = rule.log_t_max.value_or(std::log(1e4 / amb_model.lambda_min()));
  std::vector<double> ts(static_cast<std::size_t>(opts.t_points));
  for (int i = 0; i < opts.t_points; ++i)
    ts[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / std::max(1, opts.t_points - 1));

  struct ProbeResult {
    double min_ratio = INFINITY, max_ratio = 0.0, max_mech = 0.0;
    long violations = 0;
  };
  std::vector<ProbeResult> results(probes.size());
  const double eps = opts.inequality_tol;

  kernels::for_each_index(
      probes.size(),
      [&](std::size_t p) {
        const Vector& u = probes[p];
        const CoeffVector ua = to_coeffs(amb_model, u);
        const CoeffVector us = to_coeffs(sub_model, sub.reduce(u));
        ProbeResult& res = results[p];
        for (double t : ts) {
          const Decomposition d = optimal_decomposition(amb_model, ua, t);
          const double k = d.k;
          const double k0 = k_spectral(sub_model, us, t);
          const Vector tf = retraction.apply(d.x);
          const Vector tg = retraction.apply(d.y);
          const double mech = std::sqrt(pair_ambient.x_norm(tf) * pair_ambient.x_norm(tf) +
                                        t * t * pair_ambient.y_norm(tg) * pair_ambient.y_norm(tg));
          if (k == 0.0) continue;
          const double ratio = k0 / k;
          res.min_ratio = std::min(res.min_ratio, ratio);
          res.max_ratio = std::max(res.max_ratio, ratio);
          res.max_mech = std::max(res.max_mech, mech / k);
          const bool ok = k <= k0 * (1.0 + eps) && k0 <= mech * (1.0 + eps) &&
                          mech <= c_const * k * (1.0 + eps) && k0 <= bound * k * (1.0 + eps);
          if (!ok) ++res.violations;
        }
      },
      opts.exec);

  VerificationReport report;
  report.experiment = opts.lemma;
  report.parameters = {{"grid", opts.grid},
                       {"t_points", opts.t_points},
                       {"log_t_min", lo},
                       {"log_t_max", hi},
                       {"C", c_const},
                       {"h_bound", retraction.h_bound},
                       {"d_bound", retraction.d_bound}};
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& r = results[p];
    report.add_cell({{"lemma", opts.lemma},
                     {"grid", opts.grid},
                     {"kind", "k_functional"},
                     {"probe", p},
                     {"theta", nullptr},
                     {"ratio", r.max_ratio},
                     {"min_ratio", r.min_ratio},
                     {"max_mechanism_over_k", r.max_mech},
                     {"C", c_const},
                     {"bound", bound},
                     {"violations", r.violations}},
                    eps, r.violations == 0 && r.min_ratio >= 1.0 - eps && r.max_ratio <= bound * (1.0 + eps));
  }

  const double c_prime = std::sqrt(2.0) * std::max(c_const, retraction.h_bound);
  for (double theta : thetas) {
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double amb = interp_norm(amb_model, theta, to_coeffs(amb_model, probes[p]), rule, opts.exec).value;
      const double s = interp_norm(sub_model, theta, to_coeffs(sub_model, sub.reduce(probes[p])), rule, opts.exec).value;
      const double ratio = s / amb;
      const double tol = 10.0 * rule.refinement_tol;
      report.add_cell({{"lemma", opts.lemma},
                       {"grid", opts.grid},
                       {"kind", "interp_norm"},
                       {"probe", p},
                       {"theta", theta},
                       {"ratio", ratio},
                       {"ambient_norm", amb},
                       {"subspace_norm", s},
                       {"C", c_const},
                       {"bound", c_prime}},
                      tol, ratio >= 1.0 - tol && ratio <= c_prime * (1.0 + tol));
    }
  }
  return report;
}

}  // namespace fracspace
