#include "fracspace/experiments.hpp"

#include "fracspace/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fracspace {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

double drift(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

}  // namespace

std::vector<CoeffVector> decaying_probes(const SpectralModel& model, Rng& rng, int count) {
  std::vector<CoeffVector> probes;
  for (int p = 0; p < count; ++p) {
    Vector c(model.dim());
    for (Eigen::Index j = 0; j < model.dim(); ++j)
      c[j] = std::pow(static_cast<double>(j + 1), -1.5) * rng.uniform(-1.0, 1.0);
    probes.push_back(make_coeffs(model, std::move(c)));
  }
  return probes;
}

// ------------------------------------------------------------ Lemma: (H, D(A))_theta

VerificationReport lemma_fps_sweep(const SpectralModel& model, const std::vector<double>& thetas,
                                   const std::vector<CoeffVector>& probes, const QuadratureRule& rule,
                                   Execution exec) {
  VerificationReport r;
  r.experiment = "lemma41";
  r.parameters = {{"modes", model.dim()}, {"thetas", thetas}, {"probes", probes.size()}};
  constexpr double tol = 1e-3;
  for (double theta : thetas) {
    const double it = i_theta(theta);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const InterpNormResult in = interp_norm(model, theta, probes[p], rule, exec);
      const double fn = frac_norm(model, theta, probes[p]);
      const double ratio = in.value_squared / (it * fn * fn);
      r.add_cell({{"theta", theta},
                  {"probe", p},
                  {"interp_norm_sq", in.value_squared},
                  {"frac_norm_sq", fn * fn},
                  {"i_theta", it},
                  {"ratio", ratio},
                  {"panels", in.panels},
                  {"tail_bound", in.tail_bound}},
                 tol, std::abs(ratio - 1.0) <= tol);
    }
  }
  return r;
}

// ------------------------------------------------------------ reiteration

VerificationReport reiteration_check(const SpectralModel& model, const std::vector<double>& thetas,
                                     const std::vector<CoeffVector>& probes, const QuadratureRule& rule,
                                     Execution exec) {
  VerificationReport r;
  r.experiment = "reiteration";
  r.parameters = {{"modes", model.dim()}, {"thetas", thetas}, {"probes", probes.size()}};
  const SpectralModel half = model.with_power(0.5);
  constexpr double interp_tol = 1e-3;
  constexpr double set_tol = 1e-12;
  for (double theta : thetas) {
    if (theta < 0.0 || theta > 1.0)
      throw Error(ErrorCode::ThetaOutOfRange, "reiteration theta = " + std::to_string(theta));
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const CoeffVector& u = probes[p];
      const CoeffVector root_u = apply_fractional_power(model, 0.5, u);
      const CoeffVector uh{u.coeffs, half.id()};
      const CoeffVector root_uh{root_u.coeffs, half.id()};

      // D(A^{(1+theta)/2}) = {u : A^{1/2} u in D(A^{theta/2})}
      const double lhs = frac_norm(model, 0.5 * (1.0 + theta), u);
      const double rhs = frac_norm(model, 0.5 * theta, root_u);
      const double rel = std::abs(lhs - rhs) / std::max(lhs, 1e-300);
      r.add_cell({{"identity", "set"}, {"theta", theta}, {"probe", p}, {"lhs", lhs}, {"rhs", rhs}, {"rel_diff", rel}},
                 set_tol, rel <= set_tol);
      if (theta <= 0.0 || theta >= 1.0) continue;

      const double it = i_theta(theta);
      // (H, D(A^{1/2}))_theta = D(A^{theta/2})
      const double first = interp_norm(half, theta, uh, rule, exec).value_squared;
      const double fn1 = frac_norm(model, 0.5 * theta, u);
      const double ratio1 = first / (it * fn1 * fn1);
      r.add_cell({{"identity", "first"}, {"theta", theta}, {"probe", p}, {"ratio", ratio1}}, interp_tol,
                 std::abs(ratio1 - 1.0) <= interp_tol);
      // (D(A^{1/2}), D(A))_theta = D(A^{(1+theta)/2}); base space D(A^{1/2})
      // is represented isometrically through u -> A^{1/2} u.
      const double second = interp_norm(half, theta, root_uh, rule, exec).value_squared;
      const double ratio2 = second / (it * lhs * lhs);
      r.add_cell({{"identity", "second"}, {"theta", theta}, {"probe", p}, {"ratio", ratio2}}, interp_tol,
                 std::abs(ratio2 - 1.0) <= interp_tol);
    }
  }
  return r;
}

// ------------------------------------------------------------ criticality

ProbeFunction constant_one() {
  return {"one", [](double) { return 1.0; },
          [](long j) { return j % 2 ? 2.0 * std::numbers::sqrt2 / (j * std::numbers::pi) : 0.0; }};
}

std::vector<ProbeFunction> probe_family() {
  ProbeFunction sine{"sin_pi_x", [](double x) { return std::sin(std::numbers::pi * x); },
                     [](long j) { return j == 1 ? 1.0 / std::numbers::sqrt2 : 0.0; }};
  ProbeFunction bubble{"x_one_minus_x", [](double x) { return x * (1.0 - x); },
                       [](long j) {
                         const double jp = j * std::numbers::pi;
                         return j % 2 ? 4.0 * std::numbers::sqrt2 / (jp * jp * jp) : 0.0;
                       }};
  return {constant_one(), std::move(sine), std::move(bubble)};
}

std::string to_string(SeriesClass c) {
  switch (c) {
    case SeriesClass::converged: return "converged";
    case SeriesClass::convergent: return "convergent";
    case SeriesClass::log_divergent: return "log-divergent";
    case SeriesClass::power_divergent: return "power-divergent";
  }
  return "unknown";
}

std::vector<CriticalityProfile> criticality_scan(std::size_t n_modes, const std::vector<double>& thetas,
                                                 const ProbeFunction& probe, Execution exec) {
  if (n_modes < 64 || (n_modes & (n_modes - 1)) != 0)
    throw Error(ErrorCode::InvalidConfig, "n_modes must be a power of two >= 64");
  std::vector<std::size_t> ladder;
  for (std::size_t n = 16; n <= n_modes; n *= 2) ladder.push_back(n);
  const std::size_t first = ladder.size() / 2;

  std::vector<double> csq(n_modes);
  for (std::size_t j = 1; j <= n_modes; ++j) {
    const double c = probe.sine_coeff(static_cast<long>(j));
    csq[j - 1] = c * c;
  }

  std::vector<CriticalityProfile> out;
  for (double theta : thetas) {
    CriticalityProfile prof;
    prof.theta = theta;
    prof.ladder = ladder;
    std::vector<double> terms(n_modes);
    for (std::size_t j = 1; j <= n_modes; ++j)
      terms[j - 1] = std::pow(static_cast<double>(j) * std::numbers::pi, 4.0 * theta) * csq[j - 1];
    prof.partial_sums.assign(ladder.size(), 0.0);
    kernels::ladder_partial_sums(terms, ladder, prof.partial_sums, exec);

    std::vector<double> log_n, s_upper, log_inc, incs;
    for (std::size_t k = first; k < ladder.size(); ++k) {
      log_n.push_back(std::log(static_cast<double>(ladder[k])));
      s_upper.push_back(prof.partial_sums[k]);
    }
    for (std::size_t k = first; k + 1 < ladder.size(); ++k)
      incs.push_back(prof.partial_sums[k + 1] - prof.partial_sums[k]);
    const LineFit lf = fit_line(log_n, s_upper);
    prof.log_slope = lf.slope;
    prof.log_r2 = lf.r2;

    const double s_last = prof.partial_sums.back();
    const bool tiny = std::all_of(incs.begin(), incs.end(), [&](double d) { return d <= 1e-6 * s_last; });
    if (tiny) {
      prof.classification = SeriesClass::converged;
      prof.fitted_exponent = -INFINITY;
      out.push_back(std::move(prof));
      continue;
    }
    std::vector<double> inc_x;
    for (std::size_t i = 0; i < incs.size(); ++i) {
      if (!(incs[i] > 0.0))
        throw Error(ErrorCode::AmbiguousClassification, "non-positive increment at theta=" + std::to_string(theta));
      inc_x.push_back(log_n[i]);
      log_inc.push_back(std::log(incs[i]));
    }
    const double q = fit_line(inc_x, log_inc).slope;
    prof.fitted_exponent = q;
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < incs.size(); ++i) decreasing = decreasing && incs[i + 1] < incs[i];

    if (q < -0.05 && decreasing) {
      prof.classification = SeriesClass::convergent;
    } else if (std::abs(q) <= 0.05 && lf.r2 > 0.999) {
      prof.classification = SeriesClass::log_divergent;
    } else if (q > 0.05) {
      prof.classification = SeriesClass::power_divergent;
    } else {
      throw Error(ErrorCode::AmbiguousClassification,
                  "theta=" + std::to_string(theta) + " increment exponent " + std::to_string(q) +
                      " R^2 " + std::to_string(lf.r2));
    }
    out.push_back(std::move(prof));
  }
  return out;
}

// ------------------------------------------------------------ weight functional

namespace {

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(static_cast<std::size_t>(n));
  g.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[static_cast<std::size_t>(i)] = x;
    g.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

double gauss_on(const GaussRule& g, const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
  return half * s;
}

}  // namespace

WeightFunctional weight_test(const ProbeFunction& probe, int k_min, int k_max) {
  if (k_min < 2 || k_max <= k_min + 5)
    throw Error(ErrorCode::InvalidConfig, "weight test needs 2 <= k_min and k_max > k_min + 5");
  const GaussRule g = gauss_legendre(10);
  // near 1 the integrand is evaluated at 1 - s to keep resolution in s
  auto left = [&](double x) {
    const double u = probe.value(x);
    return u * u / (x * (1.0 - x));
  };
  auto right = [&](double s) {
    const double u = probe.value(1.0 - s);
    return u * u / (s * (1.0 - s));
  };
  // cells [2^{-(i+1)}, 2^{-i}], i = 1.., on both sides
  auto level_cells = [&](int i) {
    const double a = std::ldexp(1.0, -(i + 1)), b = std::ldexp(1.0, -i);
    return gauss_on(g, left, a, b) + gauss_on(g, right, a, b);
  };
  WeightFunctional w;
  w.probe = probe.name;
  double value = 0.0;
  for (int i = 1; i < k_min; ++i) value += level_cells(i);
  for (int k = k_min; k <= k_max; ++k) {
    if (k > k_min) value += level_cells(k - 1);
    w.levels.push_back(k);
    w.values.push_back(value);
  }
  for (std::size_t i = 0; i + 1 < w.values.size(); ++i) w.increments.push_back(w.values[i + 1] - w.values[i]);
  int sustained = 0;
  for (std::size_t i = w.increments.size() - 5; i < w.increments.size(); ++i) {
    const double prev = w.increments[i - 1], cur = w.increments[i];
    const double ratio = prev > 0.0 ? cur / prev : 0.0;
    if (ratio > 0.9) ++sustained;
  }
  w.divergence_flag = sustained == 5;
  return w;
}

// ------------------------------------------------------------ Stokes studies

VerificationReport stokes_equivalence_study(const std::vector<int>& grids, const std::vector<double>& thetas,
                                            std::uint64_t seed, Execution exec) {
  VerificationReport r;
  r.experiment = "stokes-equivalence";
  r.parameters = {{"grids", grids}, {"thetas", thetas}, {"seed", seed}};
  r.notes.push_back("unit square with corners stands in for a smooth domain; constants are refinement-tracked");
  std::vector<std::vector<double>> mins(thetas.size()), maxs(thetas.size());

  for (int n : grids) {
    const GridDomain dom = GridDomain::make(2, n);
    const StokesSystem sys = build_stokes(dom);
    const SpectralModel ms = stokes_spectral_model(sys);
    const SpectralModel ma = vector_laplacian_model(sys);
    Rng rng(seed);
    std::vector<Vector> probes;
    for (Eigen::Index j = 0; j < 5; ++j) probes.push_back(ms.basis().col(j));
    for (int p = 0; p < 20; ++p) {
      Vector c(ms.dim());
      for (Eigen::Index j = 0; j < ms.dim(); ++j)
        c[j] = std::pow(static_cast<double>(j + 1), -1.5) * rng.uniform(-1.0, 1.0);
      probes.push_back(ms.basis() * c);
    }
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const double theta = thetas[ti];
      if (theta < 0.0 || theta > 1.0)
        throw Error(ErrorCode::ThetaOutOfRange, "stokes theta = " + std::to_string(theta));
      std::vector<double> ratios(probes.size());
      kernels::for_each_index(
          probes.size(),
          [&](std::size_t p) {
            const CoeffVector cs = to_coeffs(ms, probes[p]);
            const CoeffVector ca = to_coeffs(ma, sys.nullbasis * probes[p]);
            ratios[p] = frac_norm(ms, theta, cs) / frac_norm(ma, theta, ca);
          },
          exec);
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      mins[ti].push_back(*lo);
      maxs[ti].push_back(*hi);
      const bool finite = std::isfinite(*lo) && std::isfinite(*hi) && *lo > 0.0;
      r.add_cell({{"kind", "grid"}, {"grid", n}, {"theta", theta}, {"min_ratio", *lo}, {"max_ratio", *hi},
                  {"ratio", *hi}},
                 0.0, finite);
      double worst = 0.0;
      for (double x : ratios) worst = std::max(worst, std::abs(x - 1.0));
      if (theta == 0.0 || theta == 0.5) {
        r.add_cell({{"kind", "exact"}, {"grid", n}, {"theta", theta}, {"max_abs_deviation", worst}}, 1e-10,
                   worst <= 1e-10);
      } else if (theta == 1.0) {
        r.add_cell({{"kind", "contraction"}, {"grid", n}, {"theta", theta}, {"max_ratio", *hi}}, 1e-12,
                   *hi <= 1.0 + 1e-12);
      }
    }
  }
  if (grids.size() > 1) {
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const double dmin = drift(mins[ti]), dmax = drift(maxs[ti]);
      r.add_cell({{"kind", "ladder"}, {"theta", thetas[ti]}, {"min_drift", dmin}, {"max_drift", dmax}}, 2.0,
                 dmin < 2.0 && dmax < 2.0);
    }
  }
  return r;
}

VerificationReport halft1_check(const GridDomain& domain, const std::vector<double>& thetas,
                                std::uint64_t seed, const QuadratureRule& rule, Execution exec) {
  std::vector<double> interp_thetas;
  for (double theta : thetas) {
    if (!(theta > 0.5 && theta < 1.0))
      throw Error(ErrorCode::ThetaOutOfRange, "halft1 needs 1/2 < theta < 1, got " + std::to_string(theta));
    interp_thetas.push_back(2.0 * theta - 1.0);
  }
  const SobolevGrams grams = sobolev_grams(domain);
  const Retraction t = harmonic_retraction(grams);
  const QuadraticPair ambient = QuadraticPair::build(grams.g1, grams.g2);
  const QuadraticPair sub = QuadraticPair::build(grams.g1, grams.g2, t.subspace_basis);
  Rng rng(seed);
  const std::vector<Vector> probes = subspace_probes(sub, rng);
  IntersectionOptions opts;
  opts.lemma = "halft1";
  opts.grid = std::to_string(domain.dimension) + "d-n" + std::to_string(domain.n);
  opts.exec = exec;
  VerificationReport r = verify_intersection_lemma(ambient, t, interp_thetas, probes, rule, opts);
  for (auto& c : r.cells) {
    if (c.fields["theta"].is_number())
      c.fields["power_theta"] = 0.5 * (1.0 + c.fields["theta"].get<double>());
  }
  r.notes.push_back("pair (g1, g2) on all grid nodes; H0 = zero-boundary grid functions; T = harmonic lift");
  return r;
}

VerificationReport stokes_retraction_study(const std::vector<int>& grids, std::uint64_t seed, int identity_probes) {
  VerificationReport r;
  r.experiment = "stokes-retraction";
  r.parameters = {{"grids", grids}, {"seed", seed}, {"identity_probes", identity_probes}};
  std::vector<double> hb, db;
  for (int n : grids) {
    const StokesSystem sys = build_stokes(GridDomain::make(2, n));
    const SpectralModel ma = vector_laplacian_model(sys);
    const Retraction t = stokes_retraction(sys, ma);
    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < identity_probes; ++p) {
      const Vector z = sys.nullbasis * rng.uniform_vector(sys.nullspace_dim());
      worst = std::max(worst, (t.apply(z) - z).norm() / z.norm());
    }
    r.add_cell({{"kind", "identity"}, {"grid", n}, {"max_rel_defect", worst}}, 1e-10, worst <= 1e-10);
    // ||A_S^{-1} P A|| in L2 equals ||A A_S^{-1} P|| by transposition, which
    // is the D(A) -> D(A) norm: the two bounds coincide.
    const double rel = std::abs(t.h_bound - t.d_bound) / t.h_bound;
    r.add_cell({{"kind", "bounds"}, {"grid", n}, {"h_bound", t.h_bound}, {"d_bound", t.d_bound},
                {"rel_diff", rel}},
               1e-8, std::isfinite(t.h_bound) && std::isfinite(t.d_bound) && rel <= 1e-8);
    hb.push_back(t.h_bound);
    db.push_back(t.d_bound);
  }
  if (grids.size() > 1) {
    const double dh = drift(hb), dd = drift(db);
    r.add_cell({{"kind", "ladder"}, {"h_drift", dh}, {"d_drift", dd}}, 2.0, dh < 2.0 && dd < 2.0);
  }
  return r;
}

}  // namespace fracspace
