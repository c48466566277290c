#include "fracspace/k_functional.hpp"

#include "fracspace/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracspace {

namespace {

void require_positive_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw Error(ErrorCode::NonPositiveT, "t = " + std::to_string(t));
}

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw Error(ErrorCode::ThetaOutOfRange, "theta = " + std::to_string(theta));
}

void check_spd(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asymmetry(m) > 1e-12 * scale)
    throw Error(ErrorCode::SingularSystem, std::string(name) + " is not symmetric");
  if (!is_positive_definite(m))
    throw Error(ErrorCode::SingularSystem, std::string(name) + " is not positive definite");
}

// One-dimensional golden-section minimization on [lo, hi].
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iterations) {
  constexpr double g = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && b - a > 0.0; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

// ---------------------------------------------------------------- pairs

QuadraticPair QuadraticPair::build(Matrix m1, Matrix m2, std::optional<Matrix> subspace_basis) {
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw Error(ErrorCode::DimensionMismatch, "Gram forms have different shapes");
  check_spd(m1, "m1");
  check_spd(m2, "m2");
  QuadraticPair p;
  if (subspace_basis) {
    if (subspace_basis->rows() != m1.rows() || subspace_basis->cols() == 0)
      throw Error(ErrorCode::DimensionMismatch, "subspace basis does not match the Gram forms");
    const double defect = orthonormality_defect(*subspace_basis);
    if (defect > 1e-8)
      throw Error(ErrorCode::NotOrthonormal, "subspace basis Gram deviation " + std::to_string(defect));
    const Matrix& z = *subspace_basis;
    p.rm1_ = z.transpose() * m1 * z;
    p.rm2_ = z.transpose() * m2 * z;
    p.rm1_ = 0.5 * (p.rm1_ + p.rm1_.transpose());
    p.rm2_ = 0.5 * (p.rm2_ + p.rm2_.transpose());
  }
  p.m1_ = std::move(m1);
  p.m2_ = std::move(m2);
  p.basis_ = std::move(subspace_basis);
  return p;
}

Vector QuadraticPair::reduce(const Vector& u) const {
  if (u.size() != ambient_dim())
    throw Error(ErrorCode::DimensionMismatch, "vector length " + std::to_string(u.size()) +
                                                  ", pair dimension " + std::to_string(ambient_dim()));
  if (!basis_) return u;
  Vector c = basis_->transpose() * u;
  const double residual = (u - (*basis_) * c).norm();
  if (residual > 1e-8 * std::max(1.0, u.norm()))
    throw Error(ErrorCode::NotInSubspace, "distance to subspace " + std::to_string(residual));
  return c;
}

Vector QuadraticPair::lift(const Vector& c) const { return basis_ ? Vector((*basis_) * c) : c; }

// ------------------------------------------------------------ K closed forms

double k_spectral(const SpectralModel& model, const CoeffVector& u, double t) {
  require_positive_t(t);
  const Vector& lam = model.eigenvalues();
  if (u.coeffs.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match model");
  double s = 0.0;
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    const double x2 = (t * lam[j]) * (t * lam[j]);
    s += u.coeffs[j] * u.coeffs[j] * (x2 / (1.0 + x2));
  }
  return std::sqrt(s);
}

Decomposition optimal_decomposition(const SpectralModel& model, const CoeffVector& u, double t) {
  require_positive_t(t);
  const Vector& lam = model.eigenvalues();
  Vector ycoef(model.dim());
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    const double x2 = (t * lam[j]) * (t * lam[j]);
    ycoef[j] = u.coeffs[j] / (1.0 + x2);
  }
  Decomposition d;
  d.y = model.basis() * ycoef;
  d.x = from_coeffs(model, u) - d.y;
  d.k = k_spectral(model, u, t);
  return d;
}

Decomposition optimal_decomposition(const QuadraticPair& pair, const Vector& u, double t) {
  require_positive_t(t);
  const Vector c = pair.reduce(u);
  const Matrix& r1 = pair.reduced_m1();
  const Matrix& r2 = pair.reduced_m2();
  const Matrix system = r1 + (t * t) * r2;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularSystem, "M1 + t^2 M2 not positive definite at t=" + std::to_string(t));
  const Vector y = llt.solve(r1 * c);
  const Vector x = c - y;
  Decomposition d;
  d.k = std::sqrt(std::max(0.0, x.dot(r1 * x) + (t * t) * y.dot(r2 * y)));
  d.x = pair.lift(x);
  d.y = pair.lift(y);
  return d;
}

double k_quadratic(const QuadraticPair& pair, const Vector& u, double t) {
  return optimal_decomposition(pair, u, t).k;
}

// ------------------------------------------------------------ brute oracles

double k_brute(const SpectralModel& model, const CoeffVector& u, double t, const BruteOptions& opts) {
  require_positive_t(t);
  if (u.coeffs.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match model");
  double total = 0.0;
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    const double a = u.coeffs[j];
    const double w = (t * model.eigenvalues()[j]) * (t * model.eigenvalues()[j]);
    auto phi = [&](double y) { return (a - y) * (a - y) + w * y * y; };
    if (a == 0.0) continue;
    if (opts.grid_points <= 1) {
      total += phi(0.0);
      continue;
    }
    const double lo = std::min(0.0, a), hi = std::max(0.0, a);
    const int g = opts.grid_points;
    const double step = (hi - lo) / (g - 1);
    int best = 0;
    double best_val = phi(lo);
    for (int i = 1; i < g; ++i) {
      const double v = phi(lo + i * step);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    const double bl = lo + std::max(0, best - 1) * step;
    const double br = lo + std::min(g - 1, best + 1) * step;
    const auto [y, v] = golden_min(phi, bl, br, 120);
    total += std::min(v, best_val);
  }
  return std::sqrt(total);
}

double k_brute(const QuadraticPair& pair, const Vector& u, double t, const BruteOptions& opts) {
  require_positive_t(t);
  const Vector c = pair.reduce(u);
  const Matrix& r1 = pair.reduced_m1();
  const Matrix& r2 = pair.reduced_m2();
  const double t2 = t * t;
  const Vector r1c = r1 * c;
  auto objective = [&](const Vector& y) {
    const Vector x = c - y;
    return x.dot(r1 * x) + t2 * y.dot(r2 * y);
  };
  if (opts.grid_points <= 1) return std::sqrt(std::max(0.0, objective(Vector::Zero(c.size()))));

  double best_s = 0.0, best_val = objective(Vector::Zero(c.size()));
  for (int i = 1; i < opts.grid_points; ++i) {
    const double s = static_cast<double>(i) / (opts.grid_points - 1);
    const double v = objective(s * c);
    if (v < best_val) {
      best_val = v;
      best_s = s;
    }
  }
  // conjugate directions with exact line search, restarted every n steps;
  // the gradient is recomputed each step so the stopping test sees its
  // true roundoff floor
  Vector y = best_s * c;
  const Eigen::Index n = c.size();
  Vector dir;
  double prev_gn2 = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vector hy = r1 * y + t2 * (r2 * y);
    const Vector g = 2.0 * (hy - r1c);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= opts.gradient_tol * 2.0 * (hy.norm() + r1c.norm()) || gn2 == 0.0)
      return std::sqrt(std::max(0.0, objective(y)));
    dir = (it % n == 0) ? Vector(-g) : Vector(-g + (gn2 / prev_gn2) * dir);
    prev_gn2 = gn2;
    const Vector hd = r1 * dir + t2 * (r2 * dir);
    const double curvature = 2.0 * dir.dot(hd);
    if (!(curvature > 0.0)) break;
    y -= (g.dot(dir) / curvature) * dir;
  }
  throw Error(ErrorCode::ConvergenceFailure, "conjugate-direction search stalled at t=" + std::to_string(t));
}

namespace {

// c-scan for the sum-form functional; `k_sq(s)` returns the brute K(u,s)^2.
template <class KSq>
double sum_form(KSq&& k_sq, double x_norm, double y_norm, double t) {
  auto phi = [&](double c) { return k_sq(t * std::sqrt(c / (1.0 - c))) / c; };
  // endpoints are the feasible splittings y = 0 and x = 0
  double best = std::min(x_norm * x_norm, (t * y_norm) * (t * y_norm));
  constexpr int kScan = 64;
  int best_i = -1;
  for (int i = 1; i < kScan; ++i) {
    const double v = phi(static_cast<double>(i) / kScan);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  // refine next to the best scan point (or next to the better endpoint)
  int lo_i, hi_i;
  if (best_i >= 0) {
    lo_i = best_i - 1;
    hi_i = best_i + 1;
  } else if (x_norm <= t * y_norm) {
    lo_i = kScan - 1;
    hi_i = kScan;
  } else {
    lo_i = 0;
    hi_i = 1;
  }
  const double lo = std::max(static_cast<double>(lo_i) / kScan, 1e-300);
  const double hi = std::min(static_cast<double>(hi_i) / kScan, 1.0 - 1e-16);
  const auto [c, v] = golden_min(phi, lo, hi, 80);
  return std::sqrt(std::min(best, v));
}

}  // namespace

double k_sum_brute(const SpectralModel& model, const CoeffVector& u, double t) {
  require_positive_t(t);
  const double xn = frac_norm(model, 0.0, u);
  const double yn = frac_norm(model, 1.0, u);
  if (xn == 0.0) return 0.0;
  return sum_form([&](double s) { double k = k_brute(model, u, s); return k * k; }, xn, yn, t);
}

double k_sum_brute(const QuadraticPair& pair, const Vector& u, double t) {
  require_positive_t(t);
  const Vector c = pair.reduce(u);
  const double xn = std::sqrt(std::max(0.0, c.dot(pair.reduced_m1() * c)));
  const double yn = std::sqrt(std::max(0.0, c.dot(pair.reduced_m2() * c)));
  if (xn == 0.0) return 0.0;
  return sum_form([&](double s) { double k = k_brute(pair, u, s); return k * k; }, xn, yn, t);
}

// ------------------------------------------------------------ pair operator

SpectralModel pair_operator_model(const QuadraticPair& pair) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(pair.reduced_m2(), pair.reduced_m1());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::EigensolveFailure, "generalized eigenproblem of the pair failed");
  Vector lam = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return SpectralModel::build(std::move(lam), solver.eigenvectors(), pair.reduced_m1());
}

// ------------------------------------------------------------ quadrature

void QuadratureRule::validate() const {
  if (log_t_min && log_t_max && !(*log_t_min < *log_t_max))
    throw Error(ErrorCode::InvalidConfig, "log_t_min must be below log_t_max");
  if (!(refinement_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "refinement_tol must be positive");
  if (max_panels < 2) throw Error(ErrorCode::InvalidConfig, "max_panels must be at least 2");
}

namespace {

using BatchEval = std::function<void(std::span<const double>, std::span<double>)>;

struct SimpsonResult {
  double value;
  long panels;
};

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

SimpsonResult simpson_doubling(double a, double b, const BatchEval& eval, double tol, long max_panels) {
  long n = std::max<long>(16, static_cast<long>(std::ceil((b - a) / 0.25)));
  if (n % 2) ++n;
  if (n > max_panels)
    throw Error(ErrorCode::QuadratureNotConverged, "window needs more than max_panels panels");
  double h = (b - a) / static_cast<double>(n);
  std::vector<double> tau(static_cast<std::size_t>(n + 1)), f(tau.size());
  for (long i = 0; i <= n; ++i) tau[static_cast<std::size_t>(i)] = a + static_cast<double>(i) * h;
  tau.back() = b;
  eval(tau, f);
  const double ends = f.front() + f.back();
  double odd = 0.0, even = 0.0;
  for (long i = 1; i < n; ++i) (i % 2 ? odd : even) += f[static_cast<std::size_t>(i)];
  double s = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);

  while (true) {
    if (2 * n > max_panels)
      throw Error(ErrorCode::QuadratureNotConverged,
                  "panel cap " + std::to_string(max_panels) + " reached");
    std::vector<double> mid_tau(static_cast<std::size_t>(n)), mid_f(mid_tau.size());
    for (long i = 0; i < n; ++i)
      mid_tau[static_cast<std::size_t>(i)] = a + (static_cast<double>(i) + 0.5) * h;
    eval(mid_tau, mid_f);
    const double mids = ordered_sum(mid_f);
    h *= 0.5;
    n *= 2;
    const double interior = odd + even;
    const double s_new = h / 3.0 * (ends + 4.0 * mids + 2.0 * interior);
    odd = mids;
    even = interior;
    if (std::abs(s_new - s) <= tol * std::abs(s_new)) return {s_new, n};
    s = s_new;
  }
}

InterpNormResult integrate(double theta, const BatchEval& eval, double x_norm_sq, double y_norm_sq,
                           std::pair<double, double> default_window, const QuadratureRule& rule) {
  require_theta(theta);
  rule.validate();
  InterpNormResult r;
  double a = rule.log_t_min.value_or(default_window.first);
  double b = rule.log_t_max.value_or(default_window.second);
  if (!(a < b)) throw Error(ErrorCode::InvalidConfig, "empty quadrature window");
  r.log_t_min = a;
  r.log_t_max = b;
  if (x_norm_sq == 0.0) return r;

  const double left_rate = 2.0 - 2.0 * theta;
  const double right_rate = 2.0 * theta;
  auto tails = [&](double lo, double hi) {
    return std::exp(left_rate * lo) * y_norm_sq / left_rate +
           std::exp(-right_rate * hi) * x_norm_sq / right_rate;
  };

  for (int attempt = 0;; ++attempt) {
    const SimpsonResult s = simpson_doubling(a, b, eval, rule.refinement_tol, rule.max_panels);
    r.value_squared = s.value;
    r.panels = s.panels;
    r.log_t_min = a;
    r.log_t_max = b;
    r.tail_bound = tails(a, b);
    if (!rule.extend_window || r.tail_bound <= 0.5 * rule.refinement_tol * s.value || attempt >= 6) break;
    const double budget = 0.2 * rule.refinement_tol * s.value;
    const double a_new = std::log(budget * left_rate / y_norm_sq) / left_rate;
    const double b_new = -std::log(budget * right_rate / x_norm_sq) / right_rate;
    a = std::min(a, a_new);
    b = std::max(b, b_new);
    r.window_extended = true;
  }
  r.value = std::sqrt(std::max(0.0, r.value_squared));
  return r;
}

std::pair<double, double> spectral_window(const SpectralModel& model) {
  return {std::log(1e-4 / model.lambda_max()), std::log(1e4 / model.lambda_min())};
}

}  // namespace

InterpNormResult interp_norm(const SpectralModel& model, double theta, const CoeffVector& u,
                             const QuadratureRule& rule, Execution exec) {
  require_theta(theta);
  if (u.coeffs.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match model");
  std::vector<double> lam(model.eigenvalues().data(), model.eigenvalues().data() + model.dim());
  std::vector<double> csq(lam.size());
  for (std::size_t j = 0; j < csq.size(); ++j) {
    const double c = u.coeffs[static_cast<Eigen::Index>(j)];
    csq[j] = c * c;
  }
  BatchEval eval = [&](std::span<const double> tau, std::span<double> out) {
    kernels::interp_integrand(lam, csq, theta, tau, out, exec);
  };
  const double xn = frac_norm(model, 0.0, u);
  const double yn = frac_norm(model, 1.0, u);
  return integrate(theta, eval, xn * xn, yn * yn, spectral_window(model), rule);
}

InterpNormResult interp_norm(const QuadraticPair& pair, double theta, const Vector& u,
                             const QuadratureRule& rule, Execution exec) {
  const SpectralModel model = pair_operator_model(pair);
  return interp_norm(model, theta, to_coeffs(model, pair.reduce(u)), rule, exec);
}

InterpNormResult interp_norm_generic(double theta, const std::function<double(double)>& k_squared,
                                     double x_norm_sq, double y_norm_sq,
                                     std::pair<double, double> default_window,
                                     const QuadratureRule& rule, Execution exec) {
  BatchEval eval = [&](std::span<const double> tau, std::span<double> out) {
    kernels::for_each_index(
        tau.size(),
        [&](std::size_t i) { out[i] = std::exp(-2.0 * theta * tau[i]) * k_squared(std::exp(tau[i])); },
        exec);
  };
  return integrate(theta, eval, x_norm_sq, y_norm_sq, default_window, rule);
}

// ------------------------------------------------------------ I(theta)

double i_theta(double theta) {
  require_theta(theta);
  if (theta == 0.5) return std::numbers::pi / 2.0;
  return std::numbers::pi / (2.0 * std::sin(std::numbers::pi * theta));
}

double i_theta_numeric(double theta) {
  require_theta(theta);
  // s = e^tau: integrand e^{(2-2 theta) tau} / (1 + e^{2 tau}), analytic in
  // the strip |Im tau| < pi/2, so the trapezoid rule converges geometrically.
  const double lr = 2.0 - 2.0 * theta, rr = 2.0 * theta;
  const double eps = 1e-19;
  const double a = std::log(eps * lr) / lr;
  const double b = -std::log(eps * rr) / rr;
  const double h = 1.0 / 32.0;
  const long n = static_cast<long>(std::ceil((b - a) / h));
  auto g = [&](double tau) {
    return tau <= 0.0 ? std::exp(lr * tau) / (1.0 + std::exp(2.0 * tau))
                      : std::exp(-rr * tau) / (1.0 + std::exp(-2.0 * tau));
  };
  // Neumaier summation
  double sum = 0.0, comp = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double term = g(a + static_cast<double>(i) * h) * ((i == 0 || i == n) ? 0.5 : 1.0);
    const double tmp = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - tmp) + term : (term - tmp) + sum;
    sum = tmp;
  }
  return h * (sum + comp);
}

}  // namespace fracspace
