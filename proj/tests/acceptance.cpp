// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include "fracspace/cli.hpp"
#include "fracspace/discrete_operators.hpp"
#include "fracspace/error.hpp"
#include "fracspace/experiments.hpp"
#include "fracspace/k_functional.hpp"
#include "fracspace/retractions.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace fracspace;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %-44s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> tenths() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "interpolation norm = I(theta) fractional norm", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralModel m = laplacian_1d_analytic(256);
    Rng rng(42);
    const VerificationReport r = lemma_fps_sweep(m, tenths(), decaying_probes(m, rng, 20));
    double worst = 0.0;
    for (const auto& c : r.cells) worst = std::max(worst, std::abs(c.fields["ratio"].get<double>() - 1.0));
    const double secs = seconds_since(t0);
    return Outcome{r.all_pass() && r.cells.size() == 180 && secs < 30.0,
                   fmt("%.0f cells, max |ratio-1| = %.2e, %.1fs", double(r.cells.size()), worst, secs)};
  });

  criterion(2, "I(theta) closed form", [] {
    double worst = 0.0, worst_boost = 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    for (double theta : tenths()) {
      const double closed = std::numbers::pi / (2.0 * std::sin(std::numbers::pi * theta));
      auto f = [theta](double s) { return std::pow(s, 1.0 - 2.0 * theta) / (1.0 + s * s); };
      const double ref = ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, INFINITY);
      worst = std::max(worst, std::abs(i_theta_numeric(theta) - closed) / closed);
      worst_boost = std::max(worst_boost, std::abs(ref - i_theta(theta)) / closed);
    }
    const bool half = i_theta(0.5) == std::numbers::pi / 2.0;
    return Outcome{worst <= 1e-8 && worst_boost <= 1e-8 && half,
                   fmt("quadrature rel err %.1e, independent rule %.1e, I(1/2) exact: ", worst, worst_boost) +
                       (half ? "yes" : "no")};
  });

  criterion(3, "K-functional: spectral = quadratic = brute", [] {
    // the same norm pair presented twice: eigen-data and a dense rotated Gram
    const Eigen::Index n = 10;
    Rng rng(42);
    Matrix raw(n, n);
    for (Eigen::Index j = 0; j < n; ++j) raw.col(j) = rng.uniform_vector(n);
    const Matrix q = gram_schmidt(raw);
    Vector lam(n);
    for (Eigen::Index j = 0; j < n; ++j) lam[j] = std::pow((j + 1) * std::numbers::pi, 2) / 10.0;
    const SpectralModel model = SpectralModel::build(lam, q);
    const Matrix m2 = q * lam.array().square().matrix().asDiagonal() * q.transpose();
    const QuadraticPair pair = QuadraticPair::build(Matrix::Identity(n, n), 0.5 * (m2 + m2.transpose()));
    double worst = 0.0, sum_lo = INFINITY, sum_hi = 0.0;
    for (int cell = 0; cell < 50; ++cell) {
      const Vector u = rng.uniform_vector(n);
      const double t = std::exp(rng.uniform(-7.0, 2.0));
      const CoeffVector c = to_coeffs(model, u);
      const double ks = k_spectral(model, c, t);
      const double scale = std::max(1.0, ks);
      worst = std::max({worst, std::abs(k_quadratic(pair, u, t) - ks) / scale,
                        std::abs(k_brute(model, c, t) - ks) / scale, std::abs(k_brute(pair, u, t) - ks) / scale});
      const double s = k_sum_brute(model, c, t) / ks;
      sum_lo = std::min(sum_lo, s);
      sum_hi = std::max(sum_hi, s);
    }
    const bool ok = worst <= 1e-6 && sum_lo >= 1.0 - 1e-9 && sum_hi <= std::numbers::sqrt2 * (1.0 + 1e-9);
    return Outcome{ok, fmt("50 cells, max route gap %.1e, k_sum/K in [%.4f, %.4f]", worst, sum_lo, sum_hi)};
  });

  criterion(4, "criticality of u = 1 at theta = 1/4", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = criticality_scan(1 << 14, {0.2, 0.25, 0.3});
    const double secs = seconds_since(t0);
    const bool ok = p[0].classification == SeriesClass::convergent &&
                    p[1].classification == SeriesClass::log_divergent && p[1].log_r2 > 0.999 &&
                    p[2].classification == SeriesClass::power_divergent &&
                    std::abs(p[2].fitted_exponent - 0.2) <= 0.1 * 0.2 && secs < 5.0;
    return Outcome{ok, to_string(p[0].classification) + " / " + to_string(p[1].classification) + " / " +
                           to_string(p[2].classification) +
                           fmt(", R^2 %.6f, exponent %.4f, %.2fs", p[1].log_r2, p[2].fitted_exponent, secs)};
  });

  criterion(5, "weight test agrees with theta = 1/4 membership", [] {
    int agree = 0;
    std::string detail;
    for (const ProbeFunction& probe : probe_family()) {
      const WeightFunctional w = weight_test(probe);
      const bool member = is_member(criticality_scan(1 << 14, {0.25}, probe).front());
      if (w.divergence_flag != member) ++agree;
      detail += probe.name + (w.divergence_flag ? ":divergent " : ":finite ");
    }
    return Outcome{agree == 3, std::to_string(agree) + "/3 agree (" + detail.substr(0, detail.size() - 1) + ")"};
  });

  criterion(6, "intersection bound K <= K0 <= sqrt(2) C K", [] {
    RunConfig c = parse_config(json{{"experiment", "intersection"}, {"sizes", {16, 12}}, {"thetas", json::array()}});
    const VerificationReport r = execute(c);
    long violations = 0, probes = 0, failed = 0;
    double worst = 0.0;
    for (const auto& cell : r.cells) {
      if (cell.fields["kind"] != "k_functional") continue;
      ++probes;
      violations += cell.fields["violations"].get<long>();
      if (!cell.pass) ++failed;
      worst = std::max(worst, cell.fields["ratio"].get<double>() / cell.fields["bound"].get<double>());
    }
    return Outcome{probes == 50 && violations == 0 && failed == 0,
                   fmt("%.0f probes (harmonic n=16, Stokes n=12), %.0f violations, max K0/(sqrt2 C K) = %.3f",
                       double(probes), double(violations), worst)};
  });

  criterion(7, "harmonic lift", [] {
    const GridDomain d = GridDomain::make(2, 16);
    const SobolevGrams g = sobolev_grams(d);
    Rng rng(42);
    const Matrix z = g.interior_basis();
    double fix = 0.0, excess = -INFINITY;
    for (int i = 0; i < 100; ++i) {
      const Vector u0 = z * rng.uniform_vector(z.cols());
      fix = std::max(fix, (harmonic_lift(d, g, u0) - u0).cwiseAbs().maxCoeff());
      const Vector u = rng.uniform_vector(d.node_count());
      const Vector w = harmonic_lift(d, g, u);
      excess = std::max(excess, std::sqrt(w.dot(g.stiffness * w)) - std::sqrt(u.dot(g.stiffness * u)));
    }
    return Outcome{fix <= 1e-10 && excess <= 1e-10,
                   fmt("max |w-u| (zero boundary) %.1e, max ||grad w|| - ||grad u|| = %.3g", fix, excess)};
  });

  criterion(8, "Stokes retraction identity and bound drift", [] {
    const VerificationReport r = stokes_retraction_study({8, 16, 24}, 42, 100);
    double defect = 0.0, hd = 0.0, dd = 0.0;
    for (const auto& c : r.cells) {
      if (c.fields["kind"] == "identity") defect = std::max(defect, c.fields["max_rel_defect"].get<double>());
      if (c.fields["kind"] == "ladder") {
        hd = c.fields["h_drift"].get<double>();
        dd = c.fields["d_drift"].get<double>();
      }
    }
    return Outcome{r.all_pass(), fmt("max ||Tz - z||/||z|| %.1e, drift h %.3f d %.3f", defect, hd, dd)};
  });

  criterion(9, "Stokes theta-sweep exactness points", [] {
    const VerificationReport r = stokes_equivalence_study({8, 12, 16}, {0.0, 0.5, 1.0});
    double dev = 0.0, top = 0.0;
    bool ok = true;
    int checked = 0;
    for (const auto& c : r.cells) {
      if (c.fields["kind"] == "exact") {
        dev = std::max(dev, c.fields["max_abs_deviation"].get<double>());
        ok = ok && c.pass;
        ++checked;
      } else if (c.fields["kind"] == "contraction") {
        top = std::max(top, c.fields["max_ratio"].get<double>());
        ok = ok && c.pass;
        ++checked;
      }
    }
    return Outcome{ok && checked == 9, fmt("max |r-1| at theta 0, 1/2: %.1e; max r at theta 1: %.6f", dev, top)};
  });

  criterion(10, "reiteration", [] {
    const SpectralModel m = laplacian_1d_analytic(256);
    Rng rng(42);
    std::vector<double> thetas = tenths();
    thetas.push_back(1.0);
    const VerificationReport r = reiteration_check(m, thetas, decaying_probes(m, rng, 20));
    double set = 0.0, interp = 0.0;
    for (const auto& c : r.cells) {
      if (c.fields["identity"] == "set") set = std::max(set, c.fields["rel_diff"].get<double>());
      else interp = std::max(interp, std::abs(c.fields["ratio"].get<double>() - 1.0));
    }
    return Outcome{r.all_pass(), fmt("%.0f cells, set identity %.1e, interpolation form %.1e", double(r.cells.size()), set, interp)};
  });

  criterion(11, "determinism: identical config, identical CSV", [] {
    const fs::path root = fs::temp_directory_path() / "fracspace-acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    bool same = true;
    std::string detail;
    for (const char* cfg : {R"({"experiment":"lemma41","sizes":[64],"thetas":[0.3,0.7]})",
                            R"({"experiment":"stokes-equivalence","sizes":[6,8]})",
                            R"({"experiment":"halft1","sizes":[6]})"}) {
      const fs::path file = root / "config.json";
      std::ofstream(file) << cfg;
      std::string outputs[2];
      for (int k = 0; k < 2; ++k) {
        const fs::path out = root / ("run" + std::to_string(k));
        const std::string cmd = std::string(FRACSPACE_CLI) + " run --format csv --config " + file.string() +
                                " --out " + out.string() + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) return Outcome{false, std::string("cli failed on ") + cfg};
        for (const auto& e : fs::directory_iterator(out)) outputs[k] = slurp(e.path());
        fs::remove_all(out);
      }
      same = same && !outputs[0].empty() && outputs[0] == outputs[1];
      detail += (detail.empty() ? "" : ", ") + json::parse(cfg)["experiment"].get<std::string>() +
                (outputs[0] == outputs[1] ? " identical" : " DIFFERENT");
    }
    fs::remove_all(root);
    return Outcome{same, detail};
  });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
