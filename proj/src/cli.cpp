#include "fracspace/cli.hpp"

#include "fracspace/discrete_operators.hpp"
#include "fracspace/error.hpp"
#include "fracspace/experiments.hpp"
#include "fracspace/retractions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#ifndef FRACSPACE_VERSION
#define FRACSPACE_VERSION "dev"
#endif

namespace fracspace {

namespace {

struct Experiment {
  ExperimentInfo info;
  std::vector<int> default_sizes;
  std::vector<double> default_thetas;
  double theta_lo, theta_hi;  // closed range of admissible thetas
  bool closed;                // endpoints allowed
  std::function<VerificationReport(const RunConfig&, const std::vector<int>&, const std::vector<double>&)> body;
};

std::vector<double> tenths() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

VerificationReport run_lemma41(const RunConfig& c, const std::vector<int>& sizes, const std::vector<double>& thetas) {
  VerificationReport r;
  r.experiment = "lemma41";
  for (int n : sizes) {
    require(n >= 2 && n <= 4096, "lemma41 sizes are mode counts in [2, 4096]");
    const SpectralModel model = laplacian_1d_analytic(n);
    Rng rng(c.seed);
    VerificationReport part = lemma_fps_sweep(model, thetas, decaying_probes(model, rng, 20), c.quadrature);
    for (auto& cell : part.cells) cell.fields["modes"] = n;
    r.merge(part);
  }
  return r;
}

VerificationReport run_reiteration(const RunConfig& c, const std::vector<int>& sizes,
                                   const std::vector<double>& thetas) {
  VerificationReport r;
  r.experiment = "reiteration";
  for (int n : sizes) {
    require(n >= 2 && n <= 4096, "reiteration sizes are mode counts in [2, 4096]");
    const SpectralModel model = laplacian_1d_analytic(n);
    Rng rng(c.seed);
    VerificationReport part = reiteration_check(model, thetas, decaying_probes(model, rng, 20), c.quadrature);
    for (auto& cell : part.cells) cell.fields["modes"] = n;
    r.merge(part);
  }
  return r;
}

VerificationReport run_higher_power(const RunConfig& c, const std::vector<int>& sizes,
                                    const std::vector<double>& thetas) {
  VerificationReport r;
  r.experiment = "higher-power";
  for (int n : sizes) {
    require(n >= 2 && n <= 4096, "higher-power sizes are mode counts in [2, 4096]");
    const SpectralModel model = laplacian_1d_analytic(n);
    Rng rng(c.seed);
    const auto probes = decaying_probes(model, rng, 20);
    for (double alpha : thetas) {
      for (double beta : {alpha + 0.5, alpha + 1.0}) {
        for (std::size_t p = 0; p < probes.size(); ++p) {
          VerificationReport part = higher_power_decomposition_check(model, alpha, beta, probes[p]);
          for (auto& cell : part.cells) {
            cell.fields["modes"] = n;
            cell.fields["probe"] = p;
          }
          r.merge(part);
        }
      }
    }
  }
  return r;
}

VerificationReport run_intersection(const RunConfig& c, const std::vector<int>& sizes,
                                    const std::vector<double>& thetas) {
  require(sizes.size() == 2, "intersection sizes are [harmonic_n, stokes_n]");
  VerificationReport r;
  r.experiment = "intersection";
  {
    const GridDomain dom = GridDomain::make(2, sizes[0]);
    const SobolevGrams grams = sobolev_grams(dom);
    const Retraction t = harmonic_retraction(grams);
    const QuadraticPair ambient = QuadraticPair::build(grams.g1, grams.g2);
    const QuadraticPair sub = QuadraticPair::build(grams.g1, grams.g2, t.subspace_basis);
    Rng rng(c.seed);
    IntersectionOptions opts;
    opts.lemma = "harmonic-lift";
    opts.grid = "2d-n" + std::to_string(sizes[0]);
    r.merge(verify_intersection_lemma(ambient, t, thetas, subspace_probes(sub, rng), c.quadrature, opts));
  }
  {
    const StokesSystem sys = build_stokes(GridDomain::make(2, sizes[1]));
    const Retraction t = stokes_retraction(sys, vector_laplacian_model(sys));
    const Matrix id = Matrix::Identity(sys.velocity_dim(), sys.velocity_dim());
    const Matrix a2 = sys.vector_laplacian * sys.vector_laplacian;
    const QuadraticPair ambient = QuadraticPair::build(id, a2);
    const QuadraticPair sub = QuadraticPair::build(id, a2, sys.nullbasis);
    Rng rng(c.seed);
    IntersectionOptions opts;
    opts.lemma = "stokes";
    opts.grid = "mac-n" + std::to_string(sizes[1]);
    r.merge(verify_intersection_lemma(ambient, t, thetas, subspace_probes(sub, rng), c.quadrature, opts));
  }
  r.experiment = "intersection";
  return r;
}

VerificationReport run_halft1(const RunConfig& c, const std::vector<int>& sizes, const std::vector<double>& thetas) {
  VerificationReport r;
  r.experiment = "halft1";
  std::map<double, std::vector<double>> worst;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    VerificationReport part = halft1_check(GridDomain::make(2, sizes[g]), thetas, c.seed, c.quadrature);
    for (const auto& cell : part.cells) {
      if (cell.fields.value("kind", "") != "interp_norm") continue;
      auto& v = worst[cell.fields["power_theta"].get<double>()];
      v.resize(g + 1, 0.0);
      v[g] = std::max(v[g], cell.fields["ratio"].get<double>());
    }
    r.merge(part);
  }
  r.experiment = "halft1";
  if (sizes.size() > 1) {
    for (const auto& [theta, v] : worst) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      const double d = *hi / *lo;
      r.add_cell({{"kind", "ladder"}, {"power_theta", theta}, {"drift", d}}, 2.0, d < 2.0);
    }
  }
  return r;
}

VerificationReport run_criticality(const RunConfig&, const std::vector<int>& sizes,
                                   const std::vector<double>& thetas) {
  require(sizes.size() == 1, "criticality takes one size (mode count)");
  const auto n = static_cast<std::size_t>(sizes[0]);
  require(n >= 64 && n <= (1u << 22) && (n & (n - 1)) == 0, "criticality size must be a power of two in [64, 2^22]");
  VerificationReport r;
  r.experiment = "criticality";
  r.parameters = {{"modes", n}, {"thetas", thetas}, {"probe", "one"}};
  std::vector<CriticalityProfile> profiles;
  for (double theta : thetas) {
    const double q_expected = 4.0 * theta - 1.0;
    const std::string expected = std::abs(q_expected) < 1e-12 ? "log-divergent"
                                 : q_expected < 0.0           ? "convergent"
                                                              : "power-divergent";
    try {
      CriticalityProfile p = criticality_scan(n, {theta}).front();
      const std::string got = to_string(p.classification);
      bool ok = got == expected;
      json f{{"kind", "classification"},
             {"theta", theta},
             {"classification", got},
             {"expected", expected},
             {"fitted_exponent", p.fitted_exponent},
             {"expected_exponent", q_expected},
             {"log_slope", p.log_slope},
             {"log_r2", p.log_r2},
             {"partial_sum", p.partial_sums.back()}};
      double tol = 0.0;
      if (p.classification == SeriesClass::power_divergent) {
        tol = 0.1;
        ok = ok && std::abs(p.fitted_exponent - q_expected) <= tol * q_expected;
      } else if (p.classification == SeriesClass::log_divergent) {
        // u = 1: S_N ~ (8/pi) sum_{odd j <= N} 1/j ~ (4/pi) ln N
        tol = 1e-2;
        const double slope = 4.0 / std::numbers::pi;
        f["expected_log_slope"] = slope;
        ok = ok && p.log_r2 > 0.999 && std::abs(p.log_slope - slope) <= tol * slope;
      }
      r.add_cell(std::move(f), tol, ok);
      profiles.push_back(std::move(p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AmbiguousClassification) throw;
      r.add_cell({{"kind", "classification"}, {"theta", theta}, {"classification", "ambiguous"},
                  {"expected", expected}},
                 0.0, false);
    }
  }
  std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });
  for (std::size_t i = 0; i + 1 < profiles.size(); ++i) {
    bool mono = true;
    for (std::size_t k = 0; k < profiles[i].partial_sums.size(); ++k)
      mono = mono && profiles[i].partial_sums[k] <= profiles[i + 1].partial_sums[k];
    r.add_cell({{"kind", "monotone"}, {"theta", profiles[i].theta}, {"theta_next", profiles[i + 1].theta}}, 0.0,
               mono);
  }
  return r;
}

VerificationReport run_weight(const RunConfig&, const std::vector<int>& sizes, const std::vector<double>&) {
  require(sizes.size() == 2 && sizes[0] >= 2 && sizes[1] > sizes[0] + 5 && sizes[1] <= 40,
          "weight sizes are [k_min, k_max] with 2 <= k_min, k_min + 5 < k_max <= 40");
  VerificationReport r;
  r.experiment = "weight";
  r.parameters = {{"k_min", sizes[0]}, {"k_max", sizes[1]}, {"rho", "x(1-x)"}};
  for (const ProbeFunction& probe : probe_family()) {
    const WeightFunctional w = weight_test(probe, sizes[0], sizes[1]);
    const CriticalityProfile p = criticality_scan(1u << 14, {0.25}, probe).front();
    const bool member = is_member(p);
    json f{{"probe", probe.name},
           {"divergence_flag", w.divergence_flag},
           {"classification", to_string(p.classification)},
           {"member", member},
           {"weight_value", w.values.back()},
           {"last_increment", w.increments.back()}};
    if (w.divergence_flag) f["increment_over_2ln2"] = w.increments.back() / (2.0 * std::numbers::ln2);
    r.add_cell(std::move(f), 0.0, w.divergence_flag != member);
  }
  return r;
}

VerificationReport run_stokes_retraction(const RunConfig& c, const std::vector<int>& sizes,
                                         const std::vector<double>&) {
  return stokes_retraction_study(sizes, c.seed);
}

VerificationReport run_stokes_equivalence(const RunConfig& c, const std::vector<int>& sizes,
                                          const std::vector<double>& thetas) {
  return stokes_equivalence_study(sizes, thetas, c.seed);
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> reg = {
      {{"lemma41", "(H, D(A))_theta = D(A^theta): interp_norm^2 = I(theta) ||A^theta u||^2 on the 1D Laplacian"},
       {256}, tenths(), 0.0, 1.0, false, run_lemma41},
      {{"reiteration", "reiteration: (H, D(A^1/2))_theta and (D(A^1/2), D(A))_theta against D(A^{theta/2}), D(A^{(1+theta)/2})"},
       {256}, {0.25, 0.5, 0.75}, 0.0, 1.0, false, run_reiteration},
      {{"intersection", "intersection lemma: K <= K0 <= sqrt(2) C K for harmonic-lift and Stokes retractions"},
       {16, 12}, {0.25, 0.5, 0.75}, 0.0, 1.0, false, run_intersection},
      {{"halft1", "D(A^theta) = H^{2 theta} cap H^1_0 for 1/2 < theta < 1 via the harmonic lift"},
       {8, 12, 16}, {0.6, 0.75, 0.9}, 0.5, 1.0, false, run_halft1},
      {{"criticality", "theta = 1/4 threshold: partial sums of sum lambda_j^{2 theta} |u_j|^2 for u = 1"},
       {1 << 14}, {0.2, 0.25, 0.3}, 0.0, 1.0, false, run_criticality},
      {{"weight", "D(A^{1/4}) membership iff int |u|^2 / rho < inf, rho = x(1-x)"},
       {8, 20}, {0.25}, 0.0, 1.0, false, run_weight},
      {{"stokes-retraction", "T = A_S^{-1} P A fixes ker D_h; bounds tracked over a grid ladder"},
       {8, 16, 24}, {}, 0.0, 1.0, true, run_stokes_retraction},
      {{"stokes-equivalence", "D(A_S^theta) = D(A^theta) cap H_sigma: ||A_S^theta u|| / ||A^theta u|| over a grid ladder"},
       {8, 12, 16}, {0.0, 0.25, 0.5, 0.75, 1.0}, 0.0, 1.0, true, run_stokes_equivalence},
      {{"higher-power", "||u||_{D(A^beta)} = ||A^{beta-alpha} u||_{D(A^alpha)} for beta >= alpha"},
       {64}, {0.25, 0.5, 0.75}, 0.0, 1.0, true, run_higher_power},
  };
  return reg;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.info.name == name) return e;
  throw Error(ErrorCode::UnknownExperiment, "'" + name + "' (try `fracspace list`)");
}

double number(const json& j, const char* key) {
  require(j.is_number(), std::string(key) + " must be a number");
  return j.get<double>();
}

void read_quadrature(const json& q, QuadratureRule& rule) {
  if (q.contains("log_t_min")) rule.log_t_min = number(q["log_t_min"], "log_t_min");
  if (q.contains("log_t_max")) rule.log_t_max = number(q["log_t_max"], "log_t_max");
  if (q.contains("tol")) rule.refinement_tol = number(q["tol"], "tol");
  if (q.contains("max_panels")) {
    require(q["max_panels"].is_number_integer(), "max_panels must be an integer");
    rule.max_panels = q["max_panels"].get<long>();
  }
}

std::vector<int> effective_sizes(const RunConfig& c, const Experiment& e) {
  return c.sizes.empty() ? e.default_sizes : c.sizes;
}

std::vector<double> effective_thetas(const RunConfig& c, const Experiment& e) {
  std::vector<double> t = c.thetas.empty() ? e.default_thetas : c.thetas;
  for (double x : t) {
    const bool ok = e.closed ? (x >= e.theta_lo && x <= e.theta_hi) : (x > e.theta_lo && x < e.theta_hi);
    require(ok && std::isfinite(x), e.info.name + ": theta " + format_double(x) + " out of range " +
                                        (e.closed ? "[" : "(") + format_double(e.theta_lo) + ", " +
                                        format_double(e.theta_hi) + (e.closed ? "]" : ")"));
  }
  return t;
}

}  // namespace

RunConfig parse_config(const json& j) {
  require(j.is_object(), "config must be a JSON object");
  static const std::vector<std::string> known = {"experiment", "sizes",      "thetas",     "seed",
                                                 "quadrature", "output_dir", "format",     "log_t_min",
                                                 "log_t_max",  "tol",        "max_panels"};
  for (const auto& [key, _] : j.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), "unknown config key '" + key + "'");

  RunConfig c;
  require(j.contains("experiment") && j["experiment"].is_string(), "config needs a string 'experiment'");
  c.experiment = j["experiment"].get<std::string>();
  find_experiment(c.experiment);
  if (j.contains("sizes")) {
    require(j["sizes"].is_array(), "sizes must be a list");
    for (const auto& s : j["sizes"]) {
      require(s.is_number_integer(), "sizes must be integers");
      c.sizes.push_back(s.get<int>());
    }
  }
  if (j.contains("thetas")) {
    require(j["thetas"].is_array(), "thetas must be a list");
    for (const auto& t : j["thetas"]) c.thetas.push_back(number(t, "thetas"));
  }
  if (j.contains("seed")) {
    require(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0,
            "seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  read_quadrature(j, c.quadrature);
  if (j.contains("quadrature")) {
    require(j["quadrature"].is_object(), "quadrature must be an object");
    read_quadrature(j["quadrature"], c.quadrature);
  }
  if (j.contains("output_dir")) {
    require(j["output_dir"].is_string(), "output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("format")) {
    require(j["format"].is_string(), "format must be a string");
    c.format = j["format"].get<std::string>();
  }
  require(c.format == "csv" || c.format == "json" || c.format == "both", "format must be csv, json or both");
  c.quadrature.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

void apply_environment(RunConfig& config) {
  const char* s = std::getenv("FRACSPACE_SEED");
  if (!s || !*s) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  require(*end == '\0' && s[0] != '-', std::string("FRACSPACE_SEED is not an unsigned integer: ") + s);
  config.seed = v;
}

json canonical_config(const RunConfig& c) {
  const Experiment& e = find_experiment(c.experiment);
  json q = json::object();
  if (c.quadrature.log_t_min) q["log_t_min"] = *c.quadrature.log_t_min;
  if (c.quadrature.log_t_max) q["log_t_max"] = *c.quadrature.log_t_max;
  q["tol"] = c.quadrature.refinement_tol;
  q["max_panels"] = c.quadrature.max_panels;
  return {{"experiment", c.experiment},
          {"sizes", effective_sizes(c, e)},
          {"thetas", c.thetas.empty() ? e.default_thetas : c.thetas},
          {"seed", c.seed},
          {"quadrature", q}};
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_config(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

VerificationReport execute(const RunConfig& config) {
  const Experiment& e = find_experiment(config.experiment);
  config.quadrature.validate();
  const std::vector<int> sizes = effective_sizes(config, e);
  const std::vector<double> thetas = effective_thetas(config, e);
  VerificationReport r = e.body(config, sizes, thetas);
  r.experiment = e.info.name;
  json params = canonical_config(config);
  params.erase("experiment");
  r.parameters = std::move(params);
  r.provenance.seed = config.seed;
  r.provenance.config_hash = config_hash(config);
  r.provenance.version = FRACSPACE_VERSION;
  return r;
}

RunResult run(const RunConfig& config) {
  RunResult out{execute(config), {}};
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, config.output_dir.string() + ": " + ec.message());
  const std::string stem = config.experiment + "-" + out.report.provenance.config_hash;
  auto write = [&](const std::string& ext, const std::string& body) {
    const auto path = config.output_dir / (stem + ext);
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.files.push_back(path);
  };
  if (config.format != "json") write(".csv", out.report.to_csv());
  if (config.format != "csv") write(".json", out.report.to_json().dump(2) + "\n");
  return out;
}

int exit_status(const VerificationReport& report) { return report.all_pass() ? 0 : 1; }

int exit_status(const Error& error) {
  switch (error.code()) {
    case ErrorCode::UnknownExperiment:
    case ErrorCode::InvalidConfig:
    case ErrorCode::ThetaOutOfRange:
    case ErrorCode::InvalidGrid:
      return 2;
    default:
      return 1;
  }
}

json error_json(const Error& error) {
  return {{"error", std::string(code_name(error.code()))}, {"message", error.what()}};
}

}  // namespace fracspace
