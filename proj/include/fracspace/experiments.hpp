#pragma once

#include "fracspace/discrete_operators.hpp"
#include "fracspace/k_functional.hpp"
#include "fracspace/report.hpp"
#include "fracspace/retractions.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fracspace {

/// Seeded probes u_j = j^{-1.5} xi_j, xi_j uniform on [-1, 1].
std::vector<CoeffVector> decaying_probes(const SpectralModel& model, Rng& rng, int count);

/// Per (theta, probe) ratio interp_norm^2 / (I(theta) frac_norm(theta)^2),
/// pass iff |ratio - 1| <= 1e-3.
VerificationReport lemma_fps_sweep(const SpectralModel& model, const std::vector<double>& thetas,
                                   const std::vector<CoeffVector>& probes, const QuadratureRule& rule = {},
                                   Execution exec = Execution::parallel);

/// Both reiteration identities through the model with eigenvalues
/// lambda^{1/2}, plus the set identity
/// ||u||_{D(A^{(1+theta)/2})} = ||A^{1/2} u||_{D(A^{theta/2})} (1e-12).
/// Interpolation cells are skipped at theta = 1, which only checks the
/// set identity.
VerificationReport reiteration_check(const SpectralModel& model, const std::vector<double>& thetas,
                                     const std::vector<CoeffVector>& probes, const QuadratureRule& rule = {},
                                     Execution exec = Execution::parallel);

/// A function on (0,1) with its sine coefficients <u, sqrt(2) sin(j pi x)>.
struct ProbeFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(long)> sine_coeff;
};

/// {1, sin(pi x), x(1-x)} with analytic sine coefficients.
std::vector<ProbeFunction> probe_family();
ProbeFunction constant_one();

enum class SeriesClass { converged, convergent, log_divergent, power_divergent };
std::string to_string(SeriesClass c);

struct CriticalityProfile {
  double theta = 0.0;
  std::vector<std::size_t> ladder;    // N = 2^4 .. 2^max
  std::vector<double> partial_sums;   // S_N = sum_{j<=N} (j pi)^{4 theta} |u_j|^2
  SeriesClass classification = SeriesClass::convergent;
  double fitted_exponent = 0.0;       // slope of log(S_{2N} - S_N) vs log N
  double log_slope = 0.0;             // slope of S_N vs ln N
  double log_r2 = 0.0;
};

/// Partial sums of the D(A^theta) series for `probe` against
/// lambda_j = (j pi)^2, N = 2^4 .. n_modes (a power of two, >= 2^6), and
/// classification from the upper half of the ladder:
///   converged        increments <= 1e-6 S_N
///   convergent       increment exponent < -0.05 and every increment ratio < 1
///   log-divergent    |exponent| <= 0.05 and R^2(S_N vs ln N) > 0.999
///   power-divergent  exponent > 0.05
/// Throws AmbiguousClassification otherwise.
std::vector<CriticalityProfile> criticality_scan(std::size_t n_modes, const std::vector<double>& thetas,
                                                 const ProbeFunction& probe = constant_one(),
                                                 Execution exec = Execution::parallel);

/// Membership of D(A^theta): the series is finite.
inline bool is_member(const CriticalityProfile& p) {
  return p.classification == SeriesClass::converged || p.classification == SeriesClass::convergent;
}

struct WeightFunctional {
  std::string probe;
  std::vector<int> levels;          // k: cutoff eps_k = 2^{-k}
  std::vector<double> values;       // int_{eps_k}^{1 - eps_k} |u|^2 / (x (1 - x)) dx
  std::vector<double> increments;   // values[k+1] - values[k]
  bool divergence_flag = false;
};

/// rho = x(1-x) weight integral on meshes graded geometrically (ratio 1/2)
/// toward both endpoints, 10-point Gauss-Legendre per cell. Divergent iff
/// the last five successive increment ratios all exceed 0.9.
WeightFunctional weight_test(const ProbeFunction& probe, int k_min = 8, int k_max = 20);

/// Per grid and theta, r(u) = ||A_S^theta u|| / ||A^theta u|| over the 5
/// lowest Stokes eigenvectors and 20 random kernel vectors. Grid cells
/// record min/max ratio; ladder cells pass iff both bounds drift by less
/// than a factor 2. Theta may include the endpoints 0 and 1.
VerificationReport stokes_equivalence_study(const std::vector<int>& grids, const std::vector<double>& thetas,
                                            std::uint64_t seed = 42, Execution exec = Execution::parallel);

/// Intersection check for the pair (g1, g2) on a 2D grid with the harmonic
/// lift, thetas in (1/2, 1); interpolation runs at 2 theta - 1 on (H^1, H^2).
VerificationReport halft1_check(const GridDomain& domain, const std::vector<double>& thetas,
                                std::uint64_t seed = 42, const QuadratureRule& rule = {},
                                Execution exec = Execution::parallel);

/// Identity on ker D_h for `identity_probes` random kernel vectors, plus
/// h_bound / d_bound per grid and their drift across the ladder.
VerificationReport stokes_retraction_study(const std::vector<int>& grids, std::uint64_t seed = 42,
                                           int identity_probes = 100);

}  // namespace fracspace
