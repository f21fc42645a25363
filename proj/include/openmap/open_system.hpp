#ifndef OPENMAP_OPEN_SYSTEM_HPP
#define OPENMAP_OPEN_SYSTEM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "openmap/inducing.hpp"
#include "openmap/map_core.hpp"
#include "openmap/ulam.hpp"

namespace openmap {

struct HoleMeasures {
    double mu_H = 0.0;
    double mu_Hprime = 0.0;
    double ratio = 0.0;            // mu(H') / mu(H)
    double predicted_ratio = 0.0;  // 1 - lambda_z^{-1/ell} or 1
};

// mu(H_eps(z)) via the spike-aware quadrature and mu(H'_eps) summed over the
// induced-hole members.
HoleMeasures hole_measures(const UnimodalMap& map, const InducedMap& induced,
                           const InvariantDensity& density,
                           const CriticalOrbitData& orbit, double z, double eps_L,
                           double eps_R);

struct QuasiStationaryDensity {
    std::vector<double> mass;  // per-bin, sums to 1 over the survivor region
    double eigenvalue = 0.0;
    double residual = 0.0;
};

struct EscapeEstimate {
    double z = 0.0;
    double eps_L = 0.0, eps_R = 0.0;
    double hole_lo = 0.0, hole_hi = 0.0;  // effective (snapped, clamped) hole
    double mu_H = 0.0;
    double rate_spectral = -1.0;  // -1 when not computed
    bool total_escape = false;    // spectral eigenvalue 0 (rate infinite)
    double rate_mc = -1.0;
    double rate_mc_stderr = 0.0;
    double ratio = 0.0;           // primary rate / mu_H
};

// Escape rate as -log of the dominant eigenvalue of the punctured Ulam
// operator.  The hole must span at least 8 bins.
std::pair<double, QuasiStationaryDensity> escape_rate_spectral(
    const UnimodalMap& map, const CriticalOrbitData& orbit, double z, double eps_L,
    double eps_R, int n_bins);

struct McParams {
    std::int64_t n_samples = 100000;
    int horizon = 0;        // 0: choose from mu_H so survivors stay above ~200
    std::uint64_t seed = 1;
    int n_blocks = 20;      // block bootstrap granularity
    int n_boot = 100;       // bootstrap resamples
    int workers = 0;        // 0: hardware concurrency
};

// Escape rate from survivor counts of mu-distributed trajectories: the slope
// of log S(n) over [horizon/5, horizon], stderr by block bootstrap.
std::pair<double, double> escape_rate_mc(const UnimodalMap& map,
                                         const InvariantDensity& density, double z,
                                         double eps_L, double eps_R,
                                         const McParams& params);

enum class RateMethod { spectral, mc, both };

struct SweepParams {
    int n_bins = 1 << 15;
    RateMethod method = RateMethod::spectral;
    McParams mc;
    double side_ratio = 1.0;  // eps_L = side_ratio * eps_R
    int workers = 0;
};

struct TrichotomyReport {
    TrichotomyCase tri_case = TrichotomyCase::nonperiodic;
    double predicted = 1.0;
    std::vector<EscapeEstimate> observed;  // one per eps, descending
    double extrapolated = 0.0;   // intercept of ratio against eps^{1/ell} or eps
    double last_ratio = 0.0;     // raw ratio at the smallest eps
    double extrapolated_mc = 0.0;  // same fit on the MC ratios when available
};

// Runs the eps sweep at z, classifies z, fits the extrapolation.  Sweep points
// whose hole spans fewer than 8 bins get no spectral rate (MC only, when
// requested); the fit uses the valid points.
TrichotomyReport local_escape_sweep(const UnimodalMap& map,
                                    const CriticalOrbitData& orbit,
                                    const InvariantDensity& density, double z,
                                    const std::vector<double>& eps_grid,
                                    const SweepParams& params);

struct InducedEscapeCheck {
    double Lambda = 0.0;    // dominant eigenvalue of the punctured induced operator
    double nu_tau = 0.0;    // mean return time under the quasi-stationary measure
    double lhs = 0.0;       // -log Lambda
    double rhs = 0.0;       // nu_tau * escape rate of the full map
    double mu_Y_Hprime = 0.0;
    double rate_full = 0.0;
};

// Ulam surrogate of the punctured induced operator over Y with domain-aware
// bins; checks -log Lambda = nu(tau) * escape_rate.
InducedEscapeCheck induced_escape_check(const UnimodalMap& map,
                                        const CriticalOrbitData& orbit,
                                        const InducedMap& induced,
                                        const InvariantDensity& density, double z,
                                        double eps_L, double eps_R,
                                        int n_bins = 2048);

// Hole radii whose endpoints sit beta-deep inside the ladder images around z:
// one representative (eps_L, eps_R) per usable ladder depth.
std::vector<std::pair<double, double>> beta_allowable(const UnimodalMap& map,
                                                      const InducedMap& induced,
                                                      const ChainStructure& chains,
                                                      double z, double beta,
                                                      Interval eps_range);

// Predicate form: do both hole endpoints sit beta-deep in ladder intervals?
bool is_beta_allowable(const UnimodalMap& map, const InducedMap& induced,
                       const ChainStructure& chains, double z, double beta,
                       double eps_L, double eps_R);

}  // namespace openmap

#endif
