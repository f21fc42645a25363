#ifndef OPENMAP_ULAM_HPP
#define OPENMAP_ULAM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "openmap/map_core.hpp"

namespace openmap {

struct Hole {
    double z = 0.0;
    double eps_L = 0.0;
    double eps_R = 0.0;
};

// Row-compressed sparse matrix; row i holds the conditional transition
// probabilities of bin i.
struct SparseMatrix {
    int n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    // w = v P (densities evolve by left multiplication)
    void left_multiply(const std::vector<double>& v, std::vector<double>& w) const;
    // w = P h (observables / survival functions)
    void right_multiply(const std::vector<double>& h, std::vector<double>& w) const;
    std::vector<double> row_sums() const;
};

// Ulam discretization of the transfer operator over a uniform grid on the
// dynamical core.  Entries are exact branch preimage lengths, no sampling.
// The punctured version scales row i by the surviving fraction |B_i \ H|/|B_i|
// with the hole edges snapped to a 16x sub-grid.
struct UlamOperator {
    const UnimodalMap* map = nullptr;
    int n_bins = 0;
    double grid_lo = 0.0, grid_hi = 0.0;
    SparseMatrix matrix;
    bool punctured = false;
    std::optional<Hole> hole;          // requested hole
    double hole_lo = 0.0, hole_hi = 0.0;  // snapped and clamped hole actually used

    double bin_width() const { return (grid_hi - grid_lo) / n_bins; }
    double edge(int i) const {
        return grid_lo + (grid_hi - grid_lo) * i / n_bins;
    }
};

UlamOperator build_ulam(const UnimodalMap& map, int n_bins,
                        std::optional<Hole> hole = std::nullopt);

// Local model of the density at a postcritical point q:
//   kappa_side |x-q|^{1/ell-1} + base_side  inside the spike window.
// The kappa are transported along the critical orbit from the fold at c
// (seeded by rho(c), with the geometric series over the periodic tail), since
// bin masses near an integrable singularity carry an O(1/sqrt(bins)) Ulam
// bias that poisons a direct local fit.  The log-log exponent is still fitted
// empirically as a diagnostic of the x^{1/ell-1} behaviour.
struct SpikeFit {
    double q = 0.0;
    double kappa_left = 0.0, base_left = 0.0;
    double kappa_right = 0.0, base_right = 0.0;
    double window_lo = 0.0, window_hi = 0.0;  // bin-aligned spike window
    double radius = 0.0;    // spike radius (20 bins by default)
    double exponent = 0.0;  // fitted log-log exponent on the spike side
    // false when the spike-to-background contrast over the usable fit window
    // is too weak for the regression to mean anything
    bool exponent_reliable = true;
};

struct InvariantDensity {
    int n_bins = 0;
    double grid_lo = 0.0, grid_hi = 0.0;
    double ell = 2.0;
    std::vector<double> mass;      // per-bin probability mass, sums to 1
    std::vector<SpikeFit> spikes;  // one per postcritical point inside the core
    double rho_c = 0.0;            // density at the critical point
    double norm = 1.0;             // total mass of the spike-patched model
    int iterations = 0;
    double residual = 0.0;         // L1 fixed-point residual

    double bin_width() const { return (grid_hi - grid_lo) / n_bins; }
    double density_at(double x) const;
};

// Dominant left fixed vector of the unpunctured operator by power iteration
// from the uniform vector, with the local spike models fitted afterwards.
InvariantDensity invariant_density(const UlamOperator& op,
                                   const CriticalOrbitData& orbit,
                                   double tol = 1e-12, int max_iter = 100000);

// (Re)fits the spike models and rho_c from the stored bin masses; used after
// loading a cached density.
void refit_spikes(InvariantDensity& density, const UnimodalMap& map,
                  const CriticalOrbitData& orbit);

// mu([a,b]) by bin quadrature with the closed-form spike model replacing the
// bins inside each spike window.
double mu_interval(const InvariantDensity& density, double a, double b);

// Inverse CDF sampling over the bin masses, piecewise uniform within a bin.
struct DensitySampler {
    const InvariantDensity* density;
    std::vector<double> cdf;
    explicit DensitySampler(const InvariantDensity& d);
    double operator()(double u) const;
};

struct PowerIterationResult {
    double eigenvalue = 0.0;
    std::vector<double> vec;  // normalized (L1) left eigenvector
    int iterations = 0;
    double residual = 0.0;
    bool total_escape = false;  // eigenvalue hit exactly 0 (everything escapes)
};

// Dominant eigenvalue and left eigenvector of a (sub)stochastic matrix.
PowerIterationResult dominant_left(const SparseMatrix& m, double tol = 1e-13,
                                   int max_iter = 200000);
// Dominant right eigenvector (survival profile), normalized to max 1.
std::vector<double> dominant_right(const SparseMatrix& m, double eigenvalue,
                                   double tol = 1e-12, int max_iter = 200000);

// Deterministic text serializations (17 significant digits).
std::string serialize_matrix(const UlamOperator& op, const std::string& header);
std::string serialize_density(const InvariantDensity& d, const std::string& header);
bool parse_matrix(const std::string& text, UlamOperator& op, std::string& header);
bool parse_density(const std::string& text, InvariantDensity& d, std::string& header);

}  // namespace openmap

#endif
