#ifndef OPENMAP_HTS_HPP
#define OPENMAP_HTS_HPP

#include <cstdint>
#include <vector>

#include "openmap/map_core.hpp"
#include "openmap/ulam.hpp"

namespace openmap {

struct HittingTimeSample {
    double z = 0.0;
    double eps_L = 0.0, eps_R = 0.0;
    double hole_lo = 0.0, hole_hi = 0.0;
    std::int64_t n_samples = 0;
    int horizon = 0;
    // first hitting times r >= 1, censored entries recorded separately
    std::vector<std::int32_t> times;   // sorted
    std::int64_t n_censored = 0;

    // empirical P(r > n), censoring-aware (censored trajectories have r > horizon)
    double survivor_fraction(std::int64_t n) const;
};

struct HtsParams {
    std::int64_t n_samples = 100000;
    int horizon = 10000;
    std::uint64_t seed = 1;
    int workers = 0;
};

// mu-distributed initial points; r = inf{k >= 1 : f^k(x) in H}.
HittingTimeSample sample_hitting_times(const UnimodalMap& map,
                                       const InvariantDensity& density, double z,
                                       double eps_L, double eps_R,
                                       const HtsParams& params);

struct HtsEstimate {
    double alpha = 0.0;
    double t = 0.0;
    std::int64_t n_eps = 0;       // floor(t mu_H^{-alpha})
    double survivor_frac = 0.0;
    double L_value = 0.0;
    double stderr_ = 0.0;
    double predicted = 0.0;
};

// L = -log P(r > n_eps) / (t mu_H^{1-alpha}); stderr by the binomial delta
// method on the survivor fraction.
HtsEstimate estimate_L(const HittingTimeSample& sample, double mu_H, double alpha,
                       double t);

// -log of the fraction with r > floor(1/mu_H): the alpha = t = 1 case.
double extremal_index(const HittingTimeSample& sample, double mu_H);

}  // namespace openmap

#endif
