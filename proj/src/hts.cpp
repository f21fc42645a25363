#include "openmap/hts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "openmap/rng.hpp"

namespace openmap {

double HittingTimeSample::survivor_fraction(std::int64_t n) const {
    if (n > horizon)
        raise(ErrorKind::InsufficientHorizon,
              "survivor fraction queried beyond the censoring horizon");
    auto it = std::upper_bound(times.begin(), times.end(), static_cast<std::int32_t>(n));
    std::int64_t hit_by_n = it - times.begin();
    return static_cast<double>(n_samples - hit_by_n) / static_cast<double>(n_samples);
}

HittingTimeSample sample_hitting_times(const UnimodalMap& map,
                                       const InvariantDensity& density, double z,
                                       double eps_L, double eps_R,
                                       const HtsParams& params) {
    HittingTimeSample out;
    out.z = z;
    out.eps_L = eps_L;
    out.eps_R = eps_R;
    out.n_samples = params.n_samples;
    out.horizon = params.horizon;
    Interval core = map.core();
    out.hole_lo = std::max(core.lo, z - eps_L);
    out.hole_hi = std::min(core.hi, z + eps_R);

    std::vector<std::int32_t> hits(params.n_samples);
    DensitySampler sampler(density);
    int workers = params.workers > 0 ? params.workers
                                     : std::max(1u, std::thread::hardware_concurrency());
    double lo = out.hole_lo, hi = out.hole_hi;
    int horizon = params.horizon;
    auto run = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t t = begin; t < end; ++t) {
            CounterRng rng(params.seed, static_cast<std::uint64_t>(t));
            double x = sampler(rng.uniform());
            std::int32_t h = horizon + 1;
            for (int k = 1; k <= horizon; ++k) {
                x = map(x);
                if (x > lo && x < hi) { h = k; break; }
            }
            hits[t] = h;
        }
    };
    if (workers == 1) {
        run(0, params.n_samples);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (params.n_samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            std::int64_t b = w * chunk, e = std::min<std::int64_t>(params.n_samples, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run, b, e);
        }
        for (auto& th : pool) th.join();
    }

    for (auto h : hits) {
        if (h > horizon) ++out.n_censored;
        else out.times.push_back(h);
    }
    std::sort(out.times.begin(), out.times.end());
    return out;
}

HtsEstimate estimate_L(const HittingTimeSample& sample, double mu_H, double alpha,
                       double t) {
    if (!(mu_H > 0)) raise(ErrorKind::DomainError, "estimate_L needs mu_H > 0");
    HtsEstimate est;
    est.alpha = alpha;
    est.t = t;
    est.n_eps = static_cast<std::int64_t>(std::floor(t * std::pow(mu_H, -alpha)));
    if (est.n_eps > sample.horizon)
        raise(ErrorKind::InsufficientHorizon,
              "n_eps = floor(t mu_H^-alpha) exceeds the sampling horizon");
    double q = sample.survivor_fraction(est.n_eps);
    est.survivor_frac = q;
    double denom = t * std::pow(mu_H, 1.0 - alpha);
    est.L_value = q > 0 ? -std::log(q) / denom : std::numeric_limits<double>::infinity();
    if (q > 0 && q < 1) {
        double sigma_q = std::sqrt(q * (1 - q) / static_cast<double>(sample.n_samples));
        est.stderr_ = sigma_q / (q * denom);
    }
    return est;
}

double extremal_index(const HittingTimeSample& sample, double mu_H) {
    if (!(mu_H > 0)) return 0.0;  // empty hole: survivor fraction 1
    std::int64_t n = static_cast<std::int64_t>(std::floor(1.0 / mu_H));
    if (n > sample.horizon)
        raise(ErrorKind::InsufficientHorizon, "horizon below floor(1/mu_H)");
    double q = sample.survivor_fraction(n);
    return q > 0 ? -std::log(q) : std::numeric_limits<double>::infinity();
}

}  // namespace openmap
