#include "openmap/open_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "openmap/rng.hpp"

namespace openmap {

namespace {

double eval_n(const UnimodalMap& map, double x, int n) {
    for (int i = 0; i < n; ++i) x = map(x);
    return x;
}

struct LinFit {
    double slope = 0.0, intercept = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = static_cast<int>(x.size());
    for (int i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinFit f;
    double det = m * sxx - sx * sx;
    if (m >= 2 && std::fabs(det) > 1e-300) {
        f.slope = (m * sxy - sx * sy) / det;
        f.intercept = (sy * sxx - sx * sxy) / det;
    } else if (m >= 1) {
        f.intercept = sy / m;
    }
    return f;
}

}  // namespace

HoleMeasures hole_measures(const UnimodalMap& map, const InducedMap& induced,
                           const InvariantDensity& density,
                           const CriticalOrbitData& orbit, double z, double eps_L,
                           double eps_R) {
    Interval core = map.core();
    bool left_open = z - eps_L > core.lo, right_open = z + eps_R < core.hi;
    if (left_open && right_open) {
        double r = eps_L / eps_R;
        if (r < 0.1 - 1e-12 || r > 10.0 + 1e-12)
            raise(ErrorKind::DomainError, "eps_L/eps_R must stay within [1/10, 10]");
    }
    HoleMeasures hm;
    hm.mu_H = mu_interval(density, z - eps_L, z + eps_R);
    InducedHole hp = induced_hole(map, induced, z, eps_L, eps_R);
    double s = 0.0;
    for (const auto& mbr : hp.members) s += mu_interval(density, mbr.lo, mbr.hi);
    hm.mu_Hprime = s;
    hm.ratio = hm.mu_H > 0 ? hm.mu_Hprime / hm.mu_H : 0.0;
    PointClass pc = classify_point(map, orbit, z);
    hm.predicted_ratio = pc.tri_case == TrichotomyCase::periodic_in_orbit
                             ? pc.predicted_ratio(map.ell())
                             : 1.0;
    return hm;
}

std::pair<double, QuasiStationaryDensity> escape_rate_spectral(
    const UnimodalMap& map, const CriticalOrbitData& orbit, double z, double eps_L,
    double eps_R, int n_bins) {
    (void)orbit;
    Interval core = map.core();
    double h = core.length() / n_bins;
    double lo = std::max(core.lo, z - eps_L), hi = std::min(core.hi, z + eps_R);
    if (hi <= lo) {
        // empty hole: the closed system, eigenvalue 1
        UlamOperator closed = build_ulam(map, n_bins);
        PowerIterationResult pc = dominant_left(closed.matrix);
        QuasiStationaryDensity q0;
        q0.eigenvalue = pc.eigenvalue;
        q0.mass = std::move(pc.vec);
        q0.residual = pc.residual;
        return {0.0, std::move(q0)};
    }
    if ((hi - lo) / h < 8.0)
        raise(ErrorKind::HoleTooSmall, "hole spans fewer than 8 bins");
    UlamOperator op = build_ulam(map, n_bins, Hole{z, eps_L, eps_R});
    PowerIterationResult pr = dominant_left(op.matrix);
    QuasiStationaryDensity qsd;
    qsd.eigenvalue = pr.eigenvalue;
    qsd.mass = std::move(pr.vec);
    qsd.residual = pr.residual;
    if (pr.total_escape) {
        return {std::numeric_limits<double>::infinity(), std::move(qsd)};
    }
    return {-std::log(pr.eigenvalue), std::move(qsd)};
}

namespace {

// First-hit kernel: returns, per trajectory, the smallest k >= k_start with
// f^k(x0) in the hole, or horizon+1 when censored.
std::vector<std::int32_t> first_hits(const UnimodalMap& map,
                                     const InvariantDensity& density,
                                     double hole_lo, double hole_hi, int k_start,
                                     std::int64_t n_samples, int horizon,
                                     std::uint64_t seed, int workers) {
    std::vector<std::int32_t> hit(n_samples);
    DensitySampler sampler(density);
    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    auto run = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t t = begin; t < end; ++t) {
            CounterRng rng(seed, static_cast<std::uint64_t>(t));
            double x = sampler(rng.uniform());
            std::int32_t h = horizon + 1;
            if (k_start == 0 && x > hole_lo && x < hole_hi) h = 0;
            if (h > horizon) {
                for (int k = 1; k <= horizon; ++k) {
                    x = map(x);
                    if (x > hole_lo && x < hole_hi) {
                        h = k;
                        break;
                    }
                }
            }
            hit[t] = h;
        }
    };
    if (workers == 1) {
        run(0, n_samples);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (n_samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            std::int64_t b = w * chunk, e = std::min(n_samples, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return hit;
}

double slope_from_survivors(const std::vector<double>& logS, int n0, int n1) {
    std::vector<double> xs, ys;
    for (int n = n0; n <= n1; ++n) {
        xs.push_back(n);
        ys.push_back(logS[n]);
    }
    return linear_fit(xs, ys).slope;
}

}  // namespace

std::pair<double, double> escape_rate_mc(const UnimodalMap& map,
                                         const InvariantDensity& density, double z,
                                         double eps_L, double eps_R,
                                         const McParams& params) {
    if (params.n_samples < 10000)
        raise(ErrorKind::DomainError, "escape_rate_mc needs n_samples >= 1e4");
    Interval core = map.core();
    double hole_lo = std::max(core.lo, z - eps_L);
    double hole_hi = std::min(core.hi, z + eps_R);
    double muH = mu_interval(density, hole_lo, hole_hi);
    int horizon = params.horizon;
    if (horizon <= 0) {
        if (muH <= 0.0) horizon = 1000;
        else horizon = std::max(50, static_cast<int>(
            std::log(static_cast<double>(params.n_samples) / 200.0) / muH));
    }

    auto hits = first_hits(map, density, hole_lo, hole_hi, 0, params.n_samples,
                           horizon, params.seed, params.workers);

    // survivor curve: S(n) = #{trajectories alive for steps 0..n-1} = #{h >= n}
    std::vector<std::int64_t> deaths(horizon + 2, 0);
    for (auto h : hits) deaths[std::min<std::int32_t>(h, horizon + 1)]++;
    std::vector<double> S(horizon + 1);
    std::int64_t alive = params.n_samples;
    for (int n = 0; n <= horizon; ++n) {
        if (n > 0) alive -= deaths[n - 1];
        S[n] = static_cast<double>(alive);
    }

    if (std::fabs(S[horizon] - static_cast<double>(params.n_samples)) < 0.5)
        return {0.0, 0.0};  // empty hole: nobody ever escapes

    int n0 = std::max(1, horizon / 5);
    if (S[horizon] < 100.0)
        raise(ErrorKind::TooFewSurvivors, "fewer than 100 survivors in the fit window");
    std::vector<double> logS(horizon + 1);
    for (int n = 0; n <= horizon; ++n) logS[n] = std::log(std::max(S[n], 0.5));
    double rate = -slope_from_survivors(logS, n0, horizon);

    // block bootstrap over trajectory blocks
    int nb = params.n_blocks;
    std::vector<std::vector<std::int64_t>> block_deaths(
        nb, std::vector<std::int64_t>(horizon + 2, 0));
    std::int64_t per = (params.n_samples + nb - 1) / nb;
    for (std::int64_t t = 0; t < params.n_samples; ++t)
        block_deaths[std::min<std::int64_t>(t / per, nb - 1)]
                    [std::min<std::int32_t>(hits[t], horizon + 1)]++;
    std::vector<double> boot_rates;
    CounterRng brng(params.seed, 0xB007ull);
    std::vector<std::int64_t> agg(horizon + 2);
    for (int b = 0; b < params.n_boot; ++b) {
        std::fill(agg.begin(), agg.end(), 0);
        std::int64_t tot = 0;
        for (int k = 0; k < nb; ++k) {
            int pick = static_cast<int>(brng.below(nb));
            for (int n = 0; n <= horizon + 1; ++n) agg[n] += block_deaths[pick][n];
        }
        for (int n = 0; n <= horizon + 1; ++n) tot += agg[n];
        std::vector<double> logSb(horizon + 1);
        std::int64_t al = tot;
        bool ok = true;
        for (int n = 0; n <= horizon; ++n) {
            if (n > 0) al -= agg[n - 1];
            if (al < 1) { ok = false; break; }
            logSb[n] = std::log(static_cast<double>(al));
        }
        if (ok) boot_rates.push_back(-slope_from_survivors(logSb, n0, horizon));
    }
    double se = 0.0;
    if (boot_rates.size() > 3) {
        double mean = 0.0;
        for (double r : boot_rates) mean += r;
        mean /= boot_rates.size();
        for (double r : boot_rates) se += (r - mean) * (r - mean);
        se = std::sqrt(se / (boot_rates.size() - 1));
    }
    return {rate, se};
}

TrichotomyReport local_escape_sweep(const UnimodalMap& map,
                                    const CriticalOrbitData& orbit,
                                    const InvariantDensity& density, double z,
                                    const std::vector<double>& eps_grid,
                                    const SweepParams& params) {
    if (eps_grid.size() < 1)
        raise(ErrorKind::DomainError, "eps grid must not be empty");
    PointClass pc = classify_point(map, orbit, z);
    TrichotomyReport rep;
    rep.tri_case = pc.tri_case;
    rep.predicted = pc.predicted_ratio(map.ell());

    Interval core = map.core();
    for (double eps : eps_grid) {
        double eps_R = eps, eps_L = eps * params.side_ratio;
        EscapeEstimate est;
        est.z = z;
        est.eps_L = eps_L;
        est.eps_R = eps_R;
        est.hole_lo = std::max(core.lo, z - eps_L);
        est.hole_hi = std::min(core.hi, z + eps_R);
        est.mu_H = mu_interval(density, est.hole_lo, est.hole_hi);
        if (params.method != RateMethod::mc) {
            try {
                auto [rate, qsd] = escape_rate_spectral(map, orbit, z, eps_L, eps_R,
                                                        params.n_bins);
                est.rate_spectral = rate;
                if (std::isinf(rate)) est.total_escape = true;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::HoleTooSmall) throw;
            }
        }
        if (params.method != RateMethod::spectral) {
            McParams mcp = params.mc;
            mcp.workers = params.workers;
            auto [r, se] = escape_rate_mc(map, density, z, eps_L, eps_R, mcp);
            est.rate_mc = r;
            est.rate_mc_stderr = se;
        }
        double prim = est.rate_spectral >= 0 ? est.rate_spectral : est.rate_mc;
        est.ratio = est.mu_H > 0 && prim >= 0 ? prim / est.mu_H : 0.0;
        rep.observed.push_back(est);
    }
    std::sort(rep.observed.begin(), rep.observed.end(),
              [](const EscapeEstimate& a, const EscapeEstimate& b) {
                  return a.eps_R > b.eps_R;
              });

    // extrapolation variable: eps^{1/ell} in the periodic-in-orbit case
    auto fit_ratios = [&](bool mc) {
        std::vector<double> xs, ys;
        for (const auto& e : rep.observed) {
            double r = mc ? e.rate_mc : e.rate_spectral;
            if (r < 0 || e.mu_H <= 0 || std::isinf(r)) continue;
            double x = pc.tri_case == TrichotomyCase::periodic_in_orbit
                           ? std::pow(e.eps_R, 1.0 / map.ell())
                           : e.eps_R;
            xs.push_back(x);
            ys.push_back(r / e.mu_H);
        }
        if (xs.empty()) return 0.0;
        if (xs.size() == 1) return ys[0];
        return linear_fit(xs, ys).intercept;
    };
    rep.extrapolated = fit_ratios(params.method == RateMethod::mc);
    if (params.method == RateMethod::both) rep.extrapolated_mc = fit_ratios(true);
    for (auto it = rep.observed.rbegin(); it != rep.observed.rend(); ++it) {
        if (it->ratio > 0) { rep.last_ratio = it->ratio; break; }
    }
    return rep;
}

InducedEscapeCheck induced_escape_check(const UnimodalMap& map,
                                        const CriticalOrbitData& orbit,
                                        const InducedMap& induced,
                                        const InvariantDensity& density, double z,
                                        double eps_L, double eps_R, int n_bins) {
    InducedHole hp = induced_hole(map, induced, z, eps_L, eps_R);

    // binning: every (split) domain gets at least one bin; pieces inside the
    // hole are punctured wholesale, so the puncture is exact at domain level
    struct Bin {
        double lo, hi;
        int tau;
        bool in_hole;
    };
    std::vector<Bin> bins;
    double target_h = induced.Y.length() / n_bins;
    auto add_bins = [&](double lo, double hi, int tau, bool in_hole) {
        double len = hi - lo;
        if (len <= 0) return;
        int k = std::max(1, static_cast<int>(std::ceil(len / target_h)));
        if (len < 1e-12) k = 1;
        for (int i = 0; i < k; ++i)
            bins.push_back(Bin{lo + len * i / k, lo + len * (i + 1) / k, tau, in_hole});
    };
    // split bookkeeping: member/complement pieces replace their parent domain
    std::vector<char> replaced(induced.domains.size(), 0);
    for (const auto& mbr : hp.members) replaced[mbr.domain_index] = 1;
    for (const auto& mbr : hp.complements) replaced[mbr.domain_index] = 1;
    for (std::size_t i = 0; i < induced.domains.size(); ++i) {
        if (!replaced[i])
            add_bins(induced.domains[i].lo, induced.domains[i].hi,
                     induced.domains[i].tau, false);
    }
    for (const auto& mbr : hp.members)
        add_bins(mbr.lo, mbr.hi, induced.domains[mbr.domain_index].tau, true);
    for (const auto& mbr : hp.complements)
        add_bins(mbr.lo, mbr.hi, induced.domains[mbr.domain_index].tau, false);
    std::sort(bins.begin(), bins.end(),
              [](const Bin& a, const Bin& b) { return a.lo < b.lo; });

    int nb = static_cast<int>(bins.size());
    std::vector<double> blo(nb), bhi(nb);
    for (int i = 0; i < nb; ++i) {
        blo[i] = bins[i].lo;
        bhi[i] = bins[i].hi;
    }

    SparseMatrix P;
    P.n = nb;
    P.row_ptr.assign(nb + 1, 0);
    for (int i = 0; i < nb; ++i) {
        if (!bins[i].in_hole) {
            double u = bins[i].lo, v = bins[i].hi;
            int tau = bins[i].tau;
            double fu = eval_n(map, u, tau), fv = eval_n(map, v, tau);
            bool inc = fu < fv;
            double ylo = std::min(fu, fv), yhi = std::max(fu, fv);
            // walk target bins overlapping [ylo, yhi]
            int j0 = static_cast<int>(std::lower_bound(bhi.begin(), bhi.end(), ylo) -
                                      bhi.begin());
            double prev_x = inc ? u : v;
            double prev_y = ylo;
            for (int j = j0; j < nb && blo[j] < yhi - 1e-16; ++j) {
                double edge = std::min(bhi[j], yhi);
                double x_next;
                if (edge >= yhi - 1e-16) {
                    x_next = inc ? v : u;
                } else {
                    // monotone preimage of `edge` under f^tau within [u, v]
                    double a = u, b = v;
                    for (int it = 0; it < 100; ++it) {
                        double mid = 0.5 * (a + b);
                        if (mid <= a || mid >= b) break;
                        if ((eval_n(map, mid, tau) < edge) == inc) a = mid;
                        else b = mid;
                    }
                    x_next = 0.5 * (a + b);
                }
                double overlap = edge - std::max(blo[j], prev_y);
                if (overlap > 0) {
                    double seg = std::fabs(x_next - prev_x);
                    if (seg > 0) {
                        P.col.push_back(j);
                        P.val.push_back(seg / (v - u));
                    }
                }
                prev_x = x_next;
                prev_y = edge;
            }
        }
        P.row_ptr[i + 1] = static_cast<std::int64_t>(P.col.size());
    }

    PowerIterationResult pr = dominant_left(P);
    InducedEscapeCheck out;
    out.Lambda = pr.eigenvalue;
    out.lhs = pr.total_escape ? std::numeric_limits<double>::infinity()
                              : -std::log(pr.eigenvalue);

    // nu = (left eigenvector) x (right eigenvector), the invariant measure of
    // the surviving induced system
    std::vector<double> right = dominant_right(P, pr.eigenvalue);
    double norm = 0.0;
    std::vector<double> nu(nb, 0.0);
    for (int i = 0; i < nb; ++i) {
        nu[i] = pr.vec[i] * right[i];
        norm += nu[i];
    }
    double nutau = 0.0;
    if (norm > 0)
        for (int i = 0; i < nb; ++i) nutau += bins[i].tau * nu[i] / norm;
    out.nu_tau = nutau;

    // full-map escape rate, independently from the punctured Ulam operator
    out.rate_full = -1.0;
    out.rhs = -1.0;
    try {
        auto [rate_full, qsd] =
            escape_rate_spectral(map, orbit, z, eps_L, eps_R, 1 << 15);
        out.rate_full = rate_full;
        out.rhs = nutau * rate_full;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::HoleTooSmall) throw;
    }

    double muY = 0.0;
    for (const auto& compp : induced.Y.components)
        muY += mu_interval(density, compp.lo, compp.hi);
    double muHp = 0.0;
    for (const auto& mbr : hp.members) muHp += mu_interval(density, mbr.lo, mbr.hi);
    out.mu_Y_Hprime = muY > 0 ? muHp / muY : 0.0;
    return out;
}

std::vector<std::pair<double, double>> beta_allowable(const UnimodalMap& map,
                                                      const InducedMap& induced,
                                                      const ChainStructure& chains,
                                                      double z, double beta,
                                                      Interval eps_range) {
    if (!(beta > 0.0 && beta < 0.5))
        raise(ErrorKind::DomainError, "beta must lie in (0, 1/2)");
    (void)induced;
    std::vector<std::pair<double, double>> out;
    const auto& L = chains.ladder_left;
    const auto& R = chains.ladder_right;
    std::size_t depths = std::min(L.size(), R.size());
    Interval core = map.core();
    bool left_exists = z - 1e-15 > core.lo;
    bool right_exists = z + 1e-15 < core.hi;
    for (std::size_t k = 0; k + 1 < depths; ++k) {
        // ladder interval at depth k+1: (a_{k+1}, a_k) on the left, mirrored right
        double midL = 0.5 * (L[k] + L[k + 1]);
        double midR = 0.5 * (R[k] + R[k + 1]);
        double eL = left_exists ? z - midL : (right_exists ? midR - z : 0.0);
        double eR = right_exists ? midR - z : eL;
        if (!left_exists) eL = eR;
        if (eR <= 0 || eL <= 0) continue;
        if (eR < eps_range.lo || eR > eps_range.hi) continue;
        out.push_back({eL, eR});
    }
    return out;
}

bool is_beta_allowable(const UnimodalMap& map, const InducedMap& induced,
                       const ChainStructure& chains, double z, double beta,
                       double eps_L, double eps_R) {
    (void)induced;
    Interval core = map.core();
    auto deep_in_ladder = [&](double pt, const std::vector<double>& ladder) {
        for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
            double lo = std::min(ladder[k], ladder[k + 1]);
            double hi = std::max(ladder[k], ladder[k + 1]);
            double w = hi - lo;
            if (pt >= lo + beta * w && pt <= hi - beta * w) return true;
        }
        return false;
    };
    bool ok = true;
    if (z - eps_L > core.lo) ok = ok && deep_in_ladder(z - eps_L, chains.ladder_left);
    if (z + eps_R < core.hi) ok = ok && deep_in_ladder(z + eps_R, chains.ladder_right);
    return ok;
}

}  // namespace openmap
