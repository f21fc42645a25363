// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "openmap/hts.hpp"
#include "openmap/inducing.hpp"
#include "openmap/map_core.hpp"
#include "openmap/open_system.hpp"
#include "openmap/partition.hpp"
#include "openmap/rng.hpp"
#include "openmap/ulam.hpp"

using namespace openmap;

namespace {

int g_failures = 0;

void report(int n, const std::string& what, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", n,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::vector<double> geometric_grid(double start, double factor, int count) {
    std::vector<double> g;
    double e = start;
    for (int i = 0; i < count; ++i) {
        g.push_back(e);
        e *= factor;
    }
    return g;
}

struct LinFit {
    double slope, intercept;
};

LinFit fit(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = static_cast<int>(x.size());
    for (int i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = m * sxx - sx * sx;
    if (m < 2 || std::fabs(det) < 1e-300) return {0.0, m ? sy / m : 0.0};
    return {(m * sxy - sx * sy) / det, (sy * sxx - sx * sxy) / det};
}

char buf[256];

}  // namespace

int main() {
    auto t_start = std::chrono::steady_clock::now();
    const double kFactor = 1.0 / std::sqrt(10.0);

    UnimodalMap map4(4.0, 2.0);
    CriticalOrbitData orbit4 = critical_orbit(map4);
    UlamOperator op14 = build_ulam(map4, 1 << 14);
    InvariantDensity dens14 = invariant_density(op14, orbit4);
    UlamOperator op15 = build_ulam(map4, 1 << 15);
    InvariantDensity dens15 = invariant_density(op15, orbit4);

    // ---- criterion 1: trichotomy case 3 at z = 0
    {
        auto t0 = std::chrono::steady_clock::now();
        SweepParams sp;
        sp.n_bins = 1 << 15;
        TrichotomyReport rep = local_escape_sweep(
            map4, orbit4, dens15, 0.0, geometric_grid(1e-2, kFactor, 5), sp);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::snprintf(buf, sizeof buf, "extrapolated %.4f vs 0.50, %.1fs",
                      rep.extrapolated, secs);
        report(1, "local escape rate at z=0 (periodic in orbit)",
               std::fabs(rep.extrapolated - 0.50) <= 0.05 && secs < 300.0, buf);
    }

    // ---- criterion 2: case 2 at the period-2 point and the fixed point 3/4
    {
        SweepParams sp;
        sp.n_bins = 1 << 15;
        double z2 = (5.0 - std::sqrt(5.0)) / 8.0;
        TrichotomyReport r2 = local_escape_sweep(map4, orbit4, dens15, z2,
                                                 geometric_grid(1e-2, kFactor, 5), sp);
        TrichotomyReport r3 = local_escape_sweep(map4, orbit4, dens15, 0.75,
                                                 geometric_grid(1e-2, kFactor, 5), sp);
        std::snprintf(buf, sizeof buf, "period-2: %.4f vs 0.75; z=3/4: %.4f vs 0.50",
                      r2.extrapolated, r3.extrapolated);
        report(2, "local escape rate at periodic z off the orbit",
               std::fabs(r2.extrapolated - 0.75) <= 0.05 &&
                   std::fabs(r3.extrapolated - 0.50) <= 0.05,
               buf);
    }

    // ---- criterion 3: case 1 at z = 0.3
    {
        SweepParams sp;
        sp.n_bins = 1 << 15;
        TrichotomyReport rep = local_escape_sweep(map4, orbit4, dens15, 0.3,
                                                  geometric_grid(1e-2, kFactor, 5), sp);
        std::snprintf(buf, sizeof buf, "extrapolated %.4f vs 1.00", rep.extrapolated);
        report(3, "local escape rate at nonperiodic z",
               std::fabs(rep.extrapolated - 1.00) <= 0.07, buf);
    }

    InducingDomain Y0 = build_inducing_domain(map4, orbit4, 0.0, 3);
    InducedMap im0 = first_return_map(map4, Y0, 80);

    // ---- criterion 4: hole-measure ratio at eps = 1e-4
    {
        HoleMeasures hm = hole_measures(map4, im0, dens15, orbit4, 0.0, 1e-4, 1e-4);
        std::snprintf(buf, sizeof buf, "mu(H')/mu(H) = %.4f vs 0.50", hm.ratio);
        report(4, "induced-hole measure ratio", std::fabs(hm.ratio - 0.5) <= 0.05, buf);
    }

    // ---- criterion 5: induced escape relation at eps = 1e-3
    {
        InducedEscapeCheck c =
            induced_escape_check(map4, orbit4, im0, dens15, 0.0, 0.0, 1e-3, 2048);
        double rel = std::fabs(c.lhs - c.rhs) / c.lhs;
        std::snprintf(buf, sizeof buf,
                      "-logLambda %.5e vs nu(tau)*rate %.5e, rel gap %.3f", c.lhs,
                      c.rhs, rel);
        report(5, "induced escape relation", rel < 0.1, buf);
    }

    // ---- criterion 6: hitting-time statistics
    {
        std::vector<double> xs, Ls;
        for (double eps : geometric_grid(1e-2, kFactor, 5)) {
            double muH = mu_interval(dens15, 0.0, eps);
            HtsParams hp;
            hp.n_samples = 1000000;
            hp.horizon = static_cast<int>(5.0 / muH) + 2;
            hp.seed = 20240;
            HittingTimeSample s =
                sample_hitting_times(map4, dens15, 0.0, eps, eps, hp);
            Ls.push_back(estimate_L(s, muH, 1.0, 1.0).L_value);
            xs.push_back(std::sqrt(eps));
        }
        double L0 = fit(xs, Ls).intercept;

        std::vector<double> xs3, Ls3;
        for (double eps : geometric_grid(1e-2, kFactor, 3)) {
            double muH = mu_interval(dens15, 0.3 - eps, 0.3 + eps);
            HtsParams hp;
            hp.n_samples = 1000000;
            hp.horizon = static_cast<int>(5.0 / muH) + 2;
            hp.seed = 20241;
            HittingTimeSample s =
                sample_hitting_times(map4, dens15, 0.3, eps, eps, hp);
            Ls3.push_back(estimate_L(s, muH, 1.0, 1.0).L_value);
            xs3.push_back(eps);
        }
        double L3 = fit(xs3, Ls3).intercept;

        // alpha robustness at z=0, eps=1e-3
        double muH = mu_interval(dens15, 0.0, 1e-3);
        HtsParams hp;
        hp.n_samples = 1000000;
        hp.horizon = static_cast<int>(5.0 * std::pow(muH, -1.5)) + 2;
        hp.seed = 20242;
        HittingTimeSample s = sample_hitting_times(map4, dens15, 0.0, 1e-3, 1e-3, hp);
        HtsEstimate e08 = estimate_L(s, muH, 0.8, 1.0);
        HtsEstimate e10 = estimate_L(s, muH, 1.0, 1.0);
        HtsEstimate e15 = estimate_L(s, muH, 1.5, 1.0);
        bool alpha_ok =
            std::fabs(e08.L_value - e10.L_value) <= e08.stderr_ + e10.stderr_ + 0.1 &&
            std::fabs(e15.L_value - e10.L_value) <= e15.stderr_ + e10.stderr_ + 0.1;

        std::snprintf(buf, sizeof buf,
                      "L11(0) -> %.4f vs 0.50; L11(0.3) -> %.4f vs 1.00; alpha {%.3f, %.3f, %.3f}",
                      L0, L3, e08.L_value, e10.L_value, e15.L_value);
        report(6, "hitting-time statistics",
               std::fabs(L0 - 0.50) <= 0.07 && std::fabs(L3 - 1.00) <= 0.10 && alpha_ok,
               buf);
    }

    // ---- criterion 7: density oracle at 2^14
    {
        double h = dens14.bin_width();
        double l1 = 0;
        for (int i = 0; i < dens14.n_bins; ++i) {
            double a = dens14.grid_lo + i * h, b = a + h;
            double exact = (2.0 / M_PI) * (std::asin(std::sqrt(std::min(1.0, b))) -
                                           std::asin(std::sqrt(std::max(0.0, a))));
            l1 += std::fabs(dens14.mass[i] - exact);
        }
        bool spikes_ok = dens14.spikes.size() == 2 &&
                         std::fabs(dens14.spikes[0].exponent + 0.5) <= 0.07 &&
                         std::fabs(dens14.spikes[1].exponent + 0.5) <= 0.07;
        std::snprintf(buf, sizeof buf, "L1 = %.4f (< 0.02); exponents %.3f, %.3f",
                      l1, dens14.spikes[0].exponent, dens14.spikes[1].exponent);
        report(7, "Ulam density against the closed form", l1 < 0.02 && spikes_ok, buf);
    }

    // ---- criterion 8: the second Misiurewicz-Thurston map
    {
        UnimodalMap map2 = find_mt_parameter(2.0, 3, 5, Interval{3.92, 3.94});
        double resid = eval(map2, map2.c(), 8) - eval(map2, map2.c(), 3);
        CriticalOrbitData orbit2 = critical_orbit(map2);
        MarkovPartition part = build_partition(orbit2, map2);

        UlamOperator o2 = build_ulam(map2, 1 << 15);
        InvariantDensity d2 = invariant_density(o2, orbit2);
        double z = orbit2.point(3);
        PointClass pc = classify_point(map2, orbit2, z);
        SweepParams sp;
        sp.n_bins = 1 << 15;
        TrichotomyReport rep = local_escape_sweep(map2, orbit2, d2, z,
                                                  geometric_grid(1e-2, kFactor, 5), sp);
        std::snprintf(buf, sizeof buf,
                      "A = %.6f, |resid| = %.1e, M = %d; ratio %.4f vs %.4f",
                      map2.A(), std::fabs(resid), part.M(), rep.extrapolated,
                      rep.predicted);
        report(8, "second map: parameter, partition, escape",
               std::fabs(resid) < 1e-13 && part.M() == 7 &&
                   pc.tri_case == TrichotomyCase::periodic_in_orbit &&
                   std::fabs(rep.extrapolated - rep.predicted) <= 0.07,
               buf);
    }

    // ---- criterion 9: spectral vs Monte Carlo on a random battery
    {
        CounterRng rng(777, 0);
        int pass_cnt = 0, total = 0;
        std::string detail;
        while (total < 10) {
            double z = 0.08 + 0.84 * rng.uniform();
            double eps = 1.5e-3 + 6e-3 * rng.uniform();
            double rate_s;
            try {
                rate_s = escape_rate_spectral(map4, orbit4, z, eps, eps, 1 << 13).first;
            } catch (const Error&) {
                continue;
            }
            McParams mc;
            mc.n_samples = 100000;
            mc.seed = 5000 + total;
            auto [rate_m, se] = escape_rate_mc(map4, dens15, z, eps, eps, mc);
            bool ok = std::fabs(rate_m - rate_s) <= 3 * se + 0.05 * rate_s;
            if (ok) ++pass_cnt;
            ++total;
        }
        std::snprintf(buf, sizeof buf, "%d/10 configurations agree", pass_cnt);
        report(9, "estimator cross-validation", pass_cnt == 10, buf);
    }

    // ---- criterion 10: structural properties of the induced map
    {
        double slope = return_time_tail_slope(im0);
        double kac = 0;
        for (auto& d : im0.domains) kac += d.tau * mu_interval(dens15, d.lo, d.hi);
        ChainStructure cs = identify_chains(map4, im0, 0.0, 1);
        bool ladder_ok = true;
        double worst = 0;
        for (int i = 5; i + 1 < 12; ++i) {
            double r = cs.ladder_right[i + 1] / cs.ladder_right[i];
            worst = std::max(worst, std::fabs(r - 0.25));
            if (std::fabs(r - 0.25) > 0.025) ladder_ok = false;
        }
        std::snprintf(buf, sizeof buf,
                      "tail slope %.3f; Kac sum %.4f vs 1; ladder ratio off by %.4f",
                      slope, kac, worst);
        report(10, "return-time tails, Kac identity, chain decay",
               slope < 0.0 && std::fabs(kac - 1.0) <= 0.02 && ladder_ok, buf);
    }

    // ---- criterion 11: asymmetric holes reproduce the z=0 limit
    {
        SweepParams sp;
        sp.n_bins = 1 << 15;
        bool ok = true;
        std::string vals;
        for (double ratio : {1.0 / 3.0, 3.0}) {
            sp.side_ratio = ratio;
            TrichotomyReport rep = local_escape_sweep(
                map4, orbit4, dens15, 0.0, geometric_grid(1e-2, kFactor, 5), sp);
            std::snprintf(buf, sizeof buf, " %.4f", rep.extrapolated);
            vals += buf;
            if (std::fabs(rep.extrapolated - 0.50) > 0.07) ok = false;
        }
        std::snprintf(buf, sizeof buf, "extrapolated%s vs 0.50", vals.c_str());
        report(11, "asymmetric holes", ok, buf);
    }

    double total_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::printf("%d/11 criteria passed in %.1fs\n", 11 - g_failures, total_secs);
    return g_failures;
}
