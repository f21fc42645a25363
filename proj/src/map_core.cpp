#include "openmap/map_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace openmap {

UnimodalMap::UnimodalMap(double A, double ell) : A_(A), ell_(ell) {
    if (!(A > 0.0) || !(A <= 4.0))
        raise(ErrorKind::DomainError, "family parameter A must lie in (0, 4]");
    if (!(ell >= 1.05))
        raise(ErrorKind::DomainError, "critical order ell must be >= 1.05");
    double c1 = (*this)(0.5);
    double c2 = (*this)(c1);
    core_ = Interval{c2, c1};
}

double UnimodalMap::inverse(double y, bool left_branch) const {
    double t = (A_ * 0.25 - y) / A_;
    if (t < 0.0) {
        if (t > -1e-15) t = 0.0;  // allow y == f(c) up to rounding
        else raise(ErrorKind::DomainError, "no preimage: y above the critical value");
    }
    double r = std::pow(t, 1.0 / ell_);
    return left_branch ? 0.5 - r : 0.5 + r;
}

double eval(const UnimodalMap& map, double x, int n) {
    if (x < 0.0 || x > 1.0)
        raise(ErrorKind::DomainError, "eval: x outside [0,1]");
    if (n < 0) raise(ErrorKind::DomainError, "eval: n must be >= 0");
    for (int i = 0; i < n; ++i) x = map(x);
    return x;
}

double deriv(const UnimodalMap& map, double x, int n) {
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        prod *= map.deriv1(x);
        x = map(x);
    }
    return prod;
}

CriticalOrbitData critical_orbit(const UnimodalMap& map, int max_iter, double tol) {
    std::vector<double> orb;  // orb[i] = c_{i+1}
    double x = map.c();
    for (int i = 0; i < max_iter; ++i) {
        x = map(x);
        if (x < -1e-12 || x > 1.0 + 1e-12)
            raise(ErrorKind::NotEventuallyPeriodic, "critical orbit left [0,1]");
        orb.push_back(std::min(1.0, std::max(0.0, x)));
    }
    // minimal k0 first, then minimal p; repelling multiplier required
    for (int k0 = 1; k0 < max_iter; ++k0) {
        for (int p = 1; k0 + p <= max_iter; ++p) {
            if (std::fabs(orb[k0 + p - 1] - orb[k0 - 1]) >= tol) continue;
            double mult = std::fabs(deriv(map, orb[k0 - 1], p));
            if (mult <= 1.0) continue;
            if (k0 < 2)
                raise(ErrorKind::NotEventuallyPeriodic,
                      "critical value itself is periodic (k0 < 2), outside the map class");
            CriticalOrbitData data;
            data.k0 = k0;
            data.p = p;
            data.lambda_tail = mult;
            data.orbit.assign(orb.begin(), orb.begin() + (k0 + p));
            return data;
        }
    }
    raise(ErrorKind::NotEventuallyPeriodic,
          "no repelling recurrence of the critical orbit within max_iter");
}

namespace {

double mt_residual(double A, double ell, int k0, int p) {
    UnimodalMap m(A, ell);
    double a = eval(m, m.c(), k0);
    double b = eval(m, m.c(), k0 + p);
    return b - a;
}

}  // namespace

UnimodalMap find_mt_parameter(double ell, int k0, int p, Interval bracket) {
    if (!(bracket.lo < bracket.hi))
        raise(ErrorKind::DomainError, "find_mt_parameter: empty bracket");
    const int scan = 512;
    std::optional<ErrorKind> failure;
    std::string failure_msg;
    bool saw_sign_change = false;

    auto try_candidate = [&](double Aroot) -> std::optional<UnimodalMap> {
        if (std::fabs(mt_residual(Aroot, ell, k0, p)) >= 1e-13) return std::nullopt;
        UnimodalMap cand(Aroot, ell);
        try {
            CriticalOrbitData od = critical_orbit(cand);
            if (od.k0 == k0 && od.p == p) return cand;
            failure = ErrorKind::NotMinimal;
            failure_msg = "root realizes (k0,p) = (" + std::to_string(od.k0) + "," +
                          std::to_string(od.p) + ")";
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NotEventuallyPeriodic) {
                failure = ErrorKind::NotRepelling;
                failure_msg = e.what();
            } else throw;
        }
        return std::nullopt;
    };

    double prev_a = bracket.lo;
    double prev_g = mt_residual(prev_a, ell, k0, p);
    if (prev_g == 0.0) {
        if (auto m = try_candidate(prev_a)) return *m;
    }
    for (int i = 1; i <= scan; ++i) {
        double a = bracket.lo + (bracket.hi - bracket.lo) * i / scan;
        double g = mt_residual(a, ell, k0, p);
        if (g == 0.0) {
            // exact zero: a candidate, but only a transversal sign change
            // counts as evidence of a root for the error report
            if (auto m = try_candidate(a)) return *m;
        } else if (prev_g != 0.0 && (prev_g < 0.0) != (g < 0.0)) {
            saw_sign_change = true;
            // bisection to machine width
            double lo = prev_a, hi = a, glo = prev_g;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, lo); ++it) {
                double mid = 0.5 * (lo + hi);
                double gm = mt_residual(mid, ell, k0, p);
                if (gm == 0.0) { lo = hi = mid; break; }
                if ((gm < 0.0) == (glo < 0.0)) { lo = mid; glo = gm; }
                else hi = mid;
            }
            // secant refinement around the bisection result
            double A0 = 0.5 * (lo + hi);
            double A1 = A0 + 1e-9;
            if (A1 > bracket.hi) A1 = A0 - 1e-9;
            double g0 = mt_residual(A0, ell, k0, p);
            double g1 = mt_residual(A1, ell, k0, p);
            for (int it = 0; it < 8 && g1 != g0; ++it) {
                double A2 = A1 - g1 * (A1 - A0) / (g1 - g0);
                if (!(A2 > bracket.lo && A2 < bracket.hi)) break;
                A0 = A1; g0 = g1;
                A1 = A2; g1 = mt_residual(A1, ell, k0, p);
                if (std::fabs(g1) < 1e-15) break;
            }
            double Aroot = std::fabs(g1) < std::fabs(g0) ? A1 : A0;
            if (auto m = try_candidate(Aroot)) return *m;
        }
        prev_a = a;
        prev_g = g;
    }
    if (failure && saw_sign_change) raise(*failure, failure_msg);
    if (!saw_sign_change)
        raise(ErrorKind::NoRoot, "no sign change of f^{k0+p}(c) - f^{k0}(c) in the bracket");
    raise(ErrorKind::NoRoot, "sign change did not refine to a 1e-13 residual");
}

namespace {

// Branch endpoints of f^n on [0,1]: all x with f^i(x) = c for some i < n.
std::vector<double> branch_cuts(const UnimodalMap& map, int n) {
    std::vector<double> cuts = {0.0, 1.0};
    std::vector<double> level = {map.c()};
    for (int i = 0; i < n; ++i) {
        cuts.insert(cuts.end(), level.begin(), level.end());
        if (i + 1 == n) break;
        std::vector<double> next;
        next.reserve(level.size() * 2);
        for (double y : level) {
            if (!map.has_inverse(y)) continue;
            double xl = map.inverse(y, true);
            double xr = map.inverse(y, false);
            if (xl >= 0.0 && xl <= 1.0) next.push_back(xl);
            if (xr >= 0.0 && xr <= 1.0) next.push_back(xr);
        }
        level = std::move(next);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
               cuts.end());
    return cuts;
}

}  // namespace

std::vector<PeriodicPoint> find_periodic_points(const UnimodalMap& map, int n) {
    if (n < 1 || n > 12)
        raise(ErrorKind::DomainError, "find_periodic_points: n must be in [1, 12]");
    std::vector<double> found;
    auto cuts = branch_cuts(map, n);
    for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
        double lo = cuts[b], hi = cuts[b + 1];
        auto h = [&](double x) { return eval(map, x, n) - x; };
        double hlo = h(lo), hhi = h(hi);
        if (hlo == 0.0) { found.push_back(lo); continue; }
        if (hhi == 0.0) { found.push_back(hi); continue; }
        if ((hlo < 0.0) == (hhi < 0.0)) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            double mid = 0.5 * (lo + hi);
            double hm = h(mid);
            if (hm == 0.0) { lo = hi = mid; break; }
            if ((hm < 0.0) == (hlo < 0.0)) { lo = mid; hlo = hm; }
            else hi = mid;
        }
        found.push_back(0.5 * (lo + hi));
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end(),
                            [](double a, double b) { return std::fabs(a - b) < 1e-11; }),
                found.end());
    std::vector<PeriodicPoint> out;
    for (double x : found) {
        if (std::fabs(eval(map, x, n) - x) > 1e-9) continue;
        int prime = 0;
        for (int d = 1; d <= n; ++d) {
            if (n % d != 0) continue;
            if (std::fabs(eval(map, x, d) - x) < 1e-9) { prime = d; break; }
        }
        if (prime == 0) continue;
        double dfp = deriv(map, x, prime);
        out.push_back(PeriodicPoint{x, prime, std::fabs(dfp),
                                    dfp >= 0 ? Orientation::preserving
                                             : Orientation::reversing});
    }
    return out;
}

PointClass classify_point(const UnimodalMap& map, const CriticalOrbitData& orbit,
                          double z, int max_period, double tol) {
    PointClass pc;
    for (int j = 1; j <= orbit.postcritical_count(); ++j) {
        if (std::fabs(z - orbit.point(j)) < tol) { pc.orbit_index = j; break; }
    }
    for (int q = 1; q <= max_period; ++q) {
        if (std::fabs(eval(map, z, q) - z) < tol) {
            double dfq = deriv(map, z, q);
            if (std::fabs(dfq) > 1.0) {
                pc.period = q;
                pc.multiplier = std::fabs(dfq);
                pc.tri_case = pc.orbit_index > 0 ? TrichotomyCase::periodic_in_orbit
                                                 : TrichotomyCase::periodic_off_orbit;
                return pc;
            }
        }
    }
    pc.tri_case = TrichotomyCase::nonperiodic;
    return pc;
}

}  // namespace openmap
