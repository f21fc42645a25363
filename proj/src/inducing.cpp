#include "openmap/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace openmap {

namespace {

double eval_n(const UnimodalMap& map, double x, int n) {
    for (int i = 0; i < n; ++i) x = map(x);
    return x;
}

// Local inverse of f along a given backward itinerary of anchor points:
// each step takes the branch on the anchor's side of c.
double pullback_along(const UnimodalMap& map, double x, const std::vector<double>& anchors) {
    for (auto it = anchors.rbegin(); it != anchors.rend(); ++it)
        x = map.inverse(x, *it < map.c());
    return x;
}

// Monotone image of an interval that avoids c.
Interval image_interval(const UnimodalMap& map, Interval iv) {
    double a = map(iv.lo), b = map(iv.hi);
    return Interval{std::min(a, b), std::max(a, b)};
}

}  // namespace

InducingDomain build_inducing_domain(const UnimodalMap& map,
                                     const CriticalOrbitData& orbit, double z,
                                     int depth) {
    if (depth < 1) raise(ErrorKind::DomainError, "depth must be >= 1");
    Interval core = map.core();
    if (z < core.lo - 1e-12 || z > core.hi + 1e-12)
        raise(ErrorKind::BadDomain, "z lies outside the dynamical core");
    z = std::clamp(z, core.lo, core.hi);

    const int k0 = orbit.k0, p = orbit.p;
    const int n_post = orbit.postcritical_count();

    InducingDomain dom;
    dom.z = z;
    dom.depth = depth;
    dom.period = p;

    // Locate z on the postcritical orbit, if it is there.
    int k1 = 0;
    for (int j = 1; j <= n_post; ++j)
        if (std::fabs(z - orbit.point(j)) < 1e-9) { k1 = j; break; }
    dom.k1 = k1;
    dom.z_periodic = k1 >= k0;

    PointClass pc = classify_point(map, orbit, z);
    bool generic_periodic = (k1 == 0) && pc.tri_case == TrichotomyCase::periodic_off_orbit;
    if (k1 == 0 && !generic_periodic)
        raise(ErrorKind::BadDomain,
              "z is neither on the postcritical orbit nor periodic; no inducing "
              "scheme is defined for it");

    // Special points the windows must avoid.
    std::vector<double> special = {map.c()};
    for (int j = 1; j <= n_post; ++j) special.push_back(orbit.point(j));
    if (generic_periodic)
        for (int i = 0; i < pc.period; ++i) special.push_back(eval_n(map, z, i));
    auto gap_at = [&](double q) {
        double g = 1e300;
        for (double s : special)
            if (std::fabs(s - q) > 1e-12) g = std::min(g, std::fabs(s - q));
        return g;
    };

    // Seed window at z, pulled back `depth` times under the local branch of
    // f^{pz} fixing z (pz = cycle period through z).
    int pz = dom.z_periodic ? p : (generic_periodic ? pc.period : p);
    std::vector<double> cycle_anchor;
    if (dom.z_periodic || generic_periodic)
        for (int i = 0; i < pz; ++i) cycle_anchor.push_back(eval_n(map, z, i));

    double r0 = gap_at(z) / 3.0;
    double wlo = z - r0, whi = z + r0;
    if (dom.z_periodic || generic_periodic) {
        for (int d = 0; d < depth; ++d) {
            double a = pullback_along(map, wlo, cycle_anchor);
            double b = pullback_along(map, whi, cycle_anchor);
            wlo = std::min(a, b);
            whi = std::max(a, b);
        }
    } else {
        // preperiodic z: shrink the seed geometrically instead of a cycle pullback
        for (int d = 0; d < depth; ++d) { wlo = z - (z - wlo) / 4.0; whi = z + (whi - z) / 4.0; }
    }
    Interval base{wlo, whi};

    // Windows at the postcritical points.
    std::vector<std::pair<int, Interval>> windows;
    if (k1 > 0) {
        // forward images of the base window along the orbit from z
        Interval W = base;
        int steps_fwd = dom.z_periodic ? p : (k0 + p - k1);
        for (int i = 0; i < steps_fwd; ++i) {
            int j = dom.z_periodic ? k0 + ((k1 - k0 + i) % p) : k1 + i;
            windows.push_back({j, W});
            if (i + 1 < steps_fwd) {
                if (W.lo <= map.c() && map.c() <= W.hi)
                    raise(ErrorKind::BadDomain, "forward window hit the critical point");
                W = image_interval(map, W);
            }
        }
        // pull back through the preperiodic segment c_{k1-1} .. c_1
        // (for periodic z the segment starts at c_{k0-1})
        int seg_top = dom.z_periodic ? k0 - 1 : k1 - 1;
        for (int j = seg_top; j >= 1; --j) {
            Interval tgt;
            bool found = false;
            for (auto& [jj, Wjj] : windows)
                if (jj == j + 1) { tgt = Wjj; found = true; break; }
            if (!found) raise(ErrorKind::BadDomain, "missing window in the pullback chain");
            bool left = orbit.point(j) < map.c();
            double a = map.inverse(tgt.lo, left);
            double b = map.inverse(tgt.hi, left);
            windows.push_back({j, Interval{std::min(a, b), std::max(a, b)}});
        }
    } else {
        // generic periodic z: windows around orb(z) ...
        Interval W = base;
        for (int i = 0; i < pz; ++i) {
            windows.push_back({-(i + 1), W});  // negative tag = z-cycle window
            if (i + 1 < pz) {
                if (W.lo <= map.c() && map.c() <= W.hi)
                    raise(ErrorKind::BadDomain, "forward window hit the critical point");
                W = image_interval(map, W);
            }
        }
        // ... plus windows around the postcritical orbit, built the same way
        // around its own cycle point c_{k0}
        double r1 = gap_at(orbit.point(k0)) / 3.0;
        Interval Wp{orbit.point(k0) - r1, orbit.point(k0) + r1};
        std::vector<double> post_anchor;
        for (int i = 0; i < p; ++i) post_anchor.push_back(orbit.point(k0 + (i % p)));
        for (int d = 0; d < depth; ++d) {
            double a = pullback_along(map, Wp.lo, post_anchor);
            double b = pullback_along(map, Wp.hi, post_anchor);
            Wp = Interval{std::min(a, b), std::max(a, b)};
        }
        Interval W2 = Wp;
        for (int i = 0; i < p; ++i) {
            windows.push_back({k0 + (i % p), W2});
            if (i + 1 < p) W2 = image_interval(map, W2);
        }
        for (int j = k0 - 1; j >= 1; --j) {
            Interval tgt;
            for (auto& [jj, Wjj] : windows)
                if (jj == j + 1) { tgt = Wjj; break; }
            bool left = orbit.point(j) < map.c();
            double a = map.inverse(tgt.lo, left);
            double b = map.inverse(tgt.hi, left);
            windows.push_back({j, Interval{std::min(a, b), std::max(a, b)}});
        }
    }

    // clamp to the core; keep the window ordering stable by orbit index
    for (auto& [j, W] : windows) {
        W.lo = std::max(W.lo, core.lo);
        W.hi = std::min(W.hi, core.hi);
        if (!(W.lo < W.hi)) raise(ErrorKind::BadDomain, "window degenerated after clamping");
    }

    // ---- a-posteriori checks
    for (auto& [j, W] : windows) {
        if (W.lo < map.c() && map.c() < W.hi)
            raise(ErrorKind::BadDomain, "a window contains the critical point");
        for (double s : special) {
            bool is_own = std::fabs(s - (j > 0 ? orbit.point(j) : eval_n(map, z, -j - 1))) < 1e-12;
            if (!is_own && W.lo + 1e-13 < s && s < W.hi - 1e-13)
                raise(ErrorKind::BadDomain, "a window swallowed a foreign orbit point");
        }
    }
    std::vector<Interval> sorted_w;
    for (auto& [j, W] : windows) sorted_w.push_back(W);
    std::sort(sorted_w.begin(), sorted_w.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i + 1 < sorted_w.size(); ++i)
        if (sorted_w[i].hi >= sorted_w[i + 1].lo)
            raise(ErrorKind::BadDomain, "windows overlap at this depth");

    // Y = core minus the windows
    dom.windows = windows;
    double cur = core.lo;
    for (auto& W : sorted_w) {
        if (W.lo > cur + 1e-15) dom.components.push_back(Interval{cur, W.lo});
        cur = std::max(cur, W.hi);
    }
    if (core.hi > cur + 1e-15) dom.components.push_back(Interval{cur, core.hi});

    for (auto& [j, W] : windows)
        if (W.lo <= z && z <= W.hi) dom.z_window = W;
    dom.release_point = (dom.z_periodic || generic_periodic)
                            ? z
                            : orbit.point(k0);  // preperiodic case releases at the cycle

    if (dom.contains(z)) raise(ErrorKind::BadDomain, "z ended up inside Y");

    // f(Y) must cover Y (up to 1e-9): collect images of the Y pieces split at c
    std::vector<Interval> images;
    for (auto& comp : dom.components) {
        std::vector<Interval> pieces;
        if (comp.lo < map.c() && map.c() < comp.hi) {
            pieces.push_back(Interval{comp.lo, map.c()});
            pieces.push_back(Interval{map.c(), comp.hi});
        } else pieces.push_back(comp);
        for (auto& pc2 : pieces) images.push_back(image_interval(map, pc2));
    }
    std::sort(images.begin(), images.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (auto& iv : images) {
        if (!merged.empty() && iv.lo <= merged.back().hi + 1e-12)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else merged.push_back(iv);
    }
    // Y must be covered by f(Y), except that the release sliver next to the
    // z-window may be reachable only through the removed tube (an exact
    // forward-image window construction cannot avoid this when z is interior);
    // such leftovers must then lie inside images of the removed windows.
    std::vector<Interval> window_images;
    for (auto& [j, W] : windows)
        window_images.push_back(image_interval(map, Interval{
            std::max(W.lo, core.lo), std::min(W.hi, core.hi)}));
    for (auto& comp : dom.components) {
        double cursor = comp.lo;
        for (auto& m : merged) {
            if (m.hi <= cursor || m.lo >= comp.hi) continue;
            if (m.lo > cursor + 1e-9) break;
            cursor = std::max(cursor, m.hi);
        }
        while (cursor < comp.hi - 1e-9) {
            // leftover starts at cursor; find its end (next covered stretch)
            double end = comp.hi;
            for (auto& m : merged)
                if (m.lo > cursor + 1e-12 && m.lo < end) end = m.lo;
            bool tube_covered = false;
            for (auto& wi : window_images)
                if (wi.lo <= cursor + 1e-9 && std::min(end, wi.hi) >= end - 1e-9)
                    tube_covered = true;
            if (!tube_covered)
                raise(ErrorKind::BadDomain, "f(Y) does not cover Y");
            cursor = end;
            for (auto& m : merged) {
                if (m.hi <= cursor || m.lo >= comp.hi) continue;
                if (m.lo > cursor + 1e-9) break;
                cursor = std::max(cursor, m.hi);
            }
        }
    }

    // Re-entry audit: points leaving Y come back only next to a release
    // window.  Sample each window and iterate until the orbit lands in Y.
    std::vector<double> release_points = {dom.release_point};
    if (generic_periodic) release_points.push_back(orbit.point(k0));
    std::vector<std::pair<double, double>> release_zones;  // (point, radius)
    for (double rp : release_points) {
        Interval rw;
        for (auto& [j, W] : windows)
            if (W.lo <= rp && rp <= W.hi) rw = W;
        int cyc = rp == z && (dom.z_periodic || generic_periodic) ? pz : p;
        Interval img = rw;
        for (int i = 0; i < cyc; ++i) img = image_interval(map, img);
        release_zones.push_back({rp, 2.0 * (img.hi - img.lo) + 1e-12});
    }
    for (auto& [j, W] : windows) {
        for (int s = 1; s <= 7; ++s) {
            double x = W.lo + (W.hi - W.lo) * std::fmod(s * 0.61803398874989485, 1.0);
            if (x <= core.lo || x >= core.hi) continue;
            bool near_orbit = false;
            for (double q : special)
                if (std::fabs(x - q) < 1e-9) near_orbit = true;
            if (near_orbit) continue;
            double y = x;
            for (int it = 0; it < 100000; ++it) {
                y = map(y);
                if (dom.contains(y)) {
                    bool ok = false;
                    for (auto& [rp, rad] : release_zones)
                        if (std::fabs(y - rp) <= rad) ok = true;
                    if (!ok)
                        raise(ErrorKind::BadDomain,
                              "re-entry to Y away from the designated release point");
                    break;
                }
            }
        }
    }
    return dom;
}

void annotate_chains(InducedMap& induced, const ChainStructure& chains) {
    for (int ci = 0; ci < static_cast<int>(chains.chains.size()); ++ci) {
        for (int idx : chains.chains[ci].member_indices) {
            auto& d = induced.domains[idx];
            d.chain_id = ci;
            d.depth = chains.p > 0 ? (d.tau - d.pass_step) / chains.p : 0;
        }
    }
}

int choose_depth(const UnimodalMap& map, const CriticalOrbitData& orbit, double z,
                 double eps_max, double safety, int depth_cap) {
    int best = -1;
    for (int d = 1; d <= depth_cap; ++d) {
        try {
            InducingDomain dom = build_inducing_domain(map, orbit, z, d);
            double lm = dom.eps_left_margin(), rm = dom.eps_right_margin();
            Interval core = map.core();
            bool left_ok = z - eps_max * safety < core.lo || lm >= eps_max * safety;
            bool right_ok = z + eps_max * safety > core.hi || rm >= eps_max * safety;
            if (left_ok && right_ok) best = d;
            else if (best >= 0) break;  // margins only shrink with depth
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BadDomain) throw;
        }
    }
    if (best < 0)
        raise(ErrorKind::BadDomain, "no depth yields a window wide enough for eps_max");
    return best;
}

namespace {

struct Piece {
    double lo, hi;
    int n;          // image level to examine: f^n(piece)
    int pass_step;  // first step whose image sat inside the z-window, -1 if none
};

// Preimage of `target` under the monotone f^n restricted to [lo, hi].
double monotone_preimage(const UnimodalMap& map, double lo, double hi, int n,
                         double target, bool increasing) {
    double a = lo, b = hi;
    for (int it = 0; it < 110; ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = eval_n(map, m, n);
        if ((fm < target) == increasing) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

InducedMap first_return_map(const UnimodalMap& map, const InducingDomain& Y,
                            int tau_max) {
    InducedMap im;
    im.Y = Y;
    im.tau_max = tau_max;

    std::vector<double> ybounds;
    for (auto& comp : Y.components) {
        ybounds.push_back(comp.lo);
        ybounds.push_back(comp.hi);
    }
    std::sort(ybounds.begin(), ybounds.end());

    const Interval zwin = Y.z_window;
    std::vector<Piece> queue;
    for (auto& comp : Y.components) {
        if (comp.lo < map.c() && map.c() < comp.hi) {
            queue.push_back({comp.lo, map.c(), 1, -1});
            queue.push_back({map.c(), comp.hi, 1, -1});
        } else queue.push_back({comp.lo, comp.hi, 1, -1});
    }

    double leftover = 0.0;
    while (!queue.empty()) {
        Piece pc = queue.back();
        queue.pop_back();
        double va = eval_n(map, pc.lo, pc.n), vb = eval_n(map, pc.hi, pc.n);
        bool inc = va < vb;
        double klo = std::min(va, vb), khi = std::max(va, vb);
        if (khi - klo < 1e-15) { leftover += pc.hi - pc.lo; continue; }

        std::vector<double> cuts;
        for (double t : ybounds)
            if (klo + 1e-13 < t && t < khi - 1e-13) cuts.push_back(t);

        std::vector<double> xcuts = {pc.lo};
        if (!inc) std::reverse(cuts.begin(), cuts.end());
        for (double t : cuts)
            xcuts.push_back(monotone_preimage(map, pc.lo, pc.hi, pc.n, t, inc));
        xcuts.push_back(pc.hi);

        for (std::size_t i = 0; i + 1 < xcuts.size(); ++i) {
            double lo = xcuts[i], hi = xcuts[i + 1];
            if (hi - lo < 1e-15) continue;
            double ia = eval_n(map, lo, pc.n), ib = eval_n(map, hi, pc.n);
            double ilo = std::min(ia, ib), ihi = std::max(ia, ib);
            double mid = 0.5 * (ilo + ihi);
            if (Y.contains(mid)) {
                ReturnDomain d;
                d.lo = lo; d.hi = hi; d.tau = pc.n;
                d.img_lo = ilo; d.img_hi = ihi;
                d.pass_step = pc.pass_step;
                if (pc.pass_step >= 0) {
                    double pa = eval_n(map, lo, pc.pass_step);
                    double pb = eval_n(map, hi, pc.pass_step);
                    d.pass_lo = std::min(pa, pb);
                    d.pass_hi = std::max(pa, pb);
                    d.pass_side = d.pass_hi <= Y.z + 1e-15 ? -1
                                  : (d.pass_lo >= Y.z - 1e-15 ? +1 : 0);
                }
                double dm = std::fabs(deriv(map, 0.5 * (lo + hi), pc.n));
                double dl = std::fabs(deriv(map, lo + 0.25 * (hi - lo), pc.n));
                double dr = std::fabs(deriv(map, hi - 0.25 * (hi - lo), pc.n));
                d.deriv_min = std::min({dm, dl, dr});
                d.deriv_max = std::max({dm, dl, dr});
                im.domains.push_back(d);
            } else {
                int pass = pc.pass_step;
                if (pass < 0 && ilo >= zwin.lo - 1e-14 && ihi <= zwin.hi + 1e-14)
                    pass = pc.n;
                if (pc.n + 1 <= tau_max) queue.push_back({lo, hi, pc.n + 1, pass});
                else leftover += hi - lo;
            }
        }
    }

    std::sort(im.domains.begin(), im.domains.end(),
              [](const ReturnDomain& a, const ReturnDomain& b) { return a.lo < b.lo; });
    double covered = 0.0;
    for (auto& d : im.domains) covered += d.length();
    im.uncovered_length = std::max(0.0, Y.length() - covered);
    if (im.covered_fraction() < 1.0 - 1e-3)
        raise(ErrorKind::CapTooSmall, "first-return enumeration covered too little of Y");
    return im;
}

int audit_first_returns(const UnimodalMap& map, const InducedMap& induced,
                        double rounding) {
    // The endpoint orbits drift by at most rounding * sum_k Lip^k after s
    // iterates (Lip = sup |Df|), so the clearance tolerance grows with s.
    double lip = map.A() * map.ell() * std::pow(0.5, map.ell() - 1.0);
    int bad = 0;
    for (const auto& d : induced.domains) {
        double lo = d.lo, hi = d.hi;
        double drift = rounding;
        for (int s = 1; s < d.tau; ++s) {
            double a = map(lo), b = map(hi);
            lo = std::min(a, b);
            hi = std::max(a, b);
            drift = drift * lip + rounding;
            for (const auto& comp : induced.Y.components) {
                double ov = std::min(hi, comp.hi) - std::max(lo, comp.lo);
                if (ov > 2 * drift + 1e-13) {
                    ++bad;
                    s = d.tau;
                    break;
                }
            }
        }
    }
    return bad;
}

namespace {

double fit_log_slope(const std::map<int, double>& series) {
    // least squares of log(value) against n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (auto& [n, v] : series) {
        if (v <= 0) continue;
        double x = n, y = std::log(v);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

double return_time_tail_slope(const InducedMap& induced) {
    std::map<int, double> leb;
    for (auto& d : induced.domains)
        if (d.tau > 1) leb[d.tau] += d.length();
    return fit_log_slope(leb);
}

double return_time_count_slope(const InducedMap& induced) {
    std::map<int, double> cnt;
    for (auto& d : induced.domains)
        if (d.tau > 1) cnt[d.tau] += 1.0;
    return fit_log_slope(cnt);
}

ChainStructure identify_chains(const UnimodalMap& map, const InducedMap& induced,
                               double z, int p) {
    if (p < 1 || std::fabs(eval(map, std::clamp(z, 0.0, 1.0), p) - z) > 1e-9 ||
        std::fabs(deriv(map, z, p)) <= 1.0)
        raise(ErrorKind::NoChains, "z is not a repelling periodic point: no f^p ladder");

    ChainStructure cs;
    cs.p = p;
    cs.orientation = deriv(map, z, p) > 0 ? Orientation::preserving : Orientation::reversing;

    // ladder of marker points: pullbacks of the z-window boundaries under f^p
    std::vector<double> anchors;
    for (int i = 0; i < p; ++i) anchors.push_back(eval_n(map, z, i));
    auto pull = [&](double x) {
        for (auto it = anchors.rbegin(); it != anchors.rend(); ++it)
            x = map.inverse(x, *it < map.c());
        return x;
    };
    const Interval zwin = induced.Y.z_window;
    double a = zwin.lo, b = zwin.hi;
    for (int i = 0; i < 80; ++i) {
        cs.ladder_left.push_back(a);
        cs.ladder_right.push_back(b);
        if (cs.orientation == Orientation::preserving) {
            a = pull(a);
            b = pull(b);
        } else {
            double a2 = pull(b), b2 = pull(a);
            a = a2; b = b2;
        }
        if (std::fabs(a - z) < 1e-15 && std::fabs(b - z) < 1e-15) break;
    }

    // group passing domains by (entry step, side, spatial adjacency)
    struct Tag { int s, side, idx, depth; double lo, hi; };
    std::vector<Tag> tags;
    for (int i = 0; i < static_cast<int>(induced.domains.size()); ++i) {
        const auto& d = induced.domains[i];
        if (d.pass_step < 0) continue;
        int k = (d.tau - d.pass_step) / p;
        tags.push_back({d.pass_step, d.pass_side, i, k, d.lo, d.hi});
    }
    std::sort(tags.begin(), tags.end(), [](const Tag& x, const Tag& y) {
        if (x.s != y.s) return x.s < y.s;
        if (x.side != y.side) return x.side < y.side;
        return x.lo < y.lo;
    });

    for (std::size_t i = 0; i < tags.size();) {
        std::size_t j = i + 1;
        while (j < tags.size() && tags[j].s == tags[i].s && tags[j].side == tags[i].side &&
               (tags[j].lo - tags[j - 1].hi) < 1e-10 + 1e-6 * (tags[j - 1].hi - tags[j - 1].lo))
            ++j;
        Chain ch;
        ch.side = tags[i].side;
        ch.entry_step = tags[i].s;
        for (std::size_t t = i; t < j; ++t) ch.member_indices.push_back(tags[t].idx);
        std::sort(ch.member_indices.begin(), ch.member_indices.end(), [&](int x, int y) {
            return induced.domains[x].tau < induced.domains[y].tau;
        });
        cs.chains.push_back(ch);
        i = j;
    }

    // principal chains accumulate at the critical point
    double best_left = 1e300, best_right = 1e300;
    int il = -1, ir = -1;
    for (int ci = 0; ci < static_cast<int>(cs.chains.size()); ++ci) {
        double dmin = 1e300;
        bool left_of_c = true;
        for (int idx : cs.chains[ci].member_indices) {
            const auto& d = induced.domains[idx];
            dmin = std::min(dmin, std::min(std::fabs(d.lo - map.c()), std::fabs(d.hi - map.c())));
            left_of_c = 0.5 * (d.lo + d.hi) < map.c();
        }
        if (left_of_c && dmin < best_left) { best_left = dmin; il = ci; }
        if (!left_of_c && dmin < best_right) { best_right = dmin; ir = ci; }
    }
    // "adjacent to c" means the deepest members pile up on c itself
    if (il >= 0 && best_left < 1e-6) cs.chains[il].is_principal = true;
    if (ir >= 0 && best_right < 1e-6) cs.chains[ir].is_principal = true;
    return cs;
}

InducedHole induced_hole(const UnimodalMap& map, const InducedMap& induced, double z,
                         double eps_L, double eps_R) {
    const InducingDomain& Y = induced.Y;
    Interval core = map.core();
    double hole_lo = std::max(z - eps_L, core.lo);
    double hole_hi = std::min(z + eps_R, core.hi);
    bool left_open = hole_lo > core.lo, right_open = hole_hi < core.hi;
    if (left_open && hole_lo < Y.z_window.lo - 1e-15)
        raise(ErrorKind::DomainError, "eps_L exceeds the inducing window margin");
    if (right_open && hole_hi > Y.z_window.hi + 1e-15)
        raise(ErrorKind::DomainError, "eps_R exceeds the inducing window margin");

    if (left_open && right_open) {
        double ratio = eps_L / eps_R;
        if (ratio < 0.1 - 1e-12 || ratio > 10.0 + 1e-12)
            raise(ErrorKind::DomainError, "eps_L/eps_R must stay within [1/10, 10]");
    }

    InducedHole out;
    out.eps_L = eps_L;
    out.eps_R = eps_R;

    const int p = Y.period;
    for (int i = 0; i < static_cast<int>(induced.domains.size()); ++i) {
        const auto& d = induced.domains[i];
        if (d.pass_step < 0) continue;

        // steps at which the domain's image sits inside the z-window
        std::vector<int> steps;
        for (int s = d.pass_step; s < d.tau; s += p) {
            double pa = eval_n(map, d.lo, s), pb = eval_n(map, d.hi, s);
            double lo = std::min(pa, pb), hi = std::max(pa, pb);
            if (lo >= Y.z_window.lo - 1e-13 && hi <= Y.z_window.hi + 1e-13)
                steps.push_back(s);
            else break;
        }

        // split points: preimages of the hole edges at each in-window step
        std::vector<double> xsplit;
        for (int s : steps) {
            double pa = eval_n(map, d.lo, s), pb = eval_n(map, d.hi, s);
            bool inc = pa < pb;
            double lo = std::min(pa, pb), hi = std::max(pa, pb);
            for (double edge : {hole_lo, hole_hi}) {
                if (lo + 1e-16 < edge && edge < hi - 1e-16)
                    xsplit.push_back(monotone_preimage(map, d.lo, d.hi, s, edge, inc));
            }
        }
        std::sort(xsplit.begin(), xsplit.end());
        std::vector<double> xs = {d.lo};
        for (double t : xsplit)
            if (t > xs.back() + 1e-16 && t < d.hi - 1e-16) xs.push_back(t);
        xs.push_back(d.hi);

        bool was_split = xs.size() > 2;
        for (std::size_t t = 0; t + 1 < xs.size(); ++t) {
            double lo = xs[t], hi = xs[t + 1];
            bool member = false;
            for (int s : steps) {
                double pa = eval_n(map, lo, s), pb = eval_n(map, hi, s);
                double plo = std::min(pa, pb), phi = std::max(pa, pb);
                if (plo >= hole_lo - 1e-14 && phi <= hole_hi + 1e-14) { member = true; break; }
            }
            if (member) out.members.push_back({i, lo, hi, was_split});
            else if (was_split) out.complements.push_back({i, lo, hi, true});
        }
    }
    return out;
}

std::string serialize_induced_map(const InducedMap& induced) {
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf, "# induced map: |Y|=%.17g domains=%zu tau_max=%d\n",
                  induced.Y.length(), induced.domains.size(), induced.tau_max);
    s += buf;
    for (const auto& d : induced.domains) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %d %.17g %.17g %d %d\n", d.lo, d.hi,
                      d.tau, d.img_lo, d.img_hi, d.chain_id, d.depth);
        s += buf;
    }
    return s;
}

}  // namespace openmap
