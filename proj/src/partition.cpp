#include "openmap/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace openmap {

namespace {

// gcd of return-time lengths of index i in the boolean digraph, capped search
int component_period(const std::vector<std::vector<bool>>& t, const std::vector<int>& comp) {
    int M = static_cast<int>(t.size());
    int cap = 2 * M * M + 2;
    std::vector<bool> in_comp(M, false);
    for (int i : comp) in_comp[i] = true;
    int g = 0;
    // reachability in exactly k steps from comp[0]
    std::vector<bool> cur(M, false);
    cur[comp[0]] = true;
    for (int k = 1; k <= cap; ++k) {
        std::vector<bool> nxt(M, false);
        for (int i = 0; i < M; ++i) {
            if (!cur[i] || !in_comp[i]) continue;
            for (int j = 0; j < M; ++j)
                if (t[i][j] && in_comp[j]) nxt[j] = true;
        }
        if (nxt[comp[0]]) g = g == 0 ? k : std::gcd(g, k);
        if (g == 1) return 1;
        cur = std::move(nxt);
    }
    return g == 0 ? -1 : g;
}

}  // namespace

MarkovPartition build_partition(const CriticalOrbitData& orbit, const UnimodalMap& map) {
    Interval core = map.core();
    std::vector<double> pts;
    pts.push_back(map.c());
    for (int j = 1; j <= orbit.postcritical_count(); ++j) {
        double q = orbit.point(j);
        if (q >= core.lo - 1e-12 && q <= core.hi + 1e-12)
            pts.push_back(std::clamp(q, core.lo, core.hi));
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (std::fabs(pts[i + 1] - pts[i]) < 1e-12)
            raise(ErrorKind::DegeneratePartition,
                  "two postcritical points coincide within 1e-12");

    MarkovPartition part;
    part.boundaries = pts;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        part.intervals.push_back(Interval{pts[i], pts[i + 1]});

    int M = part.M();
    part.transition.assign(M, std::vector<bool>(M, false));
    for (int i = 0; i < M; ++i) {
        double u = part.intervals[i].lo, v = part.intervals[i].hi;
        double fu = map(u), fv = map(v);
        double lo = std::min(fu, fv), hi = std::max(fu, fv);
        for (int j = 0; j < M; ++j) {
            double mid = 0.5 * (part.intervals[j].lo + part.intervals[j].hi);
            part.transition[i][j] = (mid > lo - 1e-12 && mid < hi + 1e-12);
        }
    }

    // transitive component: the largest SCC (ties broken by first index)
    std::vector<int> best;
    std::vector<bool> assigned(M, false);
    for (int s = 0; s < M; ++s) {
        if (assigned[s]) continue;
        // forward and backward reachability from s
        auto reach = [&](bool forward) {
            std::vector<bool> vis(M, false);
            std::vector<int> stack = {s};
            vis[s] = true;
            while (!stack.empty()) {
                int i = stack.back();
                stack.pop_back();
                for (int j = 0; j < M; ++j) {
                    bool edge = forward ? part.transition[i][j] : part.transition[j][i];
                    if (edge && !vis[j]) { vis[j] = true; stack.push_back(j); }
                }
            }
            return vis;
        };
        auto fwd = reach(true);
        auto bwd = reach(false);
        std::vector<int> comp;
        for (int i = 0; i < M; ++i)
            if (fwd[i] && bwd[i]) { comp.push_back(i); assigned[i] = true; }
        // require an internal edge so a transient singleton does not count
        bool has_cycle = false;
        for (int i : comp)
            for (int j : comp)
                if (part.transition[i][j]) has_cycle = true;
        if (has_cycle && comp.size() > best.size()) best = comp;
    }
    part.transitive_component = best;
    part.irreducible_on_component = !best.empty();
    if (!best.empty())
        part.aperiodic_on_component = component_period(part.transition, best) == 1;
    return part;
}

double markov_endpoint_error(const MarkovPartition& part, const UnimodalMap& map) {
    double worst = 0.0;
    for (const auto& iv : part.intervals) {
        for (double e : {map(iv.lo), map(iv.hi)}) {
            double d = 1e300;
            for (double b : part.boundaries) d = std::min(d, std::fabs(e - b));
            worst = std::max(worst, d);
        }
    }
    return worst;
}

}  // namespace openmap
