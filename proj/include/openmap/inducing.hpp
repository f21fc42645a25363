#ifndef OPENMAP_INDUCING_HPP
#define OPENMAP_INDUCING_HPP

#include <optional>
#include <string>
#include <vector>

#include "openmap/map_core.hpp"

namespace openmap {

// Inducing domain Y = core minus one window around each postcritical point.
// The window at z is a depth-fold pullback of a seed interval under the local
// branch of f^p (f along the orbit in the preperiodic segment); the remaining
// windows are exact forward images / preimages of it, so points leaving Y can
// re-enter only through the release region next to the designated window.
struct InducingDomain {
    double z = 0.0;
    int k1 = 0;                   // z = c_{k1}
    bool z_periodic = false;      // k1 >= k0
    int period = 0;               // cycle length p of the map's postcritical tail
    int depth = 0;
    std::vector<std::pair<int, Interval>> windows;  // (orbit index j, window at c_j)
    std::vector<Interval> components;               // Y as sorted disjoint intervals
    Interval z_window;            // the window containing z
    double release_point = 0.0;   // where re-entries to Y happen (z if periodic)

    double length() const {
        double s = 0;
        for (auto& c : components) s += c.length();
        return s;
    }
    bool contains(double x) const {
        for (auto& c : components)
            if (c.lo <= x && x <= c.hi) return true;
        return false;
    }
    // margin between z and Y; hole radii must stay below it
    double eps_left_margin() const { return z - z_window.lo; }
    double eps_right_margin() const { return z_window.hi - z; }
};

// Builds Y for z on the postcritical orbit (periodic or preperiodic case) or
// for a generic periodic z (windows around orb(z) plus the postcritical set).
// Checks z not in Y, window disjointness, f(Y) superset of Y, and the re-entry
// location; raises BadDomain when a check fails at this depth.
InducingDomain build_inducing_domain(const UnimodalMap& map,
                                     const CriticalOrbitData& orbit, double z,
                                     int depth);

// Largest depth (smallest windows) whose z-window still contains
// (z - safety*eps, z + safety*eps); BadDomain checks are honored.
int choose_depth(const UnimodalMap& map, const CriticalOrbitData& orbit, double z,
                 double eps_max, double safety = 1.4, int depth_cap = 40);

struct ReturnDomain {
    double lo = 0.0, hi = 0.0;     // interval in Y
    int tau = 0;                   // first return time
    double img_lo = 0.0, img_hi = 0.0;  // f^tau(domain)
    int pass_step = -1;            // first s with f^s(domain) inside the z-window, -1 if none
    int pass_side = 0;             // -1 left of z, +1 right, 0 spans z
    double pass_lo = 0.0, pass_hi = 0.0;  // f^{pass_step}(domain)
    double deriv_min = 0.0, deriv_max = 0.0;  // |Df^tau| sampled over the domain
    int chain_id = -1;
    int depth = 0;                 // ladder depth when part of a chain

    double length() const { return hi - lo; }
};

struct InducedMap {
    InducingDomain Y;
    std::vector<ReturnDomain> domains;  // sorted by left endpoint
    int tau_max = 0;
    double uncovered_length = 0.0;      // |Y| - sum of domain lengths

    double covered_fraction() const {
        return 1.0 - uncovered_length / Y.length();
    }
};

// Enumerates the first-return domains of Y by breadth-first refinement of the
// monotone branches of f^n, n <= tau_max.  Raises CapTooSmall when the
// uncovered fraction exceeds 1e-3.
InducedMap first_return_map(const UnimodalMap& map, const InducingDomain& Y,
                            int tau_max = 64);

// Verifies on outward-rounded interval enclosures that every domain really
// makes its first return to Y at time tau; returns the number of violations.
int audit_first_returns(const UnimodalMap& map, const InducedMap& induced,
                        double rounding = 1e-14);

// Least-squares slope of log |{tau = n}| against n (Lebesgue tail), and of
// log #{tau = n} (count growth), over the occupied range.
double return_time_tail_slope(const InducedMap& induced);
double return_time_count_slope(const InducedMap& induced);

struct Chain {
    int side = 0;            // -1: images approach z from the left, +1: right
    int entry_step = 0;      // common first-entry step s of the members
    std::vector<int> member_indices;  // into InducedMap::domains, sorted by depth
    bool is_principal = false;        // accumulates at the critical point
};

struct ChainStructure {
    std::vector<Chain> chains;
    std::vector<double> ladder_left;   // a_0=window lo boundary, a_i -> z
    std::vector<double> ladder_right;  // b_0=window hi boundary, b_i -> z
    Orientation orientation = Orientation::preserving;
    int p = 0;  // period of z used for the ladder
};

// Groups domains passing through the z-window into chains, assigns ladder
// depths via (tau - s)/p, and marks the principal chains adjacent to c.
// Raises NoChains when z is not periodic (no f^p ladder exists).
ChainStructure identify_chains(const UnimodalMap& map, const InducedMap& induced,
                               double z, int p);

// Writes chain ids and ladder depths onto the domains (for serialization).
void annotate_chains(InducedMap& induced, const ChainStructure& chains);

struct HoleMember {
    int domain_index = -1;   // parent domain in InducedMap
    double lo = 0.0, hi = 0.0;  // sub-interval (equals the parent unless split)
    bool split = false;
};

struct InducedHole {
    double eps_L = 0.0, eps_R = 0.0;
    std::vector<HoleMember> members;        // the induced hole H'
    std::vector<HoleMember> complements;    // non-escaping parts of split domains

    double length() const {
        double s = 0;
        for (auto& m : members) s += m.hi - m.lo;
        return s;
    }
};

// Domains (split at hole-edge preimages when straddling) whose intermediate
// image lies inside (z-eps_L, z+eps_R) before returning to Y.
InducedHole induced_hole(const UnimodalMap& map, const InducedMap& induced, double z,
                         double eps_L, double eps_R);

// Deterministic text table of the induced map, one row per domain.
std::string serialize_induced_map(const InducedMap& induced);

}  // namespace openmap

#endif
