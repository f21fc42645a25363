#ifndef OPENMAP_PARTITION_HPP
#define OPENMAP_PARTITION_HPP

#include <vector>

#include "openmap/map_core.hpp"

namespace openmap {

// Finite Markov partition of the dynamical core.  Boundary points are the
// critical orbit {c, c_1, ..., c_{k0+p-1}} restricted to the core, so each
// partition interval maps monotonically onto a union of partition intervals;
// M = k0 + p - 1.
struct MarkovPartition {
    std::vector<double> boundaries;       // sorted, includes the core endpoints and c
    std::vector<Interval> intervals;      // the M open intervals A_1..A_M
    std::vector<std::vector<bool>> transition;  // transition[i][j]: A_j subset f(A_i)

    int M() const { return static_cast<int>(intervals.size()); }

    // Strongly connected transitive component (indices into intervals).
    std::vector<int> transitive_component;
    bool irreducible_on_component = false;
    bool aperiodic_on_component = false;
};

MarkovPartition build_partition(const CriticalOrbitData& orbit, const UnimodalMap& map);

// Largest endpoint mismatch between f(A_i) endpoints and the boundary set; the
// Markov property demands this be ~0.
double markov_endpoint_error(const MarkovPartition& part, const UnimodalMap& map);

}  // namespace openmap

#endif
