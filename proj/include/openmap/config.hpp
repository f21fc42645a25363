#ifndef OPENMAP_CONFIG_HPP
#define OPENMAP_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "openmap/map_core.hpp"

namespace openmap {

// Experiment configuration, parsed from an INI-style file:
//   [section]
//   key = value        # comment
struct ExperimentConfig {
    // [map]
    std::optional<double> A;           // literal parameter, or:
    std::optional<int> k0, p;          // combinatorics to solve for
    Interval bracket{0.0, 0.0};
    double ell = 2.0;

    // [z]  (literal | postcritical:i | periodic:n:index)
    std::string z_spec = "0.0";
    std::vector<std::string> z_battery;  // for the trichotomy command

    // [eps]
    double eps_start = 1e-2;
    double eps_factor = 0.31622776601683794;
    int eps_count = 5;
    double side_ratio = 1.0;

    // [numerics]
    int n_bins = 1 << 15;
    double tol = 1e-12;
    int tau_max = 64;
    int depth = 0;  // 0: choose automatically from the eps range

    // [mc]
    std::int64_t n_samples = 100000;
    int horizon = 0;  // 0: derived from mu_H
    std::optional<std::uint64_t> seed;

    // [hts]
    std::vector<double> alphas{1.0};
    std::vector<double> ts{1.0};

    // [output]
    std::string out_dir = "out";
    std::string cache_dir = "cache";

    std::string canonical() const;  // normalized text form used for hashing
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Resolves the z spec against a concrete map ("0.3" | "postcritical:2" |
// "periodic:2:0").
double resolve_z(const std::string& spec, const UnimodalMap& map,
                 const CriticalOrbitData& orbit);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace openmap

#endif
