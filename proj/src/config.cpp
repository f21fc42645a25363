#include "openmap/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace openmap {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) {
        // allow comma separators
        tok.erase(std::remove(tok.begin(), tok.end(), ','), tok.end());
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                raise(ErrorKind::BadConfig,
                      "line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            raise(ErrorKind::BadConfig,
                  "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (section == "map") {
                if (key == "A") cfg.A = std::stod(value);
                else if (key == "ell") cfg.ell = std::stod(value);
                else if (key == "k0") cfg.k0 = std::stoi(value);
                else if (key == "p") cfg.p = std::stoi(value);
                else if (key == "bracket") {
                    auto v = parse_list(value);
                    if (v.size() != 2) throw std::invalid_argument("bracket needs two numbers");
                    cfg.bracket = Interval{v[0], v[1]};
                } else raise(ErrorKind::BadConfig, "unknown key [map]." + key);
            } else if (section == "z") {
                if (key == "value") cfg.z_spec = value;
                else if (key == "battery") {
                    std::istringstream zs(value);
                    std::string tok;
                    while (zs >> tok) cfg.z_battery.push_back(tok);
                } else raise(ErrorKind::BadConfig, "unknown key [z]." + key);
            } else if (section == "eps") {
                if (key == "start") cfg.eps_start = std::stod(value);
                else if (key == "factor") cfg.eps_factor = std::stod(value);
                else if (key == "count") cfg.eps_count = std::stoi(value);
                else if (key == "side_ratio") cfg.side_ratio = std::stod(value);
                else raise(ErrorKind::BadConfig, "unknown key [eps]." + key);
            } else if (section == "numerics") {
                if (key == "n_bins") cfg.n_bins = std::stoi(value);
                else if (key == "tol") cfg.tol = std::stod(value);
                else if (key == "tau_max") cfg.tau_max = std::stoi(value);
                else if (key == "depth") cfg.depth = std::stoi(value);
                else raise(ErrorKind::BadConfig, "unknown key [numerics]." + key);
            } else if (section == "mc") {
                if (key == "n_samples") cfg.n_samples = std::stoll(value);
                else if (key == "horizon") cfg.horizon = std::stoi(value);
                else if (key == "seed") cfg.seed = std::stoull(value);
                else raise(ErrorKind::BadConfig, "unknown key [mc]." + key);
            } else if (section == "hts") {
                if (key == "alphas") cfg.alphas = parse_list(value);
                else if (key == "ts") cfg.ts = parse_list(value);
                else raise(ErrorKind::BadConfig, "unknown key [hts]." + key);
            } else if (section == "output") {
                if (key == "out_dir") cfg.out_dir = value;
                else if (key == "cache_dir") cfg.cache_dir = value;
                else raise(ErrorKind::BadConfig, "unknown key [output]." + key);
            } else {
                raise(ErrorKind::BadConfig, "unknown section [" + section + "]");
            }
        } catch (const std::invalid_argument&) {
            raise(ErrorKind::BadConfig,
                  "line " + std::to_string(lineno) + ": cannot parse value '" + value + "'");
        } catch (const std::out_of_range&) {
            raise(ErrorKind::BadConfig,
                  "line " + std::to_string(lineno) + ": value out of range '" + value + "'");
        }
    }
    if (!cfg.A && !(cfg.k0 && cfg.p))
        raise(ErrorKind::BadConfig, "[map] needs either A or (k0, p, bracket)");
    if (cfg.eps_factor <= 0.0 || cfg.eps_factor >= 1.0)
        raise(ErrorKind::BadConfig, "[eps].factor must lie in (0, 1)");
    if (cfg.eps_count < 1 || cfg.n_bins < 1 || cfg.tau_max < 1)
        raise(ErrorKind::BadConfig, "counts must be >= 1");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::BadConfig, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string ExperimentConfig::canonical() const {
    char buf[512];
    std::string s;
    auto add = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        s += buf;
    };
    if (A) add("A=%.17g\n", *A);
    if (k0) add("k0=%d p=%d bracket=%.17g %.17g\n", *k0, p ? *p : 0, bracket.lo, bracket.hi);
    add("ell=%.17g\n", ell);
    s += "z=" + z_spec + "\n";
    for (auto& z : z_battery) s += "zb=" + z + "\n";
    add("eps=%.17g %.17g %d %.17g\n", eps_start, eps_factor, eps_count, side_ratio);
    add("num=%d %.17g %d %d\n", n_bins, tol, tau_max, depth);
    add("mc=%lld %d %llu\n", static_cast<long long>(n_samples), horizon,
        static_cast<unsigned long long>(seed ? *seed : 0));
    s += "alphas=";
    for (double a : alphas) add("%.17g ", a);
    s += "\nts=";
    for (double t : ts) add("%.17g ", t);
    s += "\n";
    return s;
}

double resolve_z(const std::string& spec, const UnimodalMap& map,
                 const CriticalOrbitData& orbit) {
    if (spec.rfind("postcritical:", 0) == 0) {
        int i = std::stoi(spec.substr(13));
        if (i < 1 || i > orbit.postcritical_count())
            raise(ErrorKind::BadConfig, "postcritical index out of range: " + spec);
        return orbit.point(i);
    }
    if (spec.rfind("periodic:", 0) == 0) {
        std::string rest = spec.substr(9);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            raise(ErrorKind::BadConfig, "periodic spec needs n:index");
        int n = std::stoi(rest.substr(0, colon));
        int idx = std::stoi(rest.substr(colon + 1));
        auto pts = find_periodic_points(map, n);
        std::vector<PeriodicPoint> of_period;
        for (auto& pt : pts)
            if (pt.period == n) of_period.push_back(pt);
        if (idx < 0 || idx >= static_cast<int>(of_period.size()))
            raise(ErrorKind::BadConfig, "periodic point index out of range: " + spec);
        return of_period[idx].x;
    }
    try {
        return std::stod(spec);
    } catch (...) {
        raise(ErrorKind::BadConfig, "cannot parse z spec '" + spec + "'");
    }
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace openmap
