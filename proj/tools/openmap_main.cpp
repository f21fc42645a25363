// Experiment runner: Misiurewicz-Thurston maps, invariant densities, escape
// rate sweeps, hitting-time statistics, trichotomy batteries.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "openmap/config.hpp"
#include "openmap/hts.hpp"
#include "openmap/inducing.hpp"
#include "openmap/io.hpp"
#include "openmap/open_system.hpp"
#include "openmap/partition.hpp"
#include "openmap/ulam.hpp"

namespace om = openmap;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    om::ExperimentConfig cfg;
    std::string out_dir;
    std::string cache_dir;
    int workers = 0;
    std::vector<std::string> manifest_lines;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void note(const std::string& line) { manifest_lines.push_back(line); }

    void write_manifest(const std::string& command) {
        using namespace std::chrono;
        double ms = duration_cast<milliseconds>(steady_clock::now() - t0).count();
        std::string s;
        s += "command: " + command + "\n";
        s += "version: " + std::string(kVersion) + "\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(om::fnv1a64(cfg.canonical())));
        s += "config_hash: " + std::string(buf) + "\n";
        std::snprintf(buf, sizeof buf, "%.0f", ms);
        s += "wall_ms: " + std::string(buf) + "\n";
        for (auto& l : manifest_lines) s += l + "\n";
        om::write_file(out_dir + "/run_manifest.txt", s);
    }
};

om::UnimodalMap resolve_map(const om::ExperimentConfig& cfg) {
    if (cfg.A) return om::UnimodalMap(*cfg.A, cfg.ell);
    return om::find_mt_parameter(cfg.ell, *cfg.k0, *cfg.p, cfg.bracket);
}

std::string cache_key(const om::UnimodalMap& map, int n_bins, const std::string& what) {
    std::string head = what + " A=" + om::format_g17(map.A()) +
                       " ell=" + om::format_g17(map.ell()) +
                       " n_bins=" + std::to_string(n_bins) + " v=" + kVersion;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(om::fnv1a64(head)));
    return buf;
}

// Build (or load from cache) the invariant density.
om::InvariantDensity get_density(RunContext& ctx, const om::UnimodalMap& map,
                                 const om::CriticalOrbitData& orbit) {
    om::ensure_dir(ctx.cache_dir);
    std::string key = cache_key(map, ctx.cfg.n_bins, "density");
    std::string path = ctx.cache_dir + "/density_" + key + ".txt";
    om::UlamOperator op;  // built lazily below
    if (auto text = om::read_file(path)) {
        om::InvariantDensity dens;
        dens.n_bins = ctx.cfg.n_bins;
        om::Interval core = map.core();
        dens.grid_lo = core.lo;
        dens.grid_hi = core.hi;
        dens.ell = map.ell();
        std::string header;
        if (om::parse_density(*text, dens, header)) {
            ctx.note("density_cache: hit " + path);
            om::refit_spikes(dens, map, orbit);
            return dens;
        }
    }
    op = om::build_ulam(map, ctx.cfg.n_bins);
    om::InvariantDensity dens = om::invariant_density(op, orbit, ctx.cfg.tol);
    om::write_file(path, om::serialize_density(
        dens, "density A=" + om::format_g17(map.A()) + " n_bins=" +
                  std::to_string(ctx.cfg.n_bins) + " version=" + kVersion));
    ctx.note("density_cache: miss " + path);
    return dens;
}

std::vector<double> eps_grid(const om::ExperimentConfig& cfg) {
    std::vector<double> g;
    double e = cfg.eps_start;
    for (int i = 0; i < cfg.eps_count; ++i) {
        g.push_back(e);
        e *= cfg.eps_factor;
    }
    return g;
}

std::string tri_case_name(om::TrichotomyCase c) {
    switch (c) {
        case om::TrichotomyCase::nonperiodic: return "nonperiodic";
        case om::TrichotomyCase::periodic_off_orbit: return "periodic_off_orbit";
        case om::TrichotomyCase::periodic_in_orbit: return "periodic_in_orbit";
    }
    return "?";
}

int cmd_find_param(RunContext& ctx) {
    om::UnimodalMap map = resolve_map(ctx.cfg);
    om::CriticalOrbitData orbit = om::critical_orbit(map);
    std::string s;
    s += "A " + om::format_g17(map.A()) + "\n";
    s += "ell " + om::format_g17(map.ell()) + "\n";
    s += "k0 " + std::to_string(orbit.k0) + "\n";
    s += "p " + std::to_string(orbit.p) + "\n";
    s += "lambda_tail " + om::format_g17(orbit.lambda_tail) + "\n";
    for (int j = 1; j <= orbit.k0 + orbit.p; ++j)
        s += "c" + std::to_string(j) + " " + om::format_g17(orbit.point(j)) + "\n";
    std::cout << s;
    om::ensure_dir(ctx.out_dir);
    om::write_file(ctx.out_dir + "/map_report.txt", s);
    ctx.write_manifest("find-param");
    return 0;
}

int cmd_density(RunContext& ctx) {
    om::UnimodalMap map = resolve_map(ctx.cfg);
    om::CriticalOrbitData orbit = om::critical_orbit(map);
    om::ensure_dir(ctx.out_dir);
    om::ensure_dir(ctx.cache_dir);

    // keep the operator itself in the cache next to the density
    std::string mkey = cache_key(map, ctx.cfg.n_bins, "matrix");
    std::string mpath = ctx.cache_dir + "/matrix_" + mkey + ".txt";
    std::string mheader = "ulam A=" + om::format_g17(map.A()) +
                          " ell=" + om::format_g17(map.ell()) +
                          " n_bins=" + std::to_string(ctx.cfg.n_bins) +
                          " hole=none version=" + kVersion;
    if (auto text = om::read_file(mpath)) {
        ctx.note("matrix_cache: hit " + mpath);
    } else {
        om::UlamOperator op = om::build_ulam(map, ctx.cfg.n_bins);
        om::write_file(mpath, om::serialize_matrix(op, mheader));
        ctx.note("matrix_cache: miss " + mpath);
    }

    om::InvariantDensity dens = get_density(ctx, map, orbit);

    std::string csv = "i,x_mid,mass,density\n";
    double h = dens.bin_width();
    for (int i = 0; i < dens.n_bins; ++i) {
        csv += std::to_string(i) + "," + om::format_g17(dens.grid_lo + (i + 0.5) * h) +
               "," + om::format_g17(dens.mass[i]) + "," +
               om::format_g17(dens.mass[i] / h) + "\n";
    }
    om::write_file(ctx.out_dir + "/density.csv", csv);

    std::string spikes = "q,kappa_left,base_left,kappa_right,base_right,exponent\n";
    for (auto& s : dens.spikes) {
        spikes += om::format_g17(s.q) + "," + om::format_g17(s.kappa_left) + "," +
                  om::format_g17(s.base_left) + "," + om::format_g17(s.kappa_right) +
                  "," + om::format_g17(s.base_right) + "," +
                  om::format_g17(s.exponent) + "\n";
    }
    om::write_file(ctx.out_dir + "/spikes.csv", spikes);
    std::cout << "density: n_bins=" << dens.n_bins << " iterations=" << dens.iterations
              << " residual=" << dens.residual << " rho_c=" << dens.rho_c << "\n";
    for (auto& s : dens.spikes)
        std::cout << "spike at " << s.q << ": exponent " << s.exponent << "\n";
    ctx.write_manifest("density");
    return 0;
}

std::string escape_csv_row(const om::EscapeEstimate& e, const om::TrichotomyReport& rep,
                           const om::ExperimentConfig& cfg) {
    std::string rate_s;
    if (e.total_escape) rate_s = om::kTotalEscapeToken;
    else if (e.rate_spectral >= 0) rate_s = om::format_g17(e.rate_spectral);
    else rate_s = "NA";
    std::string mc_s = e.rate_mc >= 0 ? om::format_g17(e.rate_mc) : "NA";
    std::string mcse_s = e.rate_mc >= 0 ? om::format_g17(e.rate_mc_stderr) : "NA";
    return om::format_g17(e.z) + "," + om::format_g17(e.eps_L) + "," +
           om::format_g17(e.eps_R) + "," + om::format_g17(e.mu_H) + "," + rate_s +
           "," + mc_s + "," + mcse_s + "," + om::format_g17(e.ratio) + "," +
           tri_case_name(rep.tri_case) + "," + om::format_g17(rep.predicted) + "," +
           std::to_string(cfg.n_bins) + "," + std::to_string(cfg.n_samples) + "," +
           (cfg.seed ? std::to_string(*cfg.seed) : "0") + "\n";
}

int cmd_escape(RunContext& ctx) {
    om::UnimodalMap map = resolve_map(ctx.cfg);
    om::CriticalOrbitData orbit = om::critical_orbit(map);
    om::ensure_dir(ctx.out_dir);
    om::InvariantDensity dens = get_density(ctx, map, orbit);
    double z = om::resolve_z(ctx.cfg.z_spec, map, orbit);

    om::SweepParams sp;
    sp.n_bins = ctx.cfg.n_bins;
    sp.method = ctx.cfg.seed ? om::RateMethod::both : om::RateMethod::spectral;
    sp.side_ratio = ctx.cfg.side_ratio;
    sp.workers = ctx.workers;
    if (ctx.cfg.seed) {
        sp.mc.seed = *ctx.cfg.seed;
        sp.mc.n_samples = ctx.cfg.n_samples;
        sp.mc.horizon = ctx.cfg.horizon;
    }
    om::TrichotomyReport rep =
        om::local_escape_sweep(map, orbit, dens, z, eps_grid(ctx.cfg), sp);

    std::string csv =
        "z,eps_L,eps_R,mu_H,rate_spectral,rate_mc,rate_mc_stderr,ratio,case,"
        "predicted,n_bins,n_samples,seed\n";
    for (auto& e : rep.observed) csv += escape_csv_row(e, rep, ctx.cfg);
    om::write_file(ctx.out_dir + "/escape_sweep.csv", csv);

    std::string tr;
    tr += "case " + tri_case_name(rep.tri_case) + "\n";
    tr += "predicted " + om::format_g17(rep.predicted) + "\n";
    tr += "extrapolated " + om::format_g17(rep.extrapolated) + "\n";
    tr += "last_ratio " + om::format_g17(rep.last_ratio) + "\n";

    // for a periodic postcritical z the induced first-return structure exists;
    // cache its table and report the hole-measure ratio at the smallest eps
    om::PointClass pc = om::classify_point(map, orbit, z);
    if (pc.tri_case == om::TrichotomyCase::periodic_in_orbit) {
        try {
            double eps_small = eps_grid(ctx.cfg).back();
            int depth = ctx.cfg.depth > 0
                            ? ctx.cfg.depth
                            : om::choose_depth(map, orbit, z, eps_small);
            om::InducingDomain Y = om::build_inducing_domain(map, orbit, z, depth);
            om::InducedMap induced = om::first_return_map(map, Y, ctx.cfg.tau_max);
            om::ChainStructure chains = om::identify_chains(map, induced, z, pc.period);
            om::annotate_chains(induced, chains);
            std::string table = om::serialize_induced_map(induced);
            std::string ikey = cache_key(map, depth * 1000 + ctx.cfg.tau_max,
                                         "induced z=" + om::format_g17(z));
            std::string ipath = ctx.cache_dir + "/induced_" + ikey + ".txt";
            om::ensure_dir(ctx.cache_dir);
            if (auto prev = om::read_file(ipath)) {
                if (*prev != table)
                    om::raise(om::ErrorKind::NoConvergence,
                              "induced-map cache mismatch, stale cache directory?");
                ctx.note("induced_cache: hit " + ipath);
            } else {
                om::write_file(ipath, table);
                ctx.note("induced_cache: miss " + ipath);
            }
            om::HoleMeasures hm = om::hole_measures(map, induced, dens, orbit, z,
                                                    eps_small * ctx.cfg.side_ratio,
                                                    eps_small);
            tr += "hole_ratio_at_" + om::format_g17(eps_small) + " " +
                  om::format_g17(hm.ratio) + "\n";
            tr += "hole_ratio_predicted " + om::format_g17(hm.predicted_ratio) + "\n";
        } catch (const om::Error& e) {
            if (e.kind() != om::ErrorKind::BadDomain) throw;
            tr += "hole_ratio unavailable (no inducing domain at this depth)\n";
        }
    }
    om::write_file(ctx.out_dir + "/trichotomy_report.txt", tr);
    std::cout << "escape: z=" << z << " case=" << tri_case_name(rep.tri_case)
              << " predicted=" << rep.predicted
              << " extrapolated=" << rep.extrapolated << "\n";
    ctx.write_manifest("escape");
    return 0;
}

int cmd_hts(RunContext& ctx) {
    if (!ctx.cfg.seed)
        om::raise(om::ErrorKind::BadConfig, "[mc].seed is required for hts");
    om::UnimodalMap map = resolve_map(ctx.cfg);
    om::CriticalOrbitData orbit = om::critical_orbit(map);
    om::ensure_dir(ctx.out_dir);
    om::InvariantDensity dens = get_density(ctx, map, orbit);
    double z = om::resolve_z(ctx.cfg.z_spec, map, orbit);
    om::PointClass pc = om::classify_point(map, orbit, z);
    double predicted = pc.predicted_ratio(map.ell());

    std::string csv =
        "z,eps_L,eps_R,mu_H,alpha,t,n_eps,survivor_frac,L_value,stderr,predicted,"
        "n_samples,horizon,seed\n";
    for (double eps : eps_grid(ctx.cfg)) {
        double eps_L = eps * ctx.cfg.side_ratio, eps_R = eps;
        double muH = om::mu_interval(dens, z - eps_L, z + eps_R);
        if (muH <= 0) continue;
        om::HtsParams hp;
        hp.n_samples = ctx.cfg.n_samples;
        hp.seed = *ctx.cfg.seed;
        hp.workers = ctx.workers;
        double worst = 0;
        for (double a : ctx.cfg.alphas)
            for (double t : ctx.cfg.ts)
                worst = std::max(worst, 5.0 * t * std::pow(muH, -a));
        hp.horizon = ctx.cfg.horizon > 0 ? ctx.cfg.horizon
                                         : static_cast<int>(std::min(worst, 2e7));
        om::HittingTimeSample sample =
            om::sample_hitting_times(map, dens, z, eps_L, eps_R, hp);
        for (double a : ctx.cfg.alphas) {
            for (double t : ctx.cfg.ts) {
                om::HtsEstimate est = om::estimate_L(sample, muH, a, t);
                est.predicted = predicted;
                csv += om::format_g17(z) + "," + om::format_g17(eps_L) + "," +
                       om::format_g17(eps_R) + "," + om::format_g17(muH) + "," +
                       om::format_g17(a) + "," + om::format_g17(t) + "," +
                       std::to_string(est.n_eps) + "," +
                       om::format_g17(est.survivor_frac) + "," +
                       om::format_g17(est.L_value) + "," +
                       om::format_g17(est.stderr_) + "," + om::format_g17(predicted) +
                       "," + std::to_string(ctx.cfg.n_samples) + "," +
                       std::to_string(hp.horizon) + "," + std::to_string(*ctx.cfg.seed) +
                       "\n";
            }
        }
    }
    om::write_file(ctx.out_dir + "/hts.csv", csv);
    std::cout << "hts: z=" << z << " rows written to hts.csv\n";
    ctx.write_manifest("hts");
    return 0;
}

int cmd_trichotomy(RunContext& ctx) {
    if (ctx.cfg.z_battery.empty())
        om::raise(om::ErrorKind::BadConfig, "[z].battery must list at least one z");
    om::UnimodalMap map = resolve_map(ctx.cfg);
    om::CriticalOrbitData orbit = om::critical_orbit(map);
    om::ensure_dir(ctx.out_dir);
    om::InvariantDensity dens = get_density(ctx, map, orbit);

    std::string csv =
        "z,case,predicted,extrapolated_escape,escape_pass,L11,L11_pass\n";
    bool all_pass = true;
    for (auto& zspec : ctx.cfg.z_battery) {
        double z = om::resolve_z(zspec, map, orbit);
        om::SweepParams sp;
        sp.n_bins = ctx.cfg.n_bins;
        sp.method = om::RateMethod::spectral;
        sp.side_ratio = ctx.cfg.side_ratio;
        sp.workers = ctx.workers;
        om::TrichotomyReport rep =
            om::local_escape_sweep(map, orbit, dens, z, eps_grid(ctx.cfg), sp);
        bool esc_pass = std::fabs(rep.extrapolated - rep.predicted) <= 0.08;

        double L11 = -1.0;
        bool l_pass = false;
        if (ctx.cfg.seed) {
            // L(1,1) at the smallest eps of the grid
            double eps = eps_grid(ctx.cfg).back();
            double muH = om::mu_interval(dens, z - eps * ctx.cfg.side_ratio, z + eps);
            if (muH > 0) {
                om::HtsParams hp;
                hp.n_samples = ctx.cfg.n_samples;
                hp.seed = *ctx.cfg.seed;
                hp.workers = ctx.workers;
                hp.horizon = static_cast<int>(std::min(5.0 / muH, 2e7));
                om::HittingTimeSample sample = om::sample_hitting_times(
                    map, dens, z, eps * ctx.cfg.side_ratio, eps, hp);
                L11 = om::estimate_L(sample, muH, 1.0, 1.0).L_value;
                l_pass = std::fabs(L11 - rep.predicted) <= 0.1;
            }
        }
        all_pass = all_pass && esc_pass && (!ctx.cfg.seed || l_pass);
        csv += om::format_g17(z) + "," + tri_case_name(rep.tri_case) + "," +
               om::format_g17(rep.predicted) + "," + om::format_g17(rep.extrapolated) +
               "," + (esc_pass ? "pass" : "fail") + "," +
               (L11 >= 0 ? om::format_g17(L11) : "NA") + "," +
               (ctx.cfg.seed ? (l_pass ? "pass" : "fail") : "NA") + "\n";
        std::cout << zspec << " -> z=" << z << " case=" << tri_case_name(rep.tri_case)
                  << " predicted=" << rep.predicted
                  << " extrapolated=" << rep.extrapolated
                  << (esc_pass ? " [pass]" : " [FAIL]") << "\n";
    }
    om::write_file(ctx.out_dir + "/trichotomy.csv", csv);
    ctx.write_manifest("trichotomy");
    return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Misiurewicz-Thurston interval maps: escape rates and hitting-time statistics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override, cache_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int workers = 0;

    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--cache", cache_override, "cache directory override");
    auto* seed_opt = app.add_option("--seed", seed_override, "Monte Carlo seed override");
    app.add_option("--workers", workers, "worker threads (0 = hardware)");

    auto* c_find = app.add_subcommand("find-param", "locate the MT parameter");
    auto* c_dens = app.add_subcommand("density", "invariant density and spikes");
    auto* c_esc = app.add_subcommand("escape", "escape-rate sweep and trichotomy report");
    auto* c_hts = app.add_subcommand("hts", "hitting-time statistics sweep");
    auto* c_tri = app.add_subcommand("trichotomy", "battery over several z");

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;

    try {
        RunContext ctx;
        ctx.cfg = om::parse_config_file(config_path);
        if (seed_given) ctx.cfg.seed = seed_override;
        ctx.out_dir = !out_override.empty() ? out_override : ctx.cfg.out_dir;
        ctx.cache_dir = !cache_override.empty() ? cache_override : ctx.cfg.cache_dir;
        if (const char* env = std::getenv("OPENMAP_CACHE"))
            if (cache_override.empty()) ctx.cache_dir = env;
        ctx.workers = workers;
        om::ensure_dir(ctx.out_dir);

        if (c_find->parsed()) return cmd_find_param(ctx);
        if (c_dens->parsed()) return cmd_density(ctx);
        if (c_esc->parsed()) return cmd_escape(ctx);
        if (c_hts->parsed()) return cmd_hts(ctx);
        if (c_tri->parsed()) return cmd_trichotomy(ctx);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const om::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_input_error() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
