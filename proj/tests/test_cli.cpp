#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "openmap/config.hpp"
#include "openmap/io.hpp"

namespace fs = std::filesystem;
using namespace openmap;

namespace {

std::string slurp(const std::string& path) {
    auto text = read_file(path);
    REQUIRE(text.has_value());
    return *text;
}

struct TempDir {
    fs::path path;
    TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("openmap_test_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(OPENMAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

const char* kBaseConfig = R"(
[map]
A = 4.0
ell = 2.0
[z]
value = 0.75
[eps]
start = 1e-2
factor = 0.31622776601683794
count = 3
[numerics]
n_bins = 4096
[mc]
n_samples = 20000
seed = 9
horizon = 400
)";

}  // namespace

TEST_CASE("config parsing: sections, lists, failures") {
    ExperimentConfig cfg = parse_config_text(kBaseConfig);
    CHECK(cfg.A.has_value());
    CHECK(*cfg.A == 4.0);
    CHECK(cfg.z_spec == "0.75");
    CHECK(cfg.eps_count == 3);
    CHECK(cfg.n_bins == 4096);
    CHECK(cfg.seed.has_value());

    CHECK_THROWS_AS(parse_config_text("[map]\nbogus = 1\n"), Error);
    CHECK_THROWS_AS(parse_config_text("[map]\nA 4\n"), Error);
    CHECK_THROWS_AS(parse_config_text("[eps]\nfactor = 2.0\n"), Error);  // needs A too
}

TEST_CASE("cli: find-param reports the map and bad brackets exit with 2") {
    TempDir tmp("findparam");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path, "[map]\nk0 = 2\np = 1\nbracket = 3.9 4.0\nell = 2.0\n");
    int rc = run_cli("--config " + cfg_path + " --out " + tmp.str() + "/out find-param");
    CHECK(rc == 0);
    std::string rep = slurp(tmp.str() + "/out/map_report.txt");
    CHECK(rep.find("A 4\n") != std::string::npos);
    CHECK(rep.find("k0 2") != std::string::npos);

    write_file(cfg_path, "[map]\nk0 = 2\np = 1\nbracket = 2.0 2.5\nell = 2.0\n");
    rc = run_cli("--config " + cfg_path + " --out " + tmp.str() + "/out find-param");
    CHECK(rc == 2);

    rc = run_cli("--config " + tmp.str() + "/missing.ini find-param");
    CHECK(rc == 2);
}

TEST_CASE("cli: density command writes CSVs and caches deterministically") {
    TempDir tmp("density");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path, std::string(kBaseConfig) + "[output]\nout_dir = " + tmp.str() +
                             "/out\ncache_dir = " + tmp.str() + "/cache\n");
    int rc = run_cli("--config " + cfg_path + " density");
    REQUIRE(rc == 0);
    std::string first = slurp(tmp.str() + "/out/density.csv");
    std::string manifest1 = slurp(tmp.str() + "/out/run_manifest.txt");
    CHECK(manifest1.find("density_cache: miss") != std::string::npos);

    // warm cache: byte-identical CSV
    rc = run_cli("--config " + cfg_path + " density");
    REQUIRE(rc == 0);
    CHECK(slurp(tmp.str() + "/out/density.csv") == first);
    std::string manifest2 = slurp(tmp.str() + "/out/run_manifest.txt");
    CHECK(manifest2.find("density_cache: hit") != std::string::npos);

    std::string spikes = slurp(tmp.str() + "/out/spikes.csv");
    CHECK(spikes.find("exponent") != std::string::npos);
}

TEST_CASE("cli: escape sweep CSV is deterministic and worker-independent") {
    TempDir tmp("escape");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path, std::string(kBaseConfig) + "[output]\nout_dir = " + tmp.str() +
                             "/out\ncache_dir = " + tmp.str() + "/cache\n");
    int rc = run_cli("--config " + cfg_path + " --workers 1 escape");
    REQUIRE(rc == 0);
    std::string csv1 = slurp(tmp.str() + "/out/escape_sweep.csv");
    CHECK(csv1.find("rate_spectral") != std::string::npos);

    rc = run_cli("--config " + cfg_path + " --workers 2 escape");
    REQUIRE(rc == 0);
    CHECK(slurp(tmp.str() + "/out/escape_sweep.csv") == csv1);

    // header + one row per sweep point
    std::size_t lines = 0;
    for (char c : csv1)
        if (c == '\n') ++lines;
    CHECK(lines == 4);
}

TEST_CASE("cli: escape at a periodic postcritical z caches the induced table") {
    TempDir tmp("indcache");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path,
               "[map]\nA = 4.0\n[z]\nvalue = 0.0\n[eps]\nstart = 1e-2\n"
               "factor = 0.31622776601683794\ncount = 3\n[numerics]\nn_bins = 16384\n"
               "[output]\nout_dir = " +
                   tmp.str() + "/out\ncache_dir = " + tmp.str() + "/cache\n");
    int rc = run_cli("--config " + cfg_path + " escape");
    REQUIRE(rc == 0);
    std::string rep = slurp(tmp.str() + "/out/trichotomy_report.txt");
    CHECK(rep.find("hole_ratio_predicted 0.5") != std::string::npos);
    bool found = false;
    for (auto& e : fs::directory_iterator(tmp.str() + "/cache"))
        if (e.path().filename().string().rfind("induced_", 0) == 0) found = true;
    CHECK(found);
    // warm run verifies the cached table byte-for-byte
    rc = run_cli("--config " + cfg_path + " escape");
    CHECK(rc == 0);
    std::string manifest = slurp(tmp.str() + "/out/run_manifest.txt");
    CHECK(manifest.find("induced_cache: hit") != std::string::npos);
}

TEST_CASE("cli: hts requires a seed") {
    TempDir tmp("htsseed");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path,
               "[map]\nA = 4.0\n[z]\nvalue = 0.3\n[eps]\nstart = 5e-3\ncount = 1\n"
               "[numerics]\nn_bins = 4096\n[output]\nout_dir = " +
                   tmp.str() + "/out\ncache_dir = " + tmp.str() + "/cache\n");
    int rc = run_cli("--config " + cfg_path + " hts");
    CHECK(rc == 2);
    rc = run_cli("--config " + cfg_path + " --seed 4 hts");
    CHECK(rc == 0);
    std::string csv = slurp(tmp.str() + "/out/hts.csv");
    CHECK(csv.find("survivor_frac") != std::string::npos);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 2);
}

TEST_CASE("cli: trichotomy battery and exit codes") {
    TempDir tmp("tri");
    std::string cfg_path = tmp.str() + "/cfg.ini";
    write_file(cfg_path,
               "[map]\nA = 4.0\n[z]\nbattery = 0.0 0.75 0.3\n[eps]\nstart = 1e-2\n"
               "factor = 0.31622776601683794\ncount = 4\n[numerics]\nn_bins = 16384\n"
               "[output]\nout_dir = " +
                   tmp.str() + "/out\ncache_dir = " + tmp.str() + "/cache\n");
    int rc = run_cli("--config " + cfg_path + " trichotomy");
    CHECK(rc == 0);
    std::string csv = slurp(tmp.str() + "/out/trichotomy.csv");
    CHECK(csv.find("periodic_in_orbit") != std::string::npos);
    CHECK(csv.find("periodic_off_orbit") != std::string::npos);
    CHECK(csv.find("nonperiodic") != std::string::npos);
    CHECK(csv.find("fail") == std::string::npos);

    // empty battery is a usage error
    write_file(cfg_path, "[map]\nA = 4.0\n");
    rc = run_cli("--config " + cfg_path + " trichotomy");
    CHECK(rc == 2);
}

TEST_CASE("resolve_z specs") {
    UnimodalMap m(4.0, 2.0);
    CriticalOrbitData od = critical_orbit(m);
    CHECK(resolve_z("0.25", m, od) == 0.25);
    CHECK(resolve_z("postcritical:2", m, od) == doctest::Approx(0.0));
    double z = resolve_z("periodic:2:0", m, od);
    CHECK(std::fabs(eval(m, z, 2) - z) < 1e-9);
    CHECK_THROWS_AS(resolve_z("postcritical:9", m, od), Error);
    CHECK_THROWS_AS(resolve_z("wibble", m, od), Error);
}
