#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcf/errors.hpp"
#include "pcf/io.hpp"
#include "pcf/run.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pcf;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("parse_config: defaults, errors with line numbers, duplicates") {
    RunConfig cfg = parse_config("[lattice]\nn = 2\nsizes = 16\nperiods = pi\n");
    CHECK(cfg.sizes == std::vector<int>{16, 16, 16, 16});
    CHECK(cfg.periods[0] == doctest::Approx(M_PI));
    CHECK(cfg.mode == RunMode::PcfOneform);
    CHECK(cfg.sample_every == 10);

    CHECK_THROWS_AS((void)parse_config("[lattice]\nsizes = 15\n"), ConfigError);
    try {
        (void)parse_config("[lattice]\nn = 2\nn = 3\n");
        FAIL("expected duplicate-key error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_config("[lattice]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[nosuch]\nx = 1\n"), ConfigError);
    // normalized one-form runs are rejected at parse time
    CHECK_THROWS_AS(
        (void)parse_config("[flow]\nmode = pcf-oneform\nnormalized = true\n"), ConfigError);

    // all errors reported at once
    try {
        (void)parse_config("[lattice]\nsizes = 15\nperiods = -1\nbogus = 2\n");
        FAIL("expected errors");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("even") != std::string::npos);
        CHECK(msg.find("positive") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
    }
}

TEST_CASE("snapshot round trip is bit-identical") {
    TempDir dir("pcf_io_test");
    auto lat = test::lattice2(8);
    auto bg = std::make_shared<FlowBackground>(make_torus_background(lat));
    VectorField a0 = random_pluriclosed_perturbation(*bg->lattice, bg->ghat, 99u, 0.1, 2);
    FlowState s = make_oneform_state(bg, a0);
    s.t = 0.375;

    const std::string p1 = dir.str() + "/a.pcf1";
    write_snapshot(p1, s, 1.0);
    FlowState r = flow_state_from_snapshot(read_snapshot(p1));
    CHECK(r.t == s.t);
    CHECK(r.alpha.data == s.alpha.data);
    CHECK(r.g.mat.data == s.g.mat.data);

    const std::string p2 = dir.str() + "/b.pcf1";
    write_snapshot(p2, r, 1.0);
    CHECK(slurp(p1) == slurp(p2)); // byte-identical across write/read/write

    // version/truncation errors
    {
        std::string bytes = slurp(p1);
        bytes[4] = char(9); // clobber version
        std::ofstream(dir.str() + "/bad.pcf1", std::ios::binary) << bytes;
        CHECK_THROWS_AS((void)read_snapshot(dir.str() + "/bad.pcf1"), IoError);
        std::ofstream(dir.str() + "/trunc.pcf1", std::ios::binary)
            << bytes.substr(0, bytes.size() / 2);
        CHECK_THROWS_AS((void)read_snapshot(dir.str() + "/trunc.pcf1"), IoError);
    }
}

TEST_CASE("series_csv shape and run artifact determinism") {
    TempDir dir("pcf_run_test");
    RunConfig cfg = parse_config(
        "[lattice]\nn = 2\nsizes = 8\nperiods = pi\n"
        "[flow]\nmode = pcf-oneform\nt_end = 0.02\nfixed_dt = 0.002\n"
        "[initial]\nseed = 5\namplitude = 0.05\nmax_mode = 1\n"
        "[sampling]\nsample_every = 4\n"
        "[diagnostics]\nfk_max = 0\nrecord_triples = false\n");
    cfg.output_dir = dir.str() + "/run1";
    RunResult r1 = run_flow(cfg);
    CHECK(!r1.aborted);
    CHECK(r1.steps == 10);
    // header + t=0 + samples at steps 4, 8 + final step 10
    {
        std::istringstream csv(slurp(cfg.output_dir + "/series.csv"));
        std::string line;
        int lines = 0;
        while (std::getline(csv, line)) ++lines;
        CHECK(lines == 1 + 4);
    }
    cfg.output_dir = dir.str() + "/run2";
    RunResult r2 = run_flow(cfg);
    CHECK(slurp(dir.str() + "/run1/series.csv") == slurp(dir.str() + "/run2/series.csv"));
    CHECK(slurp(dir.str() + "/run1/final.pcf1") == slurp(dir.str() + "/run2/final.pcf1"));

    // steps = 0: header plus the single initial row
    RunConfig cfg0 = cfg;
    cfg0.t_end = 0.0;
    cfg0.output_dir = dir.str() + "/run0";
    RunResult r0 = run_flow(cfg0);
    CHECK(r0.steps == 0);
    std::istringstream csv(slurp(cfg0.output_dir + "/series.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 2);
}

TEST_CASE("flat run: residual columns stay at rounding level") {
    RunConfig cfg = parse_config(
        "[lattice]\nn = 2\nsizes = 8\nperiods = pi\n"
        "[flow]\nmode = pcf-oneform\nt_end = 0.05\n"
        "[initial]\nseed = 5\namplitude = 0.0\n"
        "[sampling]\nsample_every = 5\n"
        "[diagnostics]\nfk_max = 1\nrecord_triples = false\n");
    RunResult res = run_flow(cfg);
    CHECK(!res.aborted);
    for (const auto& rec : res.series) {
        CHECK(rec.v[pcf_column("sup_T2")] < 1e-12);
        CHECK(rec.v[pcf_column("plurires")] < 1e-12);
        CHECK(rec.v[pcf_column("mean_drift")] < 1e-12);
        CHECK(rec.v[pcf_column("detW_err")] < 1e-12);
        CHECK(rec.v[pcf_column("f0_sup")] < 1e-12);
    }
}

TEST_CASE("gk snapshot round trip") {
    TempDir dir("pcf_gk_io_test");
    auto lat = test::lattice2(8);
    auto bg = std::make_shared<GKBackground>(make_gk_background(lat, 1));
    ScalarField u0 = random_gk_potential(*bg->lattice, *bg, 4u, 0.05, 1);
    GKState s = make_gk_state(bg, u0);
    s.t = 1.25;
    const std::string p = dir.str() + "/g.pcf1";
    write_gk_snapshot(p, s, 1.0);
    GKState r = gk_state_from_snapshot(read_snapshot(p));
    CHECK(r.t == s.t);
    CHECK(r.u.data == s.u.data);
    CHECK(r.bg->split.k_plus == 1);
}
