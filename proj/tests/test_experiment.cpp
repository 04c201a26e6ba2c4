#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bohmrelax/experiment.hpp"
#include "bohmrelax/identities.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace bohmrelax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("bohmrelax_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_standard() {
    ExperimentConfig cfg = testing::standard_config();
    cfg.cells = {4, 4};
    cfg.quadrature = {2, 2};
    cfg.times = {0.0, kPi / 2, kPi};
    return cfg;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::stod(format_double(kPi)) == kPi);
}

TEST_CASE("single mode with uniform density never changes") {
    ExperimentConfig cfg = small_standard();
    cfg.modes = {{{2, 1}, {1.0, 0.0}}};
    cfg.density = DensitySpec::uniform();
    RunOptions opt;
    opt.write_files = false;
    const RunReport r = run_experiment(cfg, opt);
    REQUIRE(r.snapshots.size() == 3);
    for (const auto& s : r.snapshots) {
        CHECK(s.cells.rho_cg == r.snapshots.front().cells.rho_cg);
        CHECK(s.diagnostics.hbar == doctest::Approx(r.snapshots.front().diagnostics.hbar).epsilon(1e-12));
    }
}

TEST_CASE("equivariant initial density stays at equilibrium") {
    const ExperimentConfig cfg = small_standard();
    const WaveSpec w = cfg.wave();
    RunOptions opt;
    opt.write_files = false;
    const RunReport r =
        run_experiment(cfg, DensitySpec::custom([&w](const Point& p) { return w.born_density(p, 0.0); }), opt);
    for (const auto& s : r.snapshots) {
        CHECK(s.diagnostics.l1 < 1e-4);
        CHECK(s.hbar_defined);
    }
}

TEST_CASE("outputs are written with the documented layout") {
    ExperimentConfig cfg = small_standard();
    cfg.pairs = PairDiagnosticsConfig{6, 1e-4, 3};
    cfg.preimage_samples = 100;
    const fs::path dir = scratch("layout");
    RunOptions opt;
    opt.workers = 2;
    opt.output_dir = dir;
    const RunReport r = run_experiment(cfg, opt);
    CHECK(r.files.size() == 5);
    for (const char* name : {"snapshots.csv", "diagnostics.csv", "pairs.csv", "preimage.csv", "meta.json"}) {
        CHECK(fs::exists(dir / name));
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        CHECK(entry.path().extension() != ".tmp");
    }

    std::istringstream snaps(slurp(dir / "snapshots.csv"));
    std::string line;
    std::getline(snaps, line);
    CHECK(line == "t,cell_i,cell_j,rho_cg,born_cg,jac_back_cg,excluded");
    int rows = 0;
    while (std::getline(snaps, line)) {
        ++rows;
    }
    CHECK(rows == 3 * 16);

    std::istringstream diag(slurp(dir / "diagnostics.csv"));
    std::getline(diag, line);
    CHECK(line == "t,L1,Hbar,Linf,excluded_total");
    std::getline(diag, line);
    CHECK(line.rfind("0,", 0) == 0);

    CHECK(slurp(dir / "pairs.csv").rfind("t,rms_separation,surviving_pairs\n", 0) == 0);

    const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    CHECK(meta["seeds"]["phase_seed"] == cfg.phases->seed);
    CHECK(meta["seeds"]["pair_seed"] == 3);
    CHECK(meta.contains("version"));
    CHECK(meta["config"]["grid"]["cells"] == nlohmann::json::array({4, 4}));
    CHECK(meta["snapshots"].size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("one-dimensional runs omit cell_j") {
    const ExperimentConfig cfg = validate_config(R"({
        "wave": {"domain": {"kind": "box", "dimension": 1},
                 "modes": [{"n": [1], "re": 1}, {"n": [2], "im": 1}]},
        "density": {"kind": "uniform"},
        "grid": {"cells": [4], "quadrature": [3]},
        "times": [0, 1]})");
    const fs::path dir = scratch("line");
    RunOptions opt;
    opt.output_dir = dir;
    run_experiment(cfg, opt);
    std::istringstream snaps(slurp(dir / "snapshots.csv"));
    std::string line;
    std::getline(snaps, line);
    CHECK(line == "t,cell_i,rho_cg,born_cg,jac_back_cg,excluded");
    fs::remove_all(dir);
}

TEST_CASE("snapshots are identical across worker counts") {
    const ExperimentConfig cfg = small_standard();
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    RunOptions opt;
    opt.workers = 1;
    opt.output_dir = a;
    run_experiment(cfg, opt);
    opt.workers = 4;
    opt.output_dir = b;
    run_experiment(cfg, opt);
    CHECK(slurp(a / "snapshots.csv") == slurp(b / "snapshots.csv"));
    CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("a failed run writes nothing") {
    ExperimentConfig cfg = small_standard();
    cfg.integrator.node_epsilon = 10.0;
    const fs::path dir = scratch("failed");
    RunOptions opt;
    opt.output_dir = dir;
    CHECK_THROWS_AS(run_experiment(cfg, opt), CellUnresolvable);
    CHECK(!fs::exists(dir / "snapshots.csv"));
    CHECK(!fs::exists(dir / "meta.json"));
}

TEST_CASE("identity checks") {
    const ExperimentConfig single = validate_config(R"({
        "wave": {"domain": {"kind": "box", "dimension": 2}, "modes": [{"n": [1, 2], "re": 1}]},
        "density": {"kind": "uniform"},
        "grid": {"cells": [4, 4], "quadrature": [2, 2]},
        "times": [0]})");
    IdentityOptions opt;
    opt.samples = 30;
    const IdentityReport r = check_identities(single, opt);
    CHECK(r.passed);
    for (const auto& item : r.results) {
        CHECK(item.worst < 1e-12);
    }

    // A 1% velocity error must break the Lagrangian transport identity.
    const ExperimentConfig two = validate_config(R"({
        "wave": {"domain": {"kind": "box", "dimension": 2},
                 "modes": [{"n": [1, 1], "re": 1}, {"n": [2, 1], "im": 1}]},
        "density": {"kind": "uniform"},
        "grid": {"cells": [4, 4], "quadrature": [2, 2]},
        "times": [0]})");
    opt.samples = 20;
    const IdentityReport clean = check_identities(two, opt);
    CHECK(clean.passed);
    opt.velocity_scale = 1.01;
    const IdentityReport tampered = check_identities(two, opt);
    CHECK(!tampered.passed);
    CHECK(!tampered.results[1].passed);
    CHECK(tampered.results[1].name == "born_transport");
    CHECK(tampered.results[3].passed);
}
