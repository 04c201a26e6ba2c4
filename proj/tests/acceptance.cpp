// Acceptance suite: one PASS/FAIL line per criterion, on stdout and in
// acceptance_report.txt. The exit status is 0 whenever the suite ran to
// completion; the verdicts are in the output.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bohmrelax/config.hpp"
#include "bohmrelax/experiment.hpp"
#include "bohmrelax/identities.hpp"
#include "bohmrelax/random.hpp"

using namespace bohmrelax;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::ofstream report("acceptance_report.txt");

void emit(const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report << line << '\n' << std::flush;
}

void verdict(bool ok, const std::string& name, const std::string& detail) {
    emit(std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail);
    failures += ok ? 0 : 1;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig standard() { return load_config(std::string(BOHMRELAX_FIXTURE_DIR) + "/standard.json"); }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("bohmrelax_acceptance_" + name);
    fs::remove_all(dir);
    return dir;
}

void identity_suite() {
    IdentityOptions opt;
    opt.samples = 200;
    opt.seed = 0;
    const IdentityReport r = check_identities(standard(), opt);
    for (const IdentityResult& item : r.results) {
        verdict(item.passed, "identities/" + item.name,
                fmt("worst %.3e (tolerance %.0e), evaluated %lld, failed %lld, skipped %lld", item.worst,
                    item.tolerance, static_cast<long long>(item.evaluated), static_cast<long long>(item.failed),
                    static_cast<long long>(item.skipped)));
    }
}

void change_of_variables() {
    const ExperimentConfig cfg = standard();
    const WaveSpec w = cfg.wave();
    const CoarseGrid grid(cfg.domain, {2, 2}, {32, 32});
    const double t = 2 * kPi;
    const std::vector<double> jac = cell_average_jacobian_back(w, grid, t, cfg.integrator);

    double worst_sigma = 0.0;
    double total = 0.0;
    double pooled_var = 0.0;
    long long failed = 0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const PreimageEstimate est = preimage_volume(w, grid, c, t, 10000, cfg.run_seed, cfg.integrator);
        const double quad = grid.cell_volume() * jac[c];
        worst_sigma = std::max(worst_sigma, std::abs(quad - est.volume) / est.std_error);
        total += est.volume;
        pooled_var += est.std_error * est.std_error;
        failed += est.failed;
    }
    verdict(worst_sigma < 3.0, "change_of_variables/per_cell",
            fmt("worst |w{J} - preimage| = %.2f standard errors over %zu cells at t = 2pi, %lld failed samples",
                worst_sigma, grid.cell_count(), failed));
    const double volume = cfg.domain.volume();
    const double pooled = std::sqrt(pooled_var);
    verdict(std::abs(total - volume) < 3.0 * pooled, "change_of_variables/tiling",
            fmt("sum of preimage volumes %.6f vs W %.6f, deviation %.2f pooled sigma", total, volume,
                std::abs(total - volume) / pooled));
}

void relaxation_and_determinism() {
    const ExperimentConfig cfg = standard();
    const fs::path one = scratch("workers1");
    const fs::path eight = scratch("workers8");

    RunOptions opt;
    opt.workers = 1;
    opt.output_dir = one;
    const RunReport r = run_experiment(cfg, opt);
    const Snapshot& first = r.snapshots.front();
    const Snapshot& last = r.snapshots.back();

    const double hbar_ratio = last.diagnostics.hbar / first.diagnostics.hbar;
    verdict(last.hbar_defined && hbar_ratio < 0.2, "relaxation/hbar",
            fmt("Hbar(4pi)/Hbar(0) = %.4f / %.4f = %.4f (limit 0.2)", last.diagnostics.hbar, first.diagnostics.hbar,
                hbar_ratio));
    const double l1_ratio = last.diagnostics.l1 / first.diagnostics.l1;
    verdict(l1_ratio < 0.2, "relaxation/l1",
            fmt("L1(4pi)/L1(0) = %.4f / %.4f = %.4f (limit 0.2)", last.diagnostics.l1, first.diagnostics.l1,
                l1_ratio));
    const double linf_limit = 0.25 * first.linf_rho_vs_jacobian;
    verdict(last.linf_rho_vs_jacobian < linf_limit, "relaxation/linf",
            fmt("Linf({rho} - {J}/W) at 4pi = %.4f (limit %.4f)", last.linf_rho_vs_jacobian, linf_limit));

    opt.workers = 8;
    opt.output_dir = eight;
    run_experiment(cfg, opt);
    const std::string a = slurp(one / "snapshots.csv");
    const std::string b = slurp(eight / "snapshots.csv");
    verdict(!a.empty() && a == b, "determinism/snapshots_csv",
            fmt("1 worker vs 8 workers: %zu and %zu bytes, %s", a.size(), b.size(),
                a == b ? "identical" : "different"));
    fs::remove_all(one);
    fs::remove_all(eight);
}

double hbar_spread(const RunReport& r) {
    double lo = r.snapshots.front().diagnostics.hbar;
    double hi = lo;
    for (const Snapshot& s : r.snapshots) {
        lo = std::min(lo, s.diagnostics.hbar);
        hi = std::max(hi, s.diagnostics.hbar);
    }
    return hi - lo;
}

void non_relaxation() {
    RunOptions opt;
    opt.write_files = false;

    ExperimentConfig single = standard();
    single.modes = {{{2, 1}, {1.0, 0.0}}};
    single.phases.reset();
    const RunReport rs = run_experiment(single, opt);
    const double spread = hbar_spread(rs);
    verdict(spread <= 1e-10, "non_relaxation/single_mode",
            fmt("Hbar spread %.3e over %zu snapshots (Hbar(0) = %.6f)", spread, rs.snapshots.size(),
                rs.snapshots.front().diagnostics.hbar));

    const ExperimentConfig torus = validate_config(R"({
        "wave": {"domain": {"kind": "torus", "dimension": 2}, "modes": [{"n": [1, 0], "re": 1}]},
        "density": {"kind": "uniform"},
        "grid": {"cells": [8, 8], "quadrature": [4, 4]},
        "times": [0, 1.5707963267948966, 3.141592653589793, 4.71238898038469, 6.283185307179586,
                  7.853981633974483, 9.42477796076938, 10.995574287564276, 12.566370614359172]})");
    const double norm = 4 * kPi * kPi;
    const DensitySpec profile = DensitySpec::custom([norm](const Point& p) {
        return (1.0 + 0.5 * std::cos(p[0]) * std::cos(p[1]) + 0.3 * std::sin(2 * p[0])) / norm;
    });
    const RunReport rt = run_experiment(torus, profile, opt);
    double worst_j = 0.0;
    for (const Snapshot& s : rt.snapshots) {
        for (double j : s.cells.jac_back_cg) {
            worst_j = std::max(worst_j, std::abs(j - 1.0));
        }
    }
    const double torus_spread = hbar_spread(rt);
    verdict(worst_j <= 1e-8 && torus_spread <= 1e-8, "non_relaxation/torus_translation",
            fmt("max |{J} - 1| = %.3e, Hbar spread %.3e (Hbar(0) = %.6f)", worst_j, torus_spread,
                rt.snapshots.front().diagnostics.hbar));
}

void equivariance() {
    const ExperimentConfig cfg = standard();
    const WaveSpec w = cfg.wave();
    const DensitySpec born0 = DensitySpec::custom([&w](const Point& p) { return w.born_density(p, 0.0); });
    auto engine = item_engine(cfg.run_seed, 0);
    double worst = 0.0;
    int evaluated = 0;
    int failed = 0;
    int skipped = 0;
    for (int i = 0; i < 100; ++i) {
        const Point x(uniform01(engine) * kPi, uniform01(engine) * kPi);
        for (double t : {kPi, 2 * kPi, 4 * kPi}) {
            const double want = w.born_density(x, t);
            if (want <= 1e-6) {
                ++skipped;
                continue;
            }
            try {
                worst = std::max(worst, std::abs(rho(w, born0, x, t, cfg.integrator) - want) / want);
                ++evaluated;
            } catch (const Error&) {
                ++failed;
            }
        }
    }
    verdict(failed == 0 && worst < 1e-5, "equivariance",
            fmt("max relative deviation %.3e over %d evaluations (limit 1e-5), %d failed, %d below |psi|^2 = 1e-6",
                worst, evaluated, failed, skipped));
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    identity_suite();
    change_of_variables();
    relaxation_and_determinism();
    non_relaxation();
    equivariance();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(fmt("%d criteria failed; %.0f s", failures, seconds));
    return 0;
}
