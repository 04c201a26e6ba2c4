#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bohmrelax/errors.hpp"
#include "bohmrelax/experiment.hpp"
#include "bohmrelax/identities.hpp"

namespace {

constexpr int kIdentityCheckFailed = 10;

int run_command(const std::string& path, const std::string& out_dir, int threads) {
    const auto config = bohmrelax::load_config(path);
    bohmrelax::RunOptions options;
    options.workers = threads;
    if (!out_dir.empty()) {
        options.output_dir = out_dir;
    }
    const auto report = bohmrelax::run_experiment(config, options);
    for (const auto& s : report.snapshots) {
        std::printf("t=%-10.6g L1=%-12.6g Hbar=%-12.6g Linf=%-12.6g excluded=%lld\n", s.t,
                    s.diagnostics.l1, s.diagnostics.hbar, s.diagnostics.linf,
                    static_cast<long long>(s.cells.excluded_total()));
    }
    for (const auto& f : report.files) {
        std::printf("wrote %s\n", f.string().c_str());
    }
    std::printf("%.2f s on %d worker(s)\n", report.wall_seconds, report.workers);
    return 0;
}

int check_command(const std::string& path, std::int64_t samples, std::uint64_t seed, int threads) {
    const auto config = bohmrelax::load_config(path);
    bohmrelax::IdentityOptions options;
    options.samples = samples;
    options.seed = seed;
    options.workers = threads > 0 ? threads : 1;
    const auto report = bohmrelax::check_identities(config, options);
    for (const auto& r : report.results) {
        std::printf("%-4s %-15s worst=%-12.4g tol=%-8.1g evaluated=%lld failed=%lld skipped=%lld\n",
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.worst, r.tolerance,
                    static_cast<long long>(r.evaluated), static_cast<long long>(r.failed),
                    static_cast<long long>(r.skipped));
    }
    return report.passed ? 0 : kIdentityCheckFailed;
}

int validate_command(const std::string& path) {
    const auto config = bohmrelax::load_config(path);
    std::cout << bohmrelax::resolved_config_json(config) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse-grained relaxation to quantum equilibrium in de Broglie-Bohm dynamics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", BOHMRELAX_CLI_VERSION);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    auto* run = app.add_subcommand("run", "Run an experiment and write CSV/JSON outputs");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    std::int64_t samples = 200;
    std::uint64_t seed = 0;
    auto* check = app.add_subcommand("check-identities", "Check the flow identities at random points");
    check->add_option("config", config_path, "Config file")->required();
    check->add_option("--samples", samples, "Number of sample points")->check(CLI::PositiveNumber);
    check->add_option("--seed", seed, "Sampling seed");
    check->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);

    auto* validate = app.add_subcommand("validate-config", "Validate a config and print it resolved");
    validate->add_option("config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            return run_command(config_path, out_dir, threads);
        }
        if (*check) {
            return check_command(config_path, samples, seed, threads);
        }
        return validate_command(config_path);
    } catch (const bohmrelax::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
