#include "bohmrelax/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>
#include <thread>

#include "bohmrelax/random.hpp"
#include "json.hpp"

#ifndef BOHMRELAX_VERSION
#define BOHMRELAX_VERSION "unknown"
#endif

namespace bohmrelax {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_workers(int requested) {
    if (requested > 0) {
        return requested;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

double linf_against_jacobian(const std::vector<double>& field, const std::vector<double>& jac,
                             double inv_volume) {
    double worst = 0.0;
    for (std::size_t c = 0; c < field.size(); ++c) {
        worst = std::max(worst, std::abs(field[c] - inv_volume * jac[c]));
    }
    return worst;
}

std::string snapshots_csv(const RunReport& report, const CoarseGrid& grid) {
    const bool two_d = grid.domain().dimension() == 2;
    std::string out = two_d ? "t,cell_i,cell_j,rho_cg,born_cg,jac_back_cg,excluded\n"
                            : "t,cell_i,rho_cg,born_cg,jac_back_cg,excluded\n";
    for (const auto& snap : report.snapshots) {
        const std::string t = format_double(snap.t);
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            const auto ij = grid.cell_coords(c);
            out += t;
            out += ',' + std::to_string(ij[0]);
            if (two_d) {
                out += ',' + std::to_string(ij[1]);
            }
            out += ',' + format_double(snap.cells.rho_cg[c]);
            out += ',' + format_double(snap.cells.born_cg[c]);
            out += ',' + format_double(snap.cells.jac_back_cg[c]);
            out += ',' + std::to_string(snap.cells.excluded[c]);
            out += '\n';
        }
    }
    return out;
}

std::string diagnostics_csv(const RunReport& report) {
    std::string out = "t,L1,Hbar,Linf,excluded_total\n";
    for (const auto& snap : report.snapshots) {
        out += format_double(snap.t) + ',' + format_double(snap.diagnostics.l1) + ',' +
               format_double(snap.diagnostics.hbar) + ',' + format_double(snap.diagnostics.linf) +
               ',' + std::to_string(snap.cells.excluded_total()) + '\n';
    }
    return out;
}

std::string pairs_csv(const PairSeparationStats& stats) {
    std::string out = "t,rms_separation,surviving_pairs\n";
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
        out += format_double(stats.times[k]) + ',' + format_double(stats.rms_separation[k]) + ',' +
               std::to_string(stats.surviving_pairs[k]) + '\n';
    }
    return out;
}

std::string preimage_csv(const RunReport& report, const CoarseGrid& grid) {
    const bool two_d = grid.domain().dimension() == 2;
    std::string out = two_d ? "t,cell_i,cell_j,preimage_volume,std_error,quadrature_volume,samples_used,failed\n"
                            : "t,cell_i,preimage_volume,std_error,quadrature_volume,samples_used,failed\n";
    for (const auto& row : report.preimage) {
        const auto ij = grid.cell_coords(row.cell);
        out += format_double(report.preimage_time) + ',' + std::to_string(ij[0]);
        if (two_d) {
            out += ',' + std::to_string(ij[1]);
        }
        out += ',' + format_double(row.estimate.volume) + ',' + format_double(row.estimate.std_error) +
               ',' + format_double(row.quadrature_volume) + ',' +
               std::to_string(row.estimate.samples_used) + ',' + std::to_string(row.estimate.failed) +
               '\n';
    }
    return out;
}

std::string meta_json(const ExperimentConfig& config, const RunReport& report) {
    json meta;
    meta["version"] = BOHMRELAX_VERSION;
    meta["config"] = json::parse(resolved_config_json(config));
    json seeds = {{"run_seed", config.run_seed}};
    if (config.phases) {
        seeds["phase_seed"] = config.phases->seed;
        meta["phase_generator"] = config.phases->generator;
    }
    if (config.pairs) {
        seeds["pair_seed"] = config.pairs->seed;
    }
    meta["seeds"] = seeds;
    meta["sampler"] = "per work item mt19937_64 seeded by splitmix64(seed, index)";
    json snaps = json::array();
    for (const auto& s : report.snapshots) {
        snaps.push_back({{"t", s.t},
                         {"wall_seconds", s.wall_seconds},
                         {"hbar_defined", s.hbar_defined},
                         {"excluded", s.cells.excluded_total()},
                         {"linf_rho_vs_jacobian", s.linf_rho_vs_jacobian},
                         {"linf_born_vs_jacobian", s.linf_born_vs_jacobian}});
    }
    meta["snapshots"] = snaps;
    meta["excluded_total"] = report.excluded_total;
    meta["workers"] = report.workers;
    meta["wall_seconds"] = report.wall_seconds;
    if (report.pairs) {
        meta["pair_growth_exponent"] = std::isfinite(report.pairs->growth_exponent)
                                           ? json(report.pairs->growth_exponent)
                                           : json(nullptr);
        meta["pairs_dropped"] = report.pairs->dropped_pairs;
    }
    return meta.dump(2) + "\n";
}

struct StagedFile {
    std::filesystem::path final_path;
    std::filesystem::path temp_path;
};

StagedFile stage(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
    StagedFile f{dir / name, dir / ("." + name + ".tmp")};
    std::ofstream out(f.temp_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + f.temp_path.string());
    }
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.close();
    if (!out) {
        throw IoError("failed writing " + f.temp_path.string());
    }
    return f;
}

void persist(const std::filesystem::path& dir, const ExperimentConfig& config, RunReport& report) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    const CoarseGrid grid = config.grid();
    std::vector<std::pair<std::string, std::string>> bodies = {
        {"snapshots.csv", snapshots_csv(report, grid)},
        {"diagnostics.csv", diagnostics_csv(report)},
    };
    if (report.pairs) {
        bodies.emplace_back("pairs.csv", pairs_csv(*report.pairs));
    }
    if (!report.preimage.empty()) {
        bodies.emplace_back("preimage.csv", preimage_csv(report, grid));
    }
    bodies.emplace_back("meta.json", meta_json(config, report));

    std::vector<StagedFile> staged;
    try {
        for (const auto& [name, body] : bodies) {
            staged.push_back(stage(dir, name, body));
        }
    } catch (...) {
        for (const auto& f : staged) {
            std::filesystem::remove(f.temp_path, ec);
        }
        throw;
    }
    for (const auto& f : staged) {
        std::filesystem::rename(f.temp_path, f.final_path, ec);
        if (ec) {
            throw IoError("cannot rename " + f.temp_path.string() + ": " + ec.message());
        }
        report.files.push_back(f.final_path);
    }
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::vector<PointPair> sample_pairs(const DomainSpec& domain, std::int64_t count, double separation,
                                    std::uint64_t seed) {
    if (count < 1 || !(separation > 0.0)) {
        throw InvalidArgument("sample_pairs needs count >= 1 and a positive separation");
    }
    std::vector<PointPair> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    const int d = domain.dimension();
    for (std::int64_t i = 0; i < count; ++i) {
        auto engine = item_engine(seed, static_cast<std::uint64_t>(i));
        for (int attempt = 0;; ++attempt) {
            if (attempt == 100000) {
                throw InvalidArgument("pair separation too large for the domain");
            }
            Point a;
            for (int axis = 0; axis < d; ++axis) {
                a[static_cast<std::size_t>(axis)] = uniform01(engine) * domain.length(axis);
            }
            const double theta = 2.0 * kPi * uniform01(engine);
            const Point offset = d == 2 ? Point(separation * std::cos(theta), separation * std::sin(theta))
                                        : Point(theta < kPi ? separation : -separation);
            const Point b = a + offset;
            if (domain.kind() == DomainKind::Box &&
                (domain.wall_distance(a) < separation || !domain.contains(b) ||
                 domain.wall_distance(b) < separation)) {
                continue;
            }
            pairs.emplace_back(a, domain.wrap(b));
            break;
        }
    }
    return pairs;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    return run_experiment(config, config.density, options);
}

RunReport run_experiment(const ExperimentConfig& config, const DensitySpec& density,
                         const RunOptions& options) {
    const auto start = Clock::now();
    const WaveSpec wave = config.wave();
    const CoarseGrid grid = config.grid();
    validate_density(density, config.domain);
    config.integrator.validate();

    RunReport report;
    report.workers = resolve_workers(options.workers);
    const double inv_volume = 1.0 / config.domain.volume();

    for (double t : config.times) {
        const auto t0 = Clock::now();
        Snapshot snap;
        snap.t = t;
        snap.cells = cell_averages(wave, &density, grid, t, config.integrator, report.workers);
        try {
            snap.diagnostics = relaxation_diagnostics(snap.cells.rho_cg, snap.cells.born_cg, grid);
        } catch (const DiagnosticsError& e) {
            snap.diagnostics = e.partial();
            snap.diagnostics.hbar = std::numeric_limits<double>::quiet_NaN();
            snap.hbar_defined = false;
        }
        snap.linf_rho_vs_jacobian = linf_against_jacobian(snap.cells.rho_cg, snap.cells.jac_back_cg, inv_volume);
        snap.linf_born_vs_jacobian =
            linf_against_jacobian(snap.cells.born_cg, snap.cells.jac_back_cg, inv_volume);
        snap.wall_seconds = seconds_since(t0);
        report.excluded_total += snap.cells.excluded_total();
        report.snapshots.push_back(std::move(snap));
    }

    if (config.pairs) {
        const auto pairs =
            sample_pairs(config.domain, config.pairs->count, config.pairs->separation, config.pairs->seed);
        report.pairs = pair_separation_stats(wave, pairs, 0.0, config.times, config.integrator,
                                             report.workers);
    }

    if (config.preimage_samples > 0) {
        const Snapshot& last = report.snapshots.back();
        report.preimage_time = last.t;
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            PreimageRow row;
            row.cell = c;
            row.estimate = preimage_volume(wave, grid, c, last.t, config.preimage_samples, config.run_seed,
                                           config.integrator, report.workers);
            row.quadrature_volume = grid.cell_volume() * last.cells.jac_back_cg[c];
            report.preimage.push_back(row);
        }
    }

    report.wall_seconds = seconds_since(start);
    if (options.write_files) {
        persist(options.output_dir.value_or(std::filesystem::path(config.output_dir)), config, report);
    }
    return report;
}

}  // namespace bohmrelax
