#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohmrelax/coarsegrain.hpp"
#include "bohmrelax/config.hpp"

namespace bohmrelax {

struct Snapshot {
    double t = 0.0;
    CellAverages cells;
    RelaxationDiagnostics diagnostics;
    /// False when Hbar is undefined (some cell has born_cg = 0 but
    /// rho_cg > 0); diagnostics.hbar is then NaN.
    bool hbar_defined = true;
    /// Linf of {rho} - W^-1 {J} and of {|psi|^2} - W^-1 {J}.
    double linf_rho_vs_jacobian = 0.0;
    double linf_born_vs_jacobian = 0.0;
    double wall_seconds = 0.0;
};

struct PreimageRow {
    std::size_t cell = 0;
    PreimageEstimate estimate;
    /// w {J(x, t; 0)} for the same cell, for comparison.
    double quadrature_volume = 0.0;
};

struct RunReport {
    std::vector<Snapshot> snapshots;
    std::optional<PairSeparationStats> pairs;
    std::vector<PreimageRow> preimage;
    double preimage_time = 0.0;
    std::int64_t excluded_total = 0;
    double wall_seconds = 0.0;
    int workers = 1;
    std::vector<std::filesystem::path> files;
};

struct RunOptions {
    /// 0 selects std::thread::hardware_concurrency().
    int workers = 0;
    bool write_files = true;
    std::optional<std::filesystem::path> output_dir;
};

/// Runs every snapshot of the config and, unless disabled, persists
/// snapshots.csv, diagnostics.csv, pairs.csv (when pairs are configured),
/// preimage.csv (when preimage_samples > 0) and meta.json. Files are staged
/// under temporary names and renamed only after every computation has
/// succeeded, so a failed run writes nothing.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Same run, but with rho_0 replaced (the Custom test hook cannot be
/// expressed in a config file).
RunReport run_experiment(const ExperimentConfig& config, const DensitySpec& density,
                         const RunOptions& options);

/// Deterministic pair sample for pair_separation_stats: pair i is drawn from
/// the stream (seed, i), with both members at least `separation` from any
/// Box wall.
std::vector<PointPair> sample_pairs(const DomainSpec& domain, std::int64_t count,
                                    double separation, std::uint64_t seed);

std::string format_double(double value);

}  // namespace bohmrelax
