#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bohmrelax/coarsegrain.hpp"
#include "bohmrelax/density.hpp"
#include "bohmrelax/flowmap.hpp"
#include "bohmrelax/wavefunction.hpp"

namespace bohmrelax {

/// How random phases were generated, kept for the run metadata.
struct PhaseProvenance {
    std::uint64_t seed = 0;
    std::string generator = "mt19937_64, theta = 2 pi (u >> 11) 2^-53";
    std::vector<QuantumNumbers> modes;
};

struct PairDiagnosticsConfig {
    std::int64_t count = 0;
    double separation = 0.0;
    std::uint64_t seed = 0;
};

/// Fully resolved experiment description: random phases expanded and the
/// coefficients normalized.
struct ExperimentConfig {
    DomainSpec domain = DomainSpec::standard(DomainKind::Box, 2);
    std::vector<ModeSpec> modes;
    std::optional<PhaseProvenance> phases;
    DensitySpec density = DensitySpec::uniform();
    std::array<int, 2> cells{16, 16};
    std::array<int, 2> quadrature{4, 4};
    std::vector<double> times;
    IntegratorSettings integrator;
    std::int64_t preimage_samples = 0;
    std::optional<PairDiagnosticsConfig> pairs;
    std::string output_dir = "output";
    std::uint64_t run_seed = 0;

    WaveSpec wave() const { return WaveSpec(domain, modes); }
    CoarseGrid grid() const { return CoarseGrid(domain, cells, quadrature); }
};

/// Parses and validates a JSON config. Unknown keys are rejected. Throws
/// ConfigError listing every violation, one "field: message" per line.
ExperimentConfig validate_config(std::string_view raw);

/// Reads the file and forwards to validate_config; IoError when unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the resolved config (explicit coefficients). Feeding it
/// back through validate_config reproduces the same config.
std::string resolved_config_json(const ExperimentConfig& config);

}  // namespace bohmrelax
