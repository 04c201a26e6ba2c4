#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bohmrelax/config.hpp"

namespace bohmrelax {

struct IdentityResult {
    std::string name;
    double tolerance = 0.0;
    /// Largest residual over the evaluated samples.
    double worst = 0.0;
    std::int64_t evaluated = 0;
    /// Samples skipped because an evaluation threw (node, wall, step limit).
    std::int64_t failed = 0;
    /// Samples outside the identity's applicability (e.g. |psi|^2 <= 1e-6).
    std::int64_t skipped = 0;
    bool passed = false;
};

struct IdentityReport {
    std::vector<IdentityResult> results;
    bool passed = false;
};

struct IdentityOptions {
    std::int64_t samples = 200;
    std::uint64_t seed = 0;
    int workers = 1;
    /// Mutation hook forwarded to WaveSpec::with_velocity_scale.
    double velocity_scale = 1.0;
    double jacobian_fd_step = 1e-5;
};

/// Evaluates, at uniformly drawn label points a and times t in (0, 2 pi]:
///   jacobian        |J - J_fd| / J                          < 1e-4
///   born_transport  ||psi(P, t)|^2 J - |psi(a, 0)|^2| / |psi(a, 0)|^2 < 1e-5
///   round_trip      |P(P(a, 0; 2 pi), 2 pi; 0) - a|         < 1e-6
///   continuity      |d|psi|^2/dt + div j| at (a, t)         < 1e-8
IdentityReport check_identities(const ExperimentConfig& config, const IdentityOptions& options = {});

}  // namespace bohmrelax
