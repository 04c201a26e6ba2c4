#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bohmrelax/coarsegrain.hpp"
#include "bohmrelax/density.hpp"

namespace bohmrelax {

/// Draws one point from rho_0 by exact sampling (uniform) or rejection
/// (mode Born densities). Custom densities are not samplable.
Point sample_rho0(const DensitySpec& spec, const DomainSpec& domain, std::mt19937_64& engine);

/// Forward-ensemble oracle for the coarse-grained density: particles drawn
/// from rho_0, advected from 0 to t, binned into the grid.
struct ForwardHistogram {
    double t = 0.0;
    std::vector<double> density;    // count / (N w)
    std::vector<double> std_error;  // binomial standard error of density
    std::int64_t particles = 0;     // successfully advected
    std::int64_t failed = 0;
};

/// Particle i uses the generator stream (seed, i), so the histogram does not
/// depend on `workers`.
ForwardHistogram forward_histogram(const WaveSpec& wave, const DensitySpec& spec,
                                   const CoarseGrid& grid, double t, std::int64_t n_particles,
                                   std::uint64_t seed, const IntegratorSettings& settings = {},
                                   int workers = 1);

}  // namespace bohmrelax
