#include "bohmrelax/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "bohmrelax/parallel.hpp"
#include "bohmrelax/random.hpp"

namespace bohmrelax {

namespace {

Point uniform_point(const DomainSpec& domain, std::mt19937_64& engine) {
    Point p;
    for (int axis = 0; axis < domain.dimension(); ++axis) {
        p[static_cast<std::size_t>(axis)] = uniform01(engine) * domain.length(axis);
    }
    return p;
}

}  // namespace

Point sample_rho0(const DensitySpec& spec, const DomainSpec& domain, std::mt19937_64& engine) {
    const auto& kind = spec.kind();
    if (std::holds_alternative<DensitySpec::Uniform>(kind)) {
        return uniform_point(domain, engine);
    }
    if (const auto* m = std::get_if<DensitySpec::ModeBorn>(&kind)) {
        if (domain.kind() == DomainKind::Torus) {
            return uniform_point(domain, engine);
        }
        // Separable sin^2 factors, rejection per axis with envelope 1.
        Point p;
        for (int axis = 0; axis < domain.dimension(); ++axis) {
            const auto a = static_cast<std::size_t>(axis);
            const double l = domain.length(axis);
            for (;;) {
                const double x = uniform01(engine) * l;
                const double s = std::sin(kPi * m->n[a] * x / l);
                if (uniform01(engine) < s * s) {
                    p[a] = x;
                    break;
                }
            }
        }
        return p;
    }
    if (const auto* mix = std::get_if<DensitySpec::Mixture>(&kind)) {
        const double u = uniform01(engine);
        double acc = 0.0;
        for (const auto& c : mix->components) {
            acc += c.weight;
            if (u < acc) {
                return sample_rho0(c.density, domain, engine);
            }
        }
        return sample_rho0(mix->components.back().density, domain, engine);
    }
    throw InvalidArgument("custom densities cannot be sampled");
}

ForwardHistogram forward_histogram(const WaveSpec& wave, const DensitySpec& spec,
                                   const CoarseGrid& grid, double t, std::int64_t n_particles,
                                   std::uint64_t seed, const IntegratorSettings& settings,
                                   int workers) {
    if (n_particles < 1) {
        throw InvalidArgument("forward_histogram needs at least one particle");
    }
    settings.validate();
    const DomainSpec& domain = wave.domain();
    std::vector<std::optional<std::size_t>> bins(static_cast<std::size_t>(n_particles));
    parallel_for(bins.size(), workers, [&](std::size_t i) {
        auto engine = item_engine(seed, i);
        const Point a = sample_rho0(spec, domain, engine);
        try {
            const Point x = advect(wave, {a, 0.0, t}, settings).position;
            int idx[2] = {0, 0};
            for (int axis = 0; axis < domain.dimension(); ++axis) {
                const int n = grid.cells(axis);
                const int k = static_cast<int>(std::floor(x[static_cast<std::size_t>(axis)] /
                                                          grid.cell_width(axis)));
                idx[axis] = std::clamp(k, 0, n - 1);
            }
            bins[i] = grid.cell_index(idx[0], idx[1]);
        } catch (const NodeProximity&) {
        } catch (const DomainError&) {
        } catch (const StepLimitExceeded&) {
        }
    });

    ForwardHistogram out;
    out.t = t;
    std::vector<std::int64_t> counts(grid.cell_count(), 0);
    for (const auto& b : bins) {
        if (b) {
            ++counts[*b];
            ++out.particles;
        } else {
            ++out.failed;
        }
    }
    const double n = static_cast<double>(out.particles);
    const double w = grid.cell_volume();
    for (auto c : counts) {
        const double p = n > 0 ? static_cast<double>(c) / n : 0.0;
        out.density.push_back(p / w);
        out.std_error.push_back(n > 0 ? std::sqrt(p * (1.0 - p) / n) / w : 0.0);
    }
    return out;
}

}  // namespace bohmrelax
