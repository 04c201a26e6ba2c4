#include "bohmrelax/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "bohmrelax/parallel.hpp"
#include "bohmrelax/random.hpp"

namespace bohmrelax {

namespace {

enum Identity { Jacobian, BornTransport, RoundTrip, Continuity, IdentityCount };

constexpr double kTolerance[IdentityCount] = {1e-4, 1e-5, 1e-6, 1e-8};
constexpr const char* kName[IdentityCount] = {"jacobian", "born_transport", "round_trip", "continuity"};
constexpr double kBornFloor = 1e-6;
// Keeps finite-difference stencils and wall-adjacent nodes out of reach.
constexpr double kWallMargin = 1e-3;

struct SampleOutcome {
    std::optional<double> residual[IdentityCount];
    bool failed[IdentityCount] = {};
    bool skipped[IdentityCount] = {};
};

template <class Fn>
void guarded(SampleOutcome& out, Identity id, Fn&& fn) {
    try {
        fn();
    } catch (const NodeProximity&) {
        out.failed[id] = true;
    } catch (const DomainError&) {
        out.failed[id] = true;
    } catch (const StepLimitExceeded&) {
        out.failed[id] = true;
    }
}

Point draw_label(const DomainSpec& domain, std::mt19937_64& engine) {
    for (;;) {
        Point a;
        double min_length = domain.length(0);
        for (int axis = 0; axis < domain.dimension(); ++axis) {
            a[static_cast<std::size_t>(axis)] = uniform01(engine) * domain.length(axis);
            min_length = std::min(min_length, domain.length(axis));
        }
        if (domain.wall_distance(a) >= kWallMargin * min_length) {
            return a;
        }
    }
}

}  // namespace

IdentityReport check_identities(const ExperimentConfig& config, const IdentityOptions& options) {
    if (options.samples < 1) {
        throw InvalidArgument("check_identities needs at least one sample");
    }
    const WaveSpec base = config.wave();
    const WaveSpec wave = options.velocity_scale == 1.0 ? base : base.with_velocity_scale(options.velocity_scale);
    const IntegratorSettings& settings = config.integrator;
    settings.validate();
    const DomainSpec& domain = wave.domain();
    const double period = 2.0 * kPi;

    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(options.samples));
    parallel_for(outcomes.size(), options.workers, [&](std::size_t i) {
        auto engine = item_engine(options.seed, i);
        const Point a = draw_label(domain, engine);
        const double t = period * (1.0 - uniform01(engine));
        SampleOutcome& out = outcomes[i];

        std::optional<FlowResult> forward;
        guarded(out, Jacobian, [&] {
            forward = advect(wave, {a, 0.0, t}, settings);
            const double fd = jacobian_fd(wave, {a, 0.0, t}, options.jacobian_fd_step, settings);
            out.residual[Jacobian] = std::abs(forward->jacobian - fd) / std::abs(forward->jacobian);
        });

        guarded(out, BornTransport, [&] {
            const double born0 = base.born_density(a, 0.0);
            if (!(born0 > kBornFloor)) {
                out.skipped[BornTransport] = true;
                return;
            }
            if (!forward) {
                forward = advect(wave, {a, 0.0, t}, settings);
            }
            const double transported = base.born_density(forward->position, t) * forward->jacobian;
            out.residual[BornTransport] = std::abs(transported - born0) / born0;
        });

        guarded(out, RoundTrip, [&] { out.residual[RoundTrip] = round_trip_defect(wave, a, 0.0, period, settings); });

        guarded(out, Continuity, [&] { out.residual[Continuity] = std::abs(base.continuity_residual(a, t)); });
    });

    IdentityReport report;
    report.passed = true;
    for (int id = 0; id < IdentityCount; ++id) {
        IdentityResult r;
        r.name = kName[id];
        r.tolerance = kTolerance[id];
        for (const auto& o : outcomes) {
            if (o.residual[id]) {
                ++r.evaluated;
                const double v = *o.residual[id];
                r.worst = std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(r.worst, v);
            }
            r.failed += o.failed[id] ? 1 : 0;
            r.skipped += o.skipped[id] ? 1 : 0;
        }
        r.passed = r.evaluated > 0 && r.worst < r.tolerance;
        report.passed = report.passed && r.passed;
        report.results.push_back(std::move(r));
    }
    return report;
}

}  // namespace bohmrelax
