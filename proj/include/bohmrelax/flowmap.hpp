#pragma once

#include <cstdint>

#include "bohmrelax/geometry.hpp"
#include "bohmrelax/wavefunction.hpp"

namespace bohmrelax {

struct IntegratorSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = 1e-2;
    std::int64_t max_steps = 10'000'000;
    double node_epsilon = kDefaultNodeEpsilon;

    /// Throws InvalidArgument unless every field is positive and
    /// rel_tol >= 1e-13.
    void validate() const;

    friend bool operator==(const IntegratorSettings&, const IntegratorSettings&) = default;
};

/// Label point `a` at label time `s`, carried to target time `t`
/// (either ordering of s and t).
struct FlowQuery {
    Point a;
    double s = 0.0;
    double t = 0.0;
};

struct FlowResult {
    /// P(a, s; t), wrapped into the fundamental cell on the torus.
    Point position;
    /// P(a, s; t) - a without periodic wrapping.
    Point displacement;
    /// J(a, s; t) = det dP/da.
    double jacobian = 1.0;
    std::int64_t steps = 0;
    double min_density_seen = 0.0;
};

/// Integrates dP/dt = v[P, t] together with d(ln J)/dt = div v[P, t] using
/// an adaptive Dormand-Prince 5(4) pair with PI step control.
///
/// Errors: NodeProximity when the path cannot avoid |psi|^2 < node_epsilon,
/// DomainError when `a` is outside a Box or the path comes within 1e-9 L of
/// a wall, StepLimitExceeded after settings.max_steps attempted steps.
FlowResult advect(const WaveSpec& wave, const FlowQuery& q,
                  const IntegratorSettings& settings = {});

/// |P(P(a, s; t), t; s) - a|, using the shortest periodic image on the torus.
double round_trip_defect(const WaveSpec& wave, const Point& a, double s, double t,
                         const IntegratorSettings& settings = {});

/// Determinant of the centered finite-difference deformation gradient
/// dP^i/da^j with spacing h. Independent of the integrated ln J.
double jacobian_fd(const WaveSpec& wave, const FlowQuery& q, double h,
                   const IntegratorSettings& settings = {});

}  // namespace bohmrelax
