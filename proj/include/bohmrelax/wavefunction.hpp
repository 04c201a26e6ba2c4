#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "bohmrelax/geometry.hpp"

namespace bohmrelax {

using Complex = std::complex<double>;

/// Per-dimension mode indices. Box: each >= 1. Torus: any integer.
/// Unused trailing entries (d = 1) are zero.
using QuantumNumbers = std::array<int, 2>;

/// Largest |n| accepted per dimension; evaluation tables live on the stack.
inline constexpr int kMaxQuantumNumber = 64;

inline constexpr double kDefaultNodeEpsilon = 1e-12;

struct ModeSpec {
    QuantumNumbers n{0, 0};
    Complex coefficient{0.0, 0.0};
};

/// Normalized eigenfunction of the domain (infinite well on a Box, free
/// particle on a Torus). Throws DomainError for x outside a Box.
Complex eigenmode_value(const DomainSpec& domain, const QuantumNumbers& n, const Point& x);

/// Wavenumber magnitude squared |k|^2 of a mode.
double mode_wavenumber_squared(const DomainSpec& domain, const QuantumNumbers& n);

/// psi and its analytic derivatives at one (x, t).
struct WaveSample {
    Complex psi;
    std::array<Complex, 2> grad{};
    /// Sum over dimensions of the per-dimension second derivatives.
    Complex laplacian;
    /// Sum of -i E_n c_n phi_n exp(-i E_n t), taken from the mode energies.
    Complex time_derivative;

    double density() const { return std::norm(psi); }
};

/// de Broglie velocity together with the quantities the flow integrator needs.
struct FlowSample {
    Point velocity;
    double divergence = 0.0;
    double density = 0.0;
};

/// Outcome of an unchecked flow evaluation.
enum class FlowStatus { Ok, OutsideDomain, NearNode };

/// Immutable superposition of eigenmodes evolving exactly under the
/// Schrodinger equation with hbar = m = 1:
///
///   psi(x, t) = sum_n c_n phi_n(x) exp(-i E_n t),   E_n = |k_n|^2 / 2.
///
/// All members are const; a WaveSpec may be shared freely across threads.
class WaveSpec {
public:
    /// Throws InvalidArgument when the coefficients are not normalized to
    /// within 1e-12, quantum numbers repeat, or a Box index is < 1.
    WaveSpec(DomainSpec domain, std::vector<ModeSpec> modes);

    const DomainSpec& domain() const noexcept { return domain_; }
    std::span<const ModeSpec> modes() const noexcept { return modes_; }
    std::span<const double> energies() const noexcept { return energies_; }
    int dimension() const noexcept { return domain_.dimension(); }

    static constexpr double hbar() { return 1.0; }
    static constexpr double mass() { return 1.0; }

    Complex psi(const Point& x, double t) const;
    double born_density(const Point& x, double t) const;

    /// Schrodinger current j = (hbar/m) Im(psi* grad psi).
    Point current(const Point& x, double t) const;

    /// v = j / |psi|^2. Throws NodeProximity below `node_epsilon`.
    Point velocity(const Point& x, double t, double node_epsilon = kDefaultNodeEpsilon) const;

    /// Analytic div v. Throws NodeProximity below `node_epsilon`.
    double velocity_divergence(const Point& x, double t,
                               double node_epsilon = kDefaultNodeEpsilon) const;

    /// d|psi|^2/dt + div j, with the time derivative built from the mode
    /// energies and the divergence from per-dimension second derivatives.
    double continuity_residual(const Point& x, double t) const;

    /// Full analytic sample after domain checking (torus points are wrapped).
    WaveSample sample(const Point& x, double t) const;

    /// Hot-path evaluation used by the integrator. No exceptions: reports
    /// out-of-domain and near-node points through the status.
    FlowStatus flow(const Point& x, double t, double node_epsilon, FlowSample& out) const noexcept;

    /// Mutation-testing hook: returns a copy whose velocity (and therefore
    /// divergence) is multiplied by `scale`. psi itself is unchanged.
    WaveSpec with_velocity_scale(double scale) const;
    double velocity_scale() const noexcept { return velocity_scale_; }

private:
    WaveSample evaluate(const Point& x, double t, bool with_time) const noexcept;

    struct Row {
        std::size_t index0;
        std::size_t begin;
        std::size_t end;
    };
    struct RowEntry {
        std::size_t index1;
        double c_re;
        double c_im;
        double energy;
    };

    DomainSpec domain_;
    std::vector<ModeSpec> modes_;
    std::vector<Row> rows_;
    std::vector<RowEntry> entries_;
    std::vector<double> energies_;
    std::array<int, 2> max_index_{0, 0};
    std::array<double, 2> unit_{0.0, 0.0};
    std::array<double, 2> amp_{0.0, 0.0};
    double velocity_scale_ = 1.0;
    // Real profile times a global phase: the current vanishes identically.
    bool at_rest_ = false;
};

}  // namespace bohmrelax
