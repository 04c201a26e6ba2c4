#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bohmrelax/density.hpp"
#include "bohmrelax/errors.hpp"
#include "bohmrelax/flowmap.hpp"
#include "bohmrelax/wavefunction.hpp"

namespace bohmrelax {

/// Uniform partition of D into rectangular cells, each carrying a
/// tensor-product Gauss-Legendre rule. Cells are indexed row-major:
/// flat = i * cells(1) + j, with i along axis 0.
class CoarseGrid {
public:
    /// Throws InvalidArgument for fewer than 1 cell or fewer than 2
    /// quadrature points along any used axis.
    CoarseGrid(const DomainSpec& domain, std::array<int, 2> cells_per_dim,
               std::array<int, 2> quadrature_per_dim);

    const DomainSpec& domain() const noexcept { return domain_; }
    int cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
    int quadrature(int axis) const { return quad_[static_cast<std::size_t>(axis)]; }
    std::size_t cell_count() const noexcept { return cell_count_; }
    std::size_t points_per_cell() const noexcept { return nodes_.size(); }

    /// w = W / cell_count.
    double cell_volume() const noexcept { return cell_volume_; }
    double cell_width(int axis) const { return widths_[static_cast<std::size_t>(axis)]; }

    std::array<int, 2> cell_coords(std::size_t cell) const;
    std::size_t cell_index(int i, int j) const;
    Point cell_lower(std::size_t cell) const;

    Point quadrature_point(std::size_t cell, std::size_t k) const;
    /// Normalized so the weights of one cell sum to 1.
    double quadrature_weight(std::size_t k) const { return weights_[k]; }

private:
    DomainSpec domain_;
    std::array<int, 2> cells_;
    std::array<int, 2> quad_;
    std::size_t cell_count_;
    double cell_volume_;
    std::array<double, 2> widths_;
    std::vector<Point> nodes_;  // unit-cell offsets in [0, 1]^d
    std::vector<double> weights_;
};

/// Per-cell coarse-grained fields at one time.
struct CellAverages {
    double t = 0.0;
    std::vector<double> rho_cg;       // {rho}; empty if no density was requested
    std::vector<double> born_cg;      // {|psi|^2}
    std::vector<double> jac_back_cg;  // {J(x, t; 0)}
    std::vector<std::int64_t> excluded;

    std::int64_t excluded_total() const;
};

/// Computes {rho} (when `density` is non-null), {|psi|^2} and {J(x,t;0)} from
/// one shared set of backtracks, one work item per (cell, quadrature point).
/// Quadrature points whose backtrack fails (node proximity, wall, step
/// limit) are dropped and the cell renormalizes over the survivors.
/// Throws CellUnresolvable when more than half of a cell's points fail.
/// Results do not depend on `workers`.
CellAverages cell_averages(const WaveSpec& wave, const DensitySpec* density, const CoarseGrid& grid,
                           double t, const IntegratorSettings& settings, int workers = 1);

std::vector<double> cell_average_rho(const WaveSpec& wave, const DensitySpec& density,
                                     const CoarseGrid& grid, double t,
                                     const IntegratorSettings& settings = {}, int workers = 1);

std::vector<double> cell_average_born(const WaveSpec& wave, const CoarseGrid& grid, double t);

std::vector<double> cell_average_jacobian_back(const WaveSpec& wave, const CoarseGrid& grid,
                                               double t, const IntegratorSettings& settings = {},
                                               int workers = 1);

struct PreimageEstimate {
    double volume = 0.0;
    double std_error = 0.0;
    std::int64_t samples_used = 0;
    std::int64_t failed = 0;
};

/// Monte Carlo estimate of the volume of the time-0 pre-image of a cell,
/// vol(S) = integral over the cell of J(y, t; 0) dy, from uniform samples
/// drawn by a generator seeded with (seed, cell). Needs n_samples >= 100.
PreimageEstimate preimage_volume(const WaveSpec& wave, const CoarseGrid& grid, std::size_t cell,
                                 double t, std::int64_t n_samples, std::uint64_t seed,
                                 const IntegratorSettings& settings = {}, int workers = 1);

struct RelaxationDiagnostics {
    double l1 = 0.0;
    /// Coarse-grained H-function, natural log, 0 ln 0 = 0.
    double hbar = 0.0;
    double linf = 0.0;
    /// Cells dropped from hbar because born_cg < 1e-300.
    std::int64_t hbar_excluded_cells = 0;
};

/// hbar is undefined because some cell has born_cg = 0 but rho_cg > 0.
/// The partial record still carries l1 and linf.
class DiagnosticsError : public Error {
public:
    DiagnosticsError(const std::string& what, RelaxationDiagnostics partial)
        : Error(ErrorCategory::Diagnostics, what), partial_(partial) {}
    const RelaxationDiagnostics& partial() const noexcept { return partial_; }

private:
    RelaxationDiagnostics partial_;
};

RelaxationDiagnostics relaxation_diagnostics(std::span<const double> rho_cg,
                                             std::span<const double> born_cg,
                                             const CoarseGrid& grid);

struct PairSeparationStats {
    std::vector<double> times;
    std::vector<double> rms_separation;
    std::vector<std::int64_t> surviving_pairs;
    /// Pairs lost to a failed member before the last time.
    std::int64_t dropped_pairs = 0;
    /// Least-squares slope of ln(rms) against ln(t - s) over times > s;
    /// NaN with fewer than two such times.
    double growth_exponent = 0.0;
};

using PointPair = std::pair<Point, Point>;

/// Follows each pair from label time s through the ascending `times`.
/// A pair whose member fails is dropped from that time on.
PairSeparationStats pair_separation_stats(const WaveSpec& wave, std::span<const PointPair> pairs,
                                          double s, std::span<const double> times,
                                          const IntegratorSettings& settings = {},
                                          int workers = 1);

}  // namespace bohmrelax
