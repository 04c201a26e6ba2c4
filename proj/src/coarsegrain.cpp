#include "bohmrelax/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "bohmrelax/parallel.hpp"
#include "bohmrelax/quadrature.hpp"
#include "bohmrelax/random.hpp"

namespace bohmrelax {

CoarseGrid::CoarseGrid(const DomainSpec& domain, std::array<int, 2> cells_per_dim,
                       std::array<int, 2> quadrature_per_dim)
    : domain_(domain), cells_(cells_per_dim), quad_(quadrature_per_dim) {
    const int d = domain.dimension();
    if (d == 1) {
        cells_[1] = 1;
        quad_[1] = 1;
    }
    for (int axis = 0; axis < d; ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        if (cells_[a] < 1) {
            throw InvalidArgument("grid needs at least one cell per dimension");
        }
        if (quad_[a] < 2) {
            throw InvalidArgument("grid needs at least 2 quadrature points per dimension");
        }
    }
    cell_count_ = static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
    cell_volume_ = domain.volume() / static_cast<double>(cell_count_);
    widths_ = {domain.length(0) / cells_[0], d == 2 ? domain.length(1) / cells_[1] : 0.0};

    const GaussRule r0 = gauss_legendre(quad_[0]);
    const GaussRule r1 = d == 2 ? gauss_legendre(quad_[1]) : GaussRule{{0.0}, {2.0}};
    for (std::size_t i = 0; i < r0.nodes.size(); ++i) {
        for (std::size_t j = 0; j < r1.nodes.size(); ++j) {
            nodes_.push_back(Point(0.5 * (r0.nodes[i] + 1.0), 0.5 * (r1.nodes[j] + 1.0)));
            weights_.push_back(0.25 * r0.weights[i] * r1.weights[j]);
        }
    }
}

std::array<int, 2> CoarseGrid::cell_coords(std::size_t cell) const {
    const auto n1 = static_cast<std::size_t>(cells_[1]);
    return {static_cast<int>(cell / n1), static_cast<int>(cell % n1)};
}

std::size_t CoarseGrid::cell_index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cells_[1]) +
           static_cast<std::size_t>(j);
}

Point CoarseGrid::cell_lower(std::size_t cell) const {
    const auto [i, j] = cell_coords(cell);
    return domain_.dimension() == 2 ? Point(i * widths_[0], j * widths_[1]) : Point(i * widths_[0]);
}

Point CoarseGrid::quadrature_point(std::size_t cell, std::size_t k) const {
    const Point lo = cell_lower(cell);
    const Point& u = nodes_[k];
    return domain_.dimension() == 2 ? Point(lo[0] + u[0] * widths_[0], lo[1] + u[1] * widths_[1])
                                    : Point(lo[0] + u[0] * widths_[0]);
}

std::int64_t CellAverages::excluded_total() const {
    std::int64_t total = 0;
    for (auto e : excluded) {
        total += e;
    }
    return total;
}

namespace {

struct Backtrack {
    bool ok = false;
    double rho = 0.0;
    double jacobian = 0.0;
};

}  // namespace

CellAverages cell_averages(const WaveSpec& wave, const DensitySpec* density, const CoarseGrid& grid,
                           double t, const IntegratorSettings& settings, int workers) {
    settings.validate();
    if (!(grid.domain() == wave.domain())) {
        throw InvalidArgument("grid and wave are defined on different domains");
    }
    const std::size_t cells = grid.cell_count();
    const std::size_t per_cell = grid.points_per_cell();
    std::vector<Backtrack> items(cells * per_cell);

    parallel_for(items.size(), workers, [&](std::size_t item) {
        const std::size_t cell = item / per_cell;
        const Point y = grid.quadrature_point(cell, item % per_cell);
        Backtrack& out = items[item];
        try {
            const FlowResult back = advect(wave, {y, t, 0.0}, settings);
            out.jacobian = back.jacobian;
            if (density != nullptr) {
                out.rho = rho0(*density, wave.domain(), back.position) * back.jacobian;
            }
            out.ok = true;
        } catch (const NodeProximity&) {
        } catch (const DomainError&) {
        } catch (const StepLimitExceeded&) {
        }
    });

    CellAverages result;
    result.t = t;
    result.born_cg.assign(cells, 0.0);
    result.jac_back_cg.assign(cells, 0.0);
    result.excluded.assign(cells, 0);
    if (density != nullptr) {
        result.rho_cg.assign(cells, 0.0);
    }
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double weight = 0.0;
        double born = 0.0;
        double rho_sum = 0.0;
        double jac = 0.0;
        std::int64_t failed = 0;
        for (std::size_t k = 0; k < per_cell; ++k) {
            const double wk = grid.quadrature_weight(k);
            born += wk * wave.born_density(grid.quadrature_point(cell, k), t);
            const Backtrack& b = items[cell * per_cell + k];
            if (!b.ok) {
                ++failed;
                continue;
            }
            weight += wk;
            rho_sum += wk * b.rho;
            jac += wk * b.jacobian;
        }
        if (2 * static_cast<std::size_t>(failed) > per_cell) {
            const auto [i, j] = grid.cell_coords(cell);
            std::ostringstream os;
            os << "cell (" << i << ", " << j << ") at t = " << t << ": " << failed << " of "
               << per_cell << " quadrature backtracks failed";
            throw CellUnresolvable(os.str());
        }
        result.born_cg[cell] = born;
        result.jac_back_cg[cell] = jac / weight;
        if (density != nullptr) {
            result.rho_cg[cell] = rho_sum / weight;
        }
        result.excluded[cell] = failed;
    }
    return result;
}

std::vector<double> cell_average_rho(const WaveSpec& wave, const DensitySpec& density,
                                     const CoarseGrid& grid, double t,
                                     const IntegratorSettings& settings, int workers) {
    return cell_averages(wave, &density, grid, t, settings, workers).rho_cg;
}

std::vector<double> cell_average_born(const WaveSpec& wave, const CoarseGrid& grid, double t) {
    std::vector<double> out(grid.cell_count(), 0.0);
    for (std::size_t cell = 0; cell < out.size(); ++cell) {
        for (std::size_t k = 0; k < grid.points_per_cell(); ++k) {
            out[cell] += grid.quadrature_weight(k) * wave.born_density(grid.quadrature_point(cell, k), t);
        }
    }
    return out;
}

std::vector<double> cell_average_jacobian_back(const WaveSpec& wave, const CoarseGrid& grid,
                                               double t, const IntegratorSettings& settings,
                                               int workers) {
    return cell_averages(wave, nullptr, grid, t, settings, workers).jac_back_cg;
}

PreimageEstimate preimage_volume(const WaveSpec& wave, const CoarseGrid& grid, std::size_t cell,
                                 double t, std::int64_t n_samples, std::uint64_t seed,
                                 const IntegratorSettings& settings, int workers) {
    if (n_samples < 100) {
        throw InvalidArgument("preimage_volume needs at least 100 samples");
    }
    if (cell >= grid.cell_count()) {
        throw InvalidArgument("cell index out of range");
    }
    settings.validate();
    const int d = wave.dimension();
    const Point lo = grid.cell_lower(cell);

    // Draw every sample point up front so the parallel schedule cannot
    // reorder the generator stream.
    auto engine = item_engine(seed, cell);
    std::vector<Point> points(static_cast<std::size_t>(n_samples));
    for (auto& p : points) {
        p[0] = lo[0] + uniform01(engine) * grid.cell_width(0);
        if (d == 2) {
            p[1] = lo[1] + uniform01(engine) * grid.cell_width(1);
        }
    }

    std::vector<std::optional<double>> jac(points.size());
    parallel_for(points.size(), workers, [&](std::size_t i) {
        try {
            jac[i] = advect(wave, {points[i], t, 0.0}, settings).jacobian;
        } catch (const NodeProximity&) {
        } catch (const DomainError&) {
        } catch (const StepLimitExceeded&) {
        }
    });

    PreimageEstimate est;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& j : jac) {
        if (!j) {
            ++est.failed;
            continue;
        }
        ++est.samples_used;
        sum += *j;
        sum_sq += *j * *j;
    }
    if (est.samples_used < 2) {
        throw CellUnresolvable("preimage_volume: fewer than two samples survived");
    }
    const auto n = static_cast<double>(est.samples_used);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    est.volume = grid.cell_volume() * mean;
    est.std_error = grid.cell_volume() * std::sqrt(var / n);
    return est;
}

RelaxationDiagnostics relaxation_diagnostics(std::span<const double> rho_cg,
                                             std::span<const double> born_cg,
                                             const CoarseGrid& grid) {
    if (rho_cg.size() != grid.cell_count() || born_cg.size() != grid.cell_count()) {
        throw InvalidArgument("diagnostics arrays do not match the grid");
    }
    const double w = grid.cell_volume();
    RelaxationDiagnostics out;
    bool undefined = false;
    for (std::size_t i = 0; i < rho_cg.size(); ++i) {
        const double r = rho_cg[i];
        const double b = born_cg[i];
        const double diff = std::abs(r - b);
        out.l1 += w * diff;
        out.linf = std::max(out.linf, diff);
        if (b < 1e-300) {
            ++out.hbar_excluded_cells;
            if (r > 0.0) {
                undefined = true;
            }
            continue;
        }
        if (r > 0.0) {
            out.hbar += w * r * std::log(r / b);
        }
    }
    if (undefined) {
        out.hbar = std::numeric_limits<double>::quiet_NaN();
        throw DiagnosticsError("H-function undefined: a cell has zero Born weight but positive density",
                               out);
    }
    return out;
}

PairSeparationStats pair_separation_stats(const WaveSpec& wave, std::span<const PointPair> pairs,
                                          double s, std::span<const double> times,
                                          const IntegratorSettings& settings, int workers) {
    if (pairs.empty()) {
        throw InvalidArgument("pair_separation_stats needs at least one pair");
    }
    if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < s)) {
        throw InvalidArgument("pair times must be ascending and not before the label time");
    }
    settings.validate();
    const DomainSpec& domain = wave.domain();
    const double sep0 = norm(domain.displacement(pairs.front().first, pairs.front().second));
    for (const auto& [a, b] : pairs) {
        if (std::abs(norm(domain.displacement(a, b)) - sep0) > 1e-9 * std::max(sep0, 1e-300)) {
            throw InvalidArgument("pair initial separations must be equal");
        }
    }

    // separation[pair][time]; NaN once a member has failed
    const std::size_t nt = times.size();
    std::vector<double> sep(pairs.size() * nt, std::numeric_limits<double>::quiet_NaN());
    parallel_for(pairs.size(), workers, [&](std::size_t p) {
        Point x = domain.canonical(pairs[p].first);
        Point y = domain.canonical(pairs[p].second);
        double from = s;
        try {
            for (std::size_t k = 0; k < nt; ++k) {
                x = advect(wave, {x, from, times[k]}, settings).position;
                y = advect(wave, {y, from, times[k]}, settings).position;
                from = times[k];
                sep[p * nt + k] = norm(domain.displacement(x, y));
            }
        } catch (const NodeProximity&) {
        } catch (const DomainError&) {
        } catch (const StepLimitExceeded&) {
        }
    });

    PairSeparationStats out;
    out.times.assign(times.begin(), times.end());
    double sxx = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
    int fit_points = 0;
    for (std::size_t k = 0; k < nt; ++k) {
        double sum_sq = 0.0;
        std::int64_t alive = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double v = sep[p * nt + k];
            if (!std::isnan(v)) {
                sum_sq += v * v;
                ++alive;
            }
        }
        const double rms =
            alive > 0 ? std::sqrt(sum_sq / static_cast<double>(alive)) : std::numeric_limits<double>::quiet_NaN();
        out.rms_separation.push_back(rms);
        out.surviving_pairs.push_back(alive);
        if (times[k] > s && alive > 0 && rms > 0.0) {
            const double lx = std::log(times[k] - s);
            const double ly = std::log(rms);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++fit_points;
        }
    }
    out.dropped_pairs =
        static_cast<std::int64_t>(pairs.size()) - (nt > 0 ? out.surviving_pairs.back() : 0);
    if (nt == 0) {
        out.dropped_pairs = 0;
    }
    const double denom = fit_points * sxx - sx * sx;
    out.growth_exponent = fit_points >= 2 && denom > 0.0 ? (fit_points * sxy - sx * sy) / denom
                                                         : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace bohmrelax
