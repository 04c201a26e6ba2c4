#include "bohmrelax/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "bohmrelax/errors.hpp"

namespace bohmrelax {

namespace {

constexpr std::size_t kTableSize = 2 * kMaxQuantumNumber + 1;
constexpr int kOffset = kMaxQuantumNumber;

/// Wavenumber of index 1 along one axis.
double unit_wavenumber(const DomainSpec& domain, int axis) {
    const double length = domain.length(axis);
    return domain.kind() == DomainKind::Box ? kPi / length : 2.0 * kPi / length;
}

/// Per-axis factors phi_n(x_axis) exp(-i k_n^2 t / 2) and their x-derivatives
/// for every index the wave uses, built by angle-addition recurrences.
/// Storage is left uninitialized; only indices the wave references are filled.
struct AxisTable {
    double re[kTableSize];
    double im[kTableSize];
    double slope_re[kTableSize];
    double slope_im[kTableSize];
    double k[kTableSize];

    /// `z` is exp(-i unit^2 t / 2) for this axis.
    void fill(DomainKind kind, double unit, double amp, int max_index, double x, const Complex& z) {
        // p_n = exp(-i alpha n^2) via p_{n+1} = p_n q_n, q_n = exp(-i alpha (2n + 1)).
        const Complex z2 = mul(z, z);
        Complex phase{1.0, 0.0};
        Complex step = z;

        if (kind == DomainKind::Box) {
            const double theta = unit * x;
            const double s1 = std::sin(theta);
            const double c1 = std::cos(theta);
            double s = 0.0;
            double c = 1.0;
            for (int n = 1; n <= max_index; ++n) {
                const double sn = s * c1 + c * s1;
                const double cn = c * c1 - s * s1;
                s = sn;
                c = cn;
                phase = mul(phase, step);
                step = mul(step, z2);
                const auto i = static_cast<std::size_t>(n + kOffset);
                k[i] = unit * n;
                re[i] = amp * s * phase.real();
                im[i] = amp * s * phase.imag();
                slope_re[i] = amp * k[i] * c * phase.real();
                slope_im[i] = amp * k[i] * c * phase.imag();
            }
        } else {
            const Complex e1 = std::polar(1.0, unit * x);
            Complex e{1.0, 0.0};
            const auto zero = static_cast<std::size_t>(kOffset);
            k[zero] = 0.0;
            re[zero] = amp;
            im[zero] = 0.0;
            slope_re[zero] = 0.0;
            slope_im[zero] = 0.0;
            for (int n = 1; n <= max_index; ++n) {
                e = mul(e, e1);
                phase = mul(phase, step);
                step = mul(step, z2);
                const Complex plus = amp * mul(e, phase);
                const Complex minus = amp * mul(std::conj(e), phase);
                set(kOffset + n, unit * n, plus);
                set(kOffset - n, -unit * n, minus);
            }
        }
    }

    /// Trivial second axis for d = 1: index 0 maps to the constant 1.
    void fill_constant() {
        const auto i = static_cast<std::size_t>(kOffset);
        re[i] = 1.0;
        im[i] = 0.0;
        slope_re[i] = 0.0;
        slope_im[i] = 0.0;
        k[i] = 0.0;
    }

private:
    static Complex mul(const Complex& a, const Complex& b) {
        return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
    }

    void set(int index, double wavenumber, const Complex& v) {
        const auto i = static_cast<std::size_t>(index);
        k[i] = wavenumber;
        re[i] = v.real();
        im[i] = v.imag();
        // d/dx = i k
        slope_re[i] = -wavenumber * v.imag();
        slope_im[i] = wavenumber * v.real();
    }
};

}  // namespace

double mode_wavenumber_squared(const DomainSpec& domain, const QuantumNumbers& n) {
    double k2 = 0.0;
    for (int axis = 0; axis < domain.dimension(); ++axis) {
        const double k = unit_wavenumber(domain, axis) * n[static_cast<std::size_t>(axis)];
        k2 += k * k;
    }
    return k2;
}

Complex eigenmode_value(const DomainSpec& domain, const QuantumNumbers& n, const Point& x) {
    const Point y = domain.canonical(x);
    Complex value{1.0, 0.0};
    for (int axis = 0; axis < domain.dimension(); ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        const double length = domain.length(axis);
        const double arg = unit_wavenumber(domain, axis) * n[a] * y[a];
        if (domain.kind() == DomainKind::Box) {
            value *= std::sqrt(2.0 / length) * std::sin(arg);
        } else {
            value *= std::polar(1.0 / std::sqrt(length), arg);
        }
    }
    return value;
}

WaveSpec::WaveSpec(DomainSpec domain, std::vector<ModeSpec> modes)
    : domain_(domain), modes_(std::move(modes)) {
    if (modes_.empty()) {
        throw InvalidArgument("wave has no modes");
    }
    const int d = domain_.dimension();
    for (int axis = 0; axis < d; ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        const double length = domain_.length(axis);
        unit_[a] = unit_wavenumber(domain_, axis);
        amp_[a] = domain_.kind() == DomainKind::Box ? std::sqrt(2.0 / length) : 1.0 / std::sqrt(length);
    }
    std::set<QuantumNumbers> seen;
    double norm2 = 0.0;
    for (auto& mode : modes_) {
        if (d == 1) {
            mode.n[1] = 0;
        }
        for (int axis = 0; axis < d; ++axis) {
            const int n = mode.n[static_cast<std::size_t>(axis)];
            if (domain_.kind() == DomainKind::Box && n < 1) {
                throw InvalidArgument("box quantum numbers must be >= 1");
            }
            if (std::abs(n) > kMaxQuantumNumber) {
                throw InvalidArgument("quantum number " + std::to_string(n) + " exceeds limit " +
                                      std::to_string(kMaxQuantumNumber));
            }
            auto& hi = max_index_[static_cast<std::size_t>(axis)];
            hi = std::max(hi, std::abs(n));
        }
        if (!std::isfinite(mode.coefficient.real()) || !std::isfinite(mode.coefficient.imag())) {
            throw InvalidArgument("mode coefficient is not finite");
        }
        if (!seen.insert(mode.n).second) {
            std::ostringstream os;
            os << "duplicate mode (" << mode.n[0] << ", " << mode.n[1] << ")";
            throw InvalidArgument(os.str());
        }
        norm2 += std::norm(mode.coefficient);
        energies_.push_back(0.5 * mode_wavenumber_squared(domain_, mode.n) * hbar() / mass());
    }

    std::vector<std::size_t> order(modes_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return modes_[a].n[0] < modes_[b].n[0];
    });
    for (std::size_t i : order) {
        const ModeSpec& mode = modes_[i];
        const auto index0 = static_cast<std::size_t>(mode.n[0] + kOffset);
        if (rows_.empty() || rows_.back().index0 != index0) {
            rows_.push_back({index0, entries_.size(), entries_.size()});
        }
        entries_.push_back({static_cast<std::size_t>(mode.n[1] + kOffset), mode.coefficient.real(),
                            mode.coefficient.imag(), energies_[i]});
        rows_.back().end = entries_.size();
    }

    if (domain_.kind() == DomainKind::Box) {
        at_rest_ = true;
        const double phase = std::arg(modes_.front().coefficient);
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const double rel = std::remainder(std::arg(modes_[i].coefficient) - phase, kPi);
            at_rest_ = at_rest_ && energies_[i] == energies_.front() && rel == 0.0;
        }
    }

    if (std::abs(norm2 - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "wave is not normalized: sum |c|^2 = " << norm2;
        throw InvalidArgument(os.str());
    }
}

WaveSpec WaveSpec::with_velocity_scale(double scale) const {
    WaveSpec copy = *this;
    copy.velocity_scale_ = scale;
    return copy;
}

WaveSample WaveSpec::evaluate(const Point& x, double t, bool with_time) const noexcept {
    AxisTable tables[2];
    const Complex z0 = std::polar(1.0, -0.5 * unit_[0] * unit_[0] * t);
    tables[0].fill(domain_.kind(), unit_[0], amp_[0], max_index_[0], x[0], z0);
    if (dimension() == 2) {
        const Complex z1 =
            unit_[1] == unit_[0] ? z0 : std::polar(1.0, -0.5 * unit_[1] * unit_[1] * t);
        tables[1].fill(domain_.kind(), unit_[1], amp_[1], max_index_[1], x[1], z1);
    } else {
        tables[1].fill_constant();
    }

    // Modes are grouped by their first index so the second-axis sums are
    // formed once per row:
    //   psi = sum_row F0 A,  A = sum c F1,  B = sum c F1',  K = sum c k1^2 F1.
    // Real arithmetic throughout; std::complex products carry NaN recovery
    // branches that dominate this loop otherwise.
    const AxisTable& ax0 = tables[0];
    const AxisTable& ax1 = tables[1];
    double psi_re = 0.0, psi_im = 0.0;
    double g0_re = 0.0, g0_im = 0.0;
    double g1_re = 0.0, g1_im = 0.0;
    double lap_re = 0.0, lap_im = 0.0;
    double dt_re = 0.0, dt_im = 0.0;
    for (const Row& row : rows_) {
        double a_re = 0.0, a_im = 0.0, b_re = 0.0, b_im = 0.0, k_re = 0.0, k_im = 0.0;
        double e_re = 0.0, e_im = 0.0;
        for (std::size_t m = row.begin; m < row.end; ++m) {
            const RowEntry& en = entries_[m];
            const std::size_t i1 = en.index1;
            const double f_re = ax1.re[i1], f_im = ax1.im[i1];
            const double s_re = ax1.slope_re[i1], s_im = ax1.slope_im[i1];
            const double cf_re = en.c_re * f_re - en.c_im * f_im;
            const double cf_im = en.c_re * f_im + en.c_im * f_re;
            a_re += cf_re;
            a_im += cf_im;
            b_re += en.c_re * s_re - en.c_im * s_im;
            b_im += en.c_re * s_im + en.c_im * s_re;
            const double k2 = ax1.k[i1] * ax1.k[i1];
            k_re += k2 * cf_re;
            k_im += k2 * cf_im;
            if (with_time) {
                e_re += en.energy * cf_re;
                e_im += en.energy * cf_im;
            }
        }
        const std::size_t i0 = row.index0;
        const double f_re = ax0.re[i0], f_im = ax0.im[i0];
        const double s_re = ax0.slope_re[i0], s_im = ax0.slope_im[i0];
        const double k2 = ax0.k[i0] * ax0.k[i0];
        const double fa_re = f_re * a_re - f_im * a_im;
        const double fa_im = f_re * a_im + f_im * a_re;
        psi_re += fa_re;
        psi_im += fa_im;
        g0_re += s_re * a_re - s_im * a_im;
        g0_im += s_re * a_im + s_im * a_re;
        g1_re += f_re * b_re - f_im * b_im;
        g1_im += f_re * b_im + f_im * b_re;
        // second derivative along axis 0 plus along axis 1
        lap_re -= k2 * fa_re + (f_re * k_re - f_im * k_im);
        lap_im -= k2 * fa_im + (f_re * k_im + f_im * k_re);
        if (with_time) {
            // -i F0 sum(E c F1)
            const double fe_re = f_re * e_re - f_im * e_im;
            const double fe_im = f_re * e_im + f_im * e_re;
            dt_re += fe_im;
            dt_im -= fe_re;
        }
    }

    WaveSample s;
    s.psi = {psi_re, psi_im};
    s.grad = {Complex{g0_re, g0_im}, Complex{g1_re, g1_im}};
    s.laplacian = {lap_re, lap_im};
    s.time_derivative = {dt_re, dt_im};
    return s;
}

WaveSample WaveSpec::sample(const Point& x, double t) const {
    return evaluate(domain_.canonical(x), t, true);
}

Complex WaveSpec::psi(const Point& x, double t) const { return sample(x, t).psi; }

double WaveSpec::born_density(const Point& x, double t) const { return sample(x, t).density(); }

Point WaveSpec::current(const Point& x, double t) const {
    const WaveSample s = sample(x, t);
    const double scale = hbar() / mass();
    Point j;
    for (int axis = 0; axis < dimension(); ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        j[a] = scale * std::imag(std::conj(s.psi) * s.grad[a]);
    }
    return j;
}

FlowStatus WaveSpec::flow(const Point& x, double t, double node_epsilon,
                          FlowSample& out) const noexcept {
    if (!domain_.contains(x)) {
        return FlowStatus::OutsideDomain;
    }
    const WaveSample s = evaluate(domain_.wrap(x), t, false);
    const double rho = s.density();
    out.density = rho;
    if (!(rho >= node_epsilon)) {
        return FlowStatus::NearNode;
    }
    if (at_rest_) {
        out.velocity = Point{};
        out.divergence = 0.0;
        return FlowStatus::Ok;
    }
    const double scale = velocity_scale_ * hbar() / mass();
    const Complex conj_psi = std::conj(s.psi);
    // div v = Im(psi* lap psi)/rho - v . grad(rho)/rho, grad(rho) = 2 Re(psi* grad psi)
    double advection = 0.0;
    out.velocity = Point{};
    for (int axis = 0; axis < dimension(); ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        const Complex w = conj_psi * s.grad[a];
        const double v = w.imag() / rho;
        out.velocity[a] = scale * v;
        advection += v * 2.0 * w.real();
    }
    out.divergence = scale * (std::imag(conj_psi * s.laplacian) - advection) / rho;
    return FlowStatus::Ok;
}

namespace {

FlowSample checked_flow(const WaveSpec& wave, const Point& x, double t, double node_epsilon) {
    const Point y = wave.domain().canonical(x);
    FlowSample out;
    if (wave.flow(y, t, node_epsilon, out) == FlowStatus::NearNode) {
        std::ostringstream os;
        os.precision(6);
        os << "|psi|^2 = " << out.density << " below node guard " << node_epsilon << " at ("
           << y[0] << ", " << y[1] << "), t = " << t;
        throw NodeProximity(os.str());
    }
    return out;
}

}  // namespace

Point WaveSpec::velocity(const Point& x, double t, double node_epsilon) const {
    return checked_flow(*this, x, t, node_epsilon).velocity;
}

double WaveSpec::velocity_divergence(const Point& x, double t, double node_epsilon) const {
    return checked_flow(*this, x, t, node_epsilon).divergence;
}

double WaveSpec::continuity_residual(const Point& x, double t) const {
    const WaveSample s = sample(x, t);
    const Complex conj_psi = std::conj(s.psi);
    const double drho_dt = 2.0 * std::real(conj_psi * s.time_derivative);
    const double div_j = hbar() / mass() * std::imag(conj_psi * s.laplacian);
    return drho_dt + div_j;
}

}  // namespace bohmrelax
