#include "bohmrelax/flowmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "bohmrelax/errors.hpp"

namespace bohmrelax {

void IntegratorSettings::validate() const {
    if (!(rel_tol >= 1e-13) || !std::isfinite(rel_tol)) {
        throw InvalidArgument("integrator rel_tol must be >= 1e-13");
    }
    if (!(abs_tol > 0.0) || !(max_step > 0.0) || max_steps <= 0 || !(node_epsilon > 0.0)) {
        throw InvalidArgument("integrator abs_tol, max_step, max_steps and node_epsilon must be positive");
    }
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 10.0;

constexpr double kWallFraction = 1e-9;

/// Augmented state: position components followed by ln J.
using State = std::array<double, 3>;

class Integrator {
public:
    Integrator(const WaveSpec& wave, const IntegratorSettings& settings)
        : wave_(wave), settings_(settings), dim_(wave.dimension()) {}

    FlowResult run(const Point& start, double s, double t) {
        const DomainSpec& domain = wave_.domain();
        const Point a = domain.canonical(start);

        FlowResult result;
        result.position = a;
        FlowSample fs;
        const FlowStatus status = wave_.flow(a, s, settings_.node_epsilon, fs);
        result.min_density_seen = fs.density;
        if (status == FlowStatus::NearNode) {
            throw NodeProximity(where("label point is at a node", a, s));
        }
        if (t == s) {
            return result;
        }

        State y{a[0], dim_ == 2 ? a[1] : 0.0, 0.0};
        State f = derivative(fs);
        const double direction = t > s ? 1.0 : -1.0;
        const double span = std::abs(t - s);
        double h = direction * std::min({initial_step(y, f), settings_.max_step, span});
        double time = s;
        double err_old = 1e-4;
        bool last_rejected = false;
        const double min_step = 1e-14 * std::max(1.0, std::abs(time) + span);
        FlowStatus last_failure = FlowStatus::Ok;

        while (direction * (t - time) > 0.0) {
            if (result.steps >= settings_.max_steps) {
                throw StepLimitExceeded(where("step limit " + std::to_string(settings_.max_steps) +
                                                  " reached",
                                              a, s));
            }
            ++result.steps;

            bool last_step = false;
            if (direction * (time + h - t) >= 0.0) {
                h = t - time;
                last_step = true;
            }

            State y_new;
            State f_new;
            double err = 0.0;
            FlowSample fs_new;
            const FlowStatus st = attempt(time, h, y, f, y_new, f_new, fs_new, err);
            if (st != FlowStatus::Ok) {
                last_failure = st;
                h *= 0.25;
                last_rejected = true;
                if (std::abs(h) < min_step) {
                    fail(last_failure, a, s, time);
                }
                continue;
            }

            const double fac11 = std::pow(err, kExpo);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(err_old, kBeta);
                fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, 1.0 / kMinShrink);
                double h_new = h / fac;
                err_old = std::max(err, 1e-4);

                y = y_new;
                f = f_new;
                time = last_step ? t : time + h;
                result.min_density_seen = std::min(result.min_density_seen, fs_new.density);
                check_walls(y, a, s, time);

                if (std::abs(h_new) > settings_.max_step) {
                    h_new = direction * settings_.max_step;
                }
                if (last_rejected) {
                    h_new = direction * std::min(std::abs(h_new), std::abs(h));
                }
                last_rejected = false;
                h = h_new;
            } else {
                h /= std::min(1.0 / kMinShrink, fac11 / kSafety);
                last_rejected = true;
                if (std::abs(h) < min_step) {
                    throw StepLimitExceeded(where("step size underflow", a, s));
                }
            }
        }

        const Point unwrapped = to_point(y);
        result.displacement = unwrapped - a;
        result.position = domain.wrap(unwrapped);
        result.jacobian = std::exp(y[2]);
        return result;
    }

private:
    State derivative(const FlowSample& fs) const {
        return State{fs.velocity[0], fs.velocity[1], fs.divergence};
    }

    Point to_point(const State& y) const { return dim_ == 2 ? Point(y[0], y[1]) : Point(y[0]); }

    FlowStatus eval(double time, const State& y, State& f, FlowSample& fs) const {
        const FlowStatus st = wave_.flow(to_point(y), time, settings_.node_epsilon, fs);
        if (st == FlowStatus::Ok) {
            f = derivative(fs);
        }
        return st;
    }

    double initial_step(const State& y, const State& f) const {
        double d0 = 0.0;
        double d1 = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double sc = settings_.abs_tol + settings_.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        if (d0 < 1e-10 || d1 < 1e-10) {
            return 1e-6;
        }
        return 0.01 * std::sqrt(d0 / d1);
    }

    FlowStatus attempt(double time, double h, const State& y, const State& k1, State& y_new,
                       State& k7, FlowSample& fs7, double& err) const {
        State k2, k3, k4, k5, k6, tmp;
        FlowSample fs;
        auto stage = [&](State& out, double dt, auto&& combine) {
            for (int i = 0; i < n_; ++i) {
                tmp[i] = y[i] + h * combine(i);
            }
            return eval(time + dt * h, tmp, out, fs);
        };
        FlowStatus st;
        if ((st = stage(k2, c2, [&](int i) { return a21 * k1[i]; })) != FlowStatus::Ok) return st;
        if ((st = stage(k3, c3, [&](int i) { return a31 * k1[i] + a32 * k2[i]; })) !=
            FlowStatus::Ok)
            return st;
        if ((st = stage(k4, c4, [&](int i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; })) !=
            FlowStatus::Ok)
            return st;
        if ((st = stage(k5, c5, [&](int i) {
                 return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
             })) != FlowStatus::Ok)
            return st;
        if ((st = stage(k6, 1.0, [&](int i) {
                 return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
             })) != FlowStatus::Ok)
            return st;
        for (int i = 0; i < n_; ++i) {
            y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                   a76 * k6[i]);
        }
        if ((st = eval(time + h, y_new, k7, fs7)) != FlowStatus::Ok) return st;

        double sum = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (dim_ == 1 && i == 1) {
                continue;
            }
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc = settings_.abs_tol +
                              settings_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            sum += (e / sc) * (e / sc);
        }
        err = std::sqrt(sum / (dim_ + 1));
        return FlowStatus::Ok;
    }

    void check_walls(const State& y, const Point& a, double s, double time) const {
        const DomainSpec& domain = wave_.domain();
        if (domain.kind() != DomainKind::Box) {
            return;
        }
        for (int axis = 0; axis < dim_; ++axis) {
            const double l = domain.length(axis);
            const double v = y[static_cast<std::size_t>(axis)];
            if (std::min(v, l - v) < kWallFraction * l) {
                std::ostringstream os;
                os << "trajectory reached the wall at t = " << time;
                throw DomainError(where(os.str(), a, s));
            }
        }
    }

    [[noreturn]] void fail(FlowStatus st, const Point& a, double s, double time) const {
        std::ostringstream os;
        os << "trajectory cannot advance past t = " << time;
        if (st == FlowStatus::NearNode) {
            throw NodeProximity(where(os.str() + " (node)", a, s));
        }
        throw DomainError(where(os.str() + " (left the domain)", a, s));
    }

    std::string where(const std::string& what, const Point& a, double s) const {
        std::ostringstream os;
        os.precision(17);
        os << what << "; label a = (" << a[0];
        if (dim_ == 2) {
            os << ", " << a[1];
        }
        os << "), s = " << s;
        return os.str();
    }

    const WaveSpec& wave_;
    const IntegratorSettings& settings_;
    int dim_;
    static constexpr int n_ = 3;
};

}  // namespace

FlowResult advect(const WaveSpec& wave, const FlowQuery& q, const IntegratorSettings& settings) {
    if (!std::isfinite(q.s) || !std::isfinite(q.t)) {
        throw InvalidArgument("flow query times must be finite");
    }
    settings.validate();
    return Integrator(wave, settings).run(q.a, q.s, q.t);
}

double round_trip_defect(const WaveSpec& wave, const Point& a, double s, double t,
                         const IntegratorSettings& settings) {
    const Point start = wave.domain().canonical(a);
    if (t == s) {
        return 0.0;
    }
    const FlowResult out = advect(wave, {start, s, t}, settings);
    const FlowResult back = advect(wave, {out.position, t, s}, settings);
    return norm(wave.domain().displacement(start, back.position));
}

double jacobian_fd(const WaveSpec& wave, const FlowQuery& q, double h,
                   const IntegratorSettings& settings) {
    const DomainSpec& domain = wave.domain();
    const Point a = domain.canonical(q.a);
    if (!(h > 0.0)) {
        throw InvalidArgument("finite-difference spacing must be positive");
    }
    if (domain.wall_distance(a) <= h) {
        throw DomainError("finite-difference stencil crosses the box wall");
    }
    const int d = wave.dimension();
    // F = I + d(displacement)/da; differencing the displacement keeps the
    // identity part exact.
    double f[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    for (int j = 0; j < d; ++j) {
        Point plus = a;
        Point minus = a;
        plus[static_cast<std::size_t>(j)] += h;
        minus[static_cast<std::size_t>(j)] -= h;
        const FlowResult rp = advect(wave, {plus, q.s, q.t}, settings);
        const FlowResult rm = advect(wave, {minus, q.s, q.t}, settings);
        for (int i = 0; i < d; ++i) {
            const auto k = static_cast<std::size_t>(i);
            f[i][j] += (rp.displacement[k] - rm.displacement[k]) / (2.0 * h);
        }
    }
    return d == 1 ? f[0][0] : f[0][0] * f[1][1] - f[0][1] * f[1][0];
}

}  // namespace bohmrelax
