#include "bohmrelax/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "bohmrelax/errors.hpp"

namespace bohmrelax {

DomainSpec DomainSpec::standard(DomainKind kind, int dimension) {
    const double side = kind == DomainKind::Box ? kPi : 2.0 * kPi;
    return DomainSpec(kind, dimension, {side, dimension == 2 ? side : 0.0});
}

DomainSpec::DomainSpec(DomainKind kind, int dimension, std::array<double, 2> lengths)
    : kind_(kind), dimension_(dimension), lengths_(lengths) {
    if (dimension != 1 && dimension != 2) {
        throw InvalidArgument("domain dimension must be 1 or 2, got " + std::to_string(dimension));
    }
    for (int i = 0; i < dimension; ++i) {
        const double l = lengths_[static_cast<std::size_t>(i)];
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw InvalidArgument("domain lengths must be finite and positive");
        }
    }
    if (dimension == 1) {
        lengths_[1] = 0.0;
    }
}

double DomainSpec::volume() const noexcept {
    return dimension_ == 1 ? lengths_[0] : lengths_[0] * lengths_[1];
}

bool DomainSpec::contains(const Point& x) const noexcept {
    if (kind_ == DomainKind::Torus) {
        return std::isfinite(x[0]) && std::isfinite(x[1]);
    }
    for (int i = 0; i < dimension_; ++i) {
        const double v = x[static_cast<std::size_t>(i)];
        if (!(v >= 0.0 && v <= lengths_[static_cast<std::size_t>(i)])) {
            return false;
        }
    }
    return true;
}

Point DomainSpec::wrap(const Point& x) const noexcept {
    if (kind_ == DomainKind::Box) {
        return x;
    }
    Point out = x;
    for (int i = 0; i < dimension_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double v = std::fmod(x[k], lengths_[k]);
        if (v < 0.0) {
            v += lengths_[k];
        }
        if (v >= lengths_[k]) {
            v = 0.0;
        }
        out[k] = v;
    }
    return out;
}

Point DomainSpec::canonical(const Point& x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "point (" << x[0];
        if (dimension_ == 2) {
            os << ", " << x[1];
        }
        os << ") lies outside " << describe();
        throw DomainError(os.str());
    }
    return wrap(x);
}

Point DomainSpec::displacement(const Point& a, const Point& b) const noexcept {
    Point d = b - a;
    if (kind_ == DomainKind::Torus) {
        for (int i = 0; i < dimension_; ++i) {
            const auto k = static_cast<std::size_t>(i);
            d[k] -= lengths_[k] * std::round(d[k] / lengths_[k]);
        }
    }
    return d;
}

double DomainSpec::wall_distance(const Point& x) const noexcept {
    if (kind_ == DomainKind::Torus) {
        return std::numeric_limits<double>::infinity();
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dimension_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        best = std::min({best, x[k], lengths_[k] - x[k]});
    }
    return best;
}

std::string DomainSpec::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "[" << lengths_[0];
    if (dimension_ == 2) {
        os << " x " << lengths_[1];
    }
    os << "]";
    return os.str();
}

std::string to_string(DomainKind kind) {
    return kind == DomainKind::Box ? "box" : "torus";
}

}  // namespace bohmrelax
