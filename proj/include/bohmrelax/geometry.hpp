#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace bohmrelax {

inline constexpr double kPi = 3.14159265358979323846;

/// Configuration-space point. Only the first `dimension` components are
/// meaningful; unused components are kept at zero.
struct Point {
    std::array<double, 2> c{0.0, 0.0};

    constexpr Point() = default;
    constexpr explicit Point(double x) : c{x, 0.0} {}
    constexpr Point(double x, double y) : c{x, y} {}

    constexpr double& operator[](std::size_t i) { return c[i]; }
    constexpr double operator[](std::size_t i) const { return c[i]; }

    friend constexpr Point operator+(Point a, const Point& b) {
        a.c[0] += b.c[0];
        a.c[1] += b.c[1];
        return a;
    }
    friend constexpr Point operator-(Point a, const Point& b) {
        a.c[0] -= b.c[0];
        a.c[1] -= b.c[1];
        return a;
    }
    friend constexpr Point operator*(double s, Point a) {
        a.c[0] *= s;
        a.c[1] *= s;
        return a;
    }
    friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline double norm(const Point& p) { return std::hypot(p[0], p[1]); }

enum class DomainKind { Box, Torus };

/// Rectangular configuration domain D: a hard-walled box or a periodic torus.
class DomainSpec {
public:
    /// Box with side pi, or torus with side 2*pi, in every dimension.
    static DomainSpec standard(DomainKind kind, int dimension);

    DomainSpec(DomainKind kind, int dimension, std::array<double, 2> lengths);

    DomainKind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return dimension_; }
    double length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
    const std::array<double, 2>& lengths() const noexcept { return lengths_; }

    /// Total volume W.
    double volume() const noexcept;

    /// Box: true when every coordinate lies in [0, L]. Torus: always true.
    bool contains(const Point& x) const noexcept;

    /// Throws DomainError for a point outside a Box; reduces Torus
    /// coordinates into [0, L).
    Point canonical(const Point& x) const;

    /// Torus coordinates reduced into [0, L); Box points unchanged.
    Point wrap(const Point& x) const noexcept;

    /// Difference b - a; on the torus the shortest periodic image.
    Point displacement(const Point& a, const Point& b) const noexcept;

    /// Smallest distance from x to a Box wall (infinity on the torus).
    double wall_distance(const Point& x) const noexcept;

    std::string describe() const;

    friend bool operator==(const DomainSpec&, const DomainSpec&) = default;

private:
    DomainKind kind_;
    int dimension_;
    std::array<double, 2> lengths_;
};

std::string to_string(DomainKind kind);

}  // namespace bohmrelax
