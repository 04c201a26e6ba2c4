#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "bohmrelax/flowmap.hpp"
#include "bohmrelax/geometry.hpp"
#include "bohmrelax/wavefunction.hpp"

namespace bohmrelax {

/// Initial particle density rho_0. Uniform (= 1/W), the Born density of a
/// single eigenmode, a convex mixture of those, or (test hook only) an
/// arbitrary evaluable function.
class DensitySpec {
public:
    struct Uniform {};
    struct ModeBorn {
        QuantumNumbers n{0, 0};
    };
    struct Component;
    struct Mixture {
        std::vector<Component> components;
    };
    /// Not serializable; used by tests to set rho_0 = |psi(., 0)|^2.
    struct Custom {
        std::function<double(const Point&)> fn;
    };
    using Kind = std::variant<Uniform, ModeBorn, Mixture, Custom>;

    static DensitySpec uniform() { return DensitySpec(Uniform{}); }
    static DensitySpec mode_born(QuantumNumbers n) { return DensitySpec(ModeBorn{n}); }
    /// Throws InvalidArgument unless weights are non-negative and sum to 1
    /// within 1e-12.
    static DensitySpec mixture(std::vector<Component> components);
    static DensitySpec custom(std::function<double(const Point&)> fn) {
        return DensitySpec(Custom{std::move(fn)});
    }

    const Kind& kind() const noexcept { return kind_; }
    bool is_custom() const noexcept { return std::holds_alternative<Custom>(kind_); }

private:
    explicit DensitySpec(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
};

struct DensitySpec::Component {
    double weight = 0.0;
    DensitySpec density;
};

/// Checks the mode indices referenced by `spec` against `domain`.
void validate_density(const DensitySpec& spec, const DomainSpec& domain);

/// rho_0(x). Throws DomainError for x outside a Box.
double rho0(const DensitySpec& spec, const DomainSpec& domain, const Point& x);

/// Transported density rho[x, t] = rho_0(P(x, t; 0)) J(x, t; 0), evaluated by
/// backtracking the trajectory through x to time 0.
double rho(const WaveSpec& wave, const DensitySpec& spec, const Point& x, double t,
           const IntegratorSettings& settings = {});

}  // namespace bohmrelax
