#include "bohmrelax/density.hpp"

#include <cmath>

#include "bohmrelax/errors.hpp"

namespace bohmrelax {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double evaluate(const DensitySpec& spec, const DomainSpec& domain, const Point& x) {
    return std::visit(
        Overloaded{
            [&](const DensitySpec::Uniform&) { return 1.0 / domain.volume(); },
            [&](const DensitySpec::ModeBorn& m) { return std::norm(eigenmode_value(domain, m.n, x)); },
            [&](const DensitySpec::Mixture& mix) {
                double sum = 0.0;
                for (const auto& c : mix.components) {
                    sum += c.weight * evaluate(c.density, domain, x);
                }
                return sum;
            },
            [&](const DensitySpec::Custom& c) { return c.fn(x); },
        },
        spec.kind());
}

}  // namespace

DensitySpec DensitySpec::mixture(std::vector<Component> components) {
    if (components.empty()) {
        throw InvalidArgument("mixture density has no components");
    }
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
            throw InvalidArgument("mixture weights must be finite and non-negative");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidArgument("mixture weights must sum to 1");
    }
    return DensitySpec(Mixture{std::move(components)});
}

void validate_density(const DensitySpec& spec, const DomainSpec& domain) {
    std::visit(Overloaded{
                   [](const DensitySpec::Uniform&) {},
                   [&](const DensitySpec::ModeBorn& m) {
                       for (int axis = 0; axis < domain.dimension(); ++axis) {
                           const int n = m.n[static_cast<std::size_t>(axis)];
                           if (domain.kind() == DomainKind::Box && n < 1) {
                               throw InvalidArgument("mode_born quantum numbers must be >= 1 on a box");
                           }
                       }
                   },
                   [&](const DensitySpec::Mixture& mix) {
                       for (const auto& c : mix.components) {
                           validate_density(c.density, domain);
                       }
                   },
                   [](const DensitySpec::Custom& c) {
                       if (!c.fn) {
                           throw InvalidArgument("custom density has no function");
                       }
                   },
               },
               spec.kind());
}

double rho0(const DensitySpec& spec, const DomainSpec& domain, const Point& x) {
    return evaluate(spec, domain, domain.canonical(x));
}

double rho(const WaveSpec& wave, const DensitySpec& spec, const Point& x, double t,
           const IntegratorSettings& settings) {
    const Point y = wave.domain().canonical(x);
    if (t == 0.0) {
        return rho0(spec, wave.domain(), y);
    }
    const FlowResult back = advect(wave, {y, t, 0.0}, settings);
    return rho0(spec, wave.domain(), back.position) * back.jacobian;
}

}  // namespace bohmrelax
