#include <cmath>
#include <random>
#include <string>

#include "bohmrelax/config.hpp"
#include "bohmrelax/random.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bohmrelax;

namespace {

std::string minimal(const std::string& wave, const std::string& extra = "") {
    return R"({"wave": )" + wave +
           R"(, "density": {"kind": "uniform"}, "grid": {"cells": [4, 4], "quadrature": [2, 2]}, "times": [0, 1])" +
           extra + "}";
}

const std::string kBoxDomain = R"({"kind": "box", "dimension": 2})";

std::string config_error(const std::string& raw) {
    try {
        validate_config(raw);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("standard fixture resolves reproducibly") {
    const ExperimentConfig& cfg = testing::standard_config();
    CHECK(cfg.modes.size() == 16);
    for (const auto& m : cfg.modes) {
        CHECK(std::abs(m.coefficient) == doctest::Approx(0.25).epsilon(1e-15));
    }
    CHECK(cfg.cells == std::array<int, 2>{16, 16});
    CHECK(cfg.quadrature == std::array<int, 2>{4, 4});
    CHECK(cfg.times.size() == 9);
    CHECK(cfg.times.back() == doctest::Approx(4 * kPi).epsilon(1e-15));
    REQUIRE(cfg.phases.has_value());

    const std::string once = resolved_config_json(cfg);
    const std::string again = resolved_config_json(load_config(testing::fixture("standard.json")));
    CHECK(once == again);
    CHECK(resolved_config_json(validate_config(once)) == once);
}

TEST_CASE("random phases follow the documented generator") {
    const ExperimentConfig cfg =
        validate_config(minimal(R"({"domain": )" + kBoxDomain + R"(, "random_phases": {"seed": 99, "modes": [[1, 2], [3, 1]]}})"));
    REQUIRE(cfg.modes.size() == 2);
    std::mt19937_64 engine(99);
    const double theta0 = 2 * kPi * uniform01(engine);
    const double theta1 = 2 * kPi * uniform01(engine);
    CHECK(cfg.modes[0].n == QuantumNumbers{1, 2});
    CHECK(std::arg(cfg.modes[0].coefficient) == doctest::Approx(std::remainder(theta0, 2 * kPi)).epsilon(1e-12));
    CHECK(std::arg(cfg.modes[1].coefficient) == doctest::Approx(std::remainder(theta1, 2 * kPi)).epsilon(1e-12));
    CHECK(std::abs(cfg.modes[1].coefficient) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("explicit modes are normalized") {
    const ExperimentConfig cfg = validate_config(
        minimal(R"({"domain": )" + kBoxDomain + R"(, "modes": [{"n": [1, 1], "re": 3}, {"n": [2, 1], "im": 4}]})"));
    CHECK(std::abs(cfg.modes[0].coefficient - Complex(0.6, 0.0)) < 1e-15);
    CHECK(std::abs(cfg.modes[1].coefficient - Complex(0.0, 0.8)) < 1e-15);
}

TEST_CASE("violations are reported by field") {
    CHECK(config_error(minimal(R"({"domain": )" + kBoxDomain + R"(, "modes": [{"n": [1, 1], "re": 0}]})"))
              .find("empty wave") != std::string::npos);

    const std::string unsorted = R"({"wave": {"domain": )" + kBoxDomain +
                                 R"(, "modes": [{"n": [1, 1], "re": 1}]}, "density": {"kind": "uniform"},
        "grid": {"cells": [4, 4], "quadrature": [2, 2]}, "times": [0, 2, 1]})";
    const std::string msg = config_error(unsorted);
    CHECK(msg.find("times") != std::string::npos);

    const std::string first_not_zero = R"({"wave": {"domain": )" + kBoxDomain +
                                       R"(, "modes": [{"n": [1, 1], "re": 1}]}, "density": {"kind": "uniform"},
        "grid": {"cells": [4, 4], "quadrature": [2, 2]}, "times": [1, 2]})";
    CHECK(config_error(first_not_zero).find("times") != std::string::npos);

    const std::string wave = R"({"domain": )" + kBoxDomain + R"(, "modes": [{"n": [1, 1], "re": 1}]})";
    CHECK(config_error(minimal(wave, R"(, "colour": 1)")).find("colour: unknown key") != std::string::npos);
    CHECK(config_error(minimal(R"({"domain": )" + kBoxDomain + R"(, "modes": [{"n": [0, 1], "re": 1}]})"))
              .find("wave.modes[0]") != std::string::npos);
    CHECK(config_error(minimal(R"({"domain": )" + kBoxDomain +
                               R"(, "modes": [{"n": [1, 1], "re": 1}, {"n": [1, 1], "re": 1}]})"))
              .find("duplicate") != std::string::npos);
    CHECK(config_error(minimal(wave, R"(, "preimage_samples": 10)")).find("preimage_samples") != std::string::npos);
    CHECK(config_error(minimal(wave, R"(, "integrator": {"rel_tol": 1e-15})")).find("integrator") !=
          std::string::npos);
    CHECK(config_error(R"({"wave": )" + wave + R"(, "density": {"kind": "mode_born", "n": [0, 2]},
        "grid": {"cells": [4, 4], "quadrature": [1, 2]}, "times": [0]})")
              .find("grid.quadrature") != std::string::npos);
    CHECK(config_error("{not json").find("JSON") != std::string::npos);

    // Several problems are reported together.
    const std::string many = config_error(R"({"wave": {"domain": {"kind": "cube", "dimension": 2}},
        "grid": {"cells": [4, 4]}, "times": "soon"})");
    CHECK(many.find("wave.domain.kind") != std::string::npos);
    CHECK(many.find("density: missing") != std::string::npos);
    CHECK(many.find("grid.quadrature: missing") != std::string::npos);
    CHECK(many.find("times") != std::string::npos);
}

TEST_CASE("optional sections") {
    const ExperimentConfig cfg = validate_config(R"({
        "wave": {"domain": {"kind": "torus", "dimension": 1, "lengths": [3.0]},
                 "random_phases": {"seed": 4, "max_quantum": 2}},
        "density": {"kind": "mixture", "components": [
            {"weight": 0.25, "density": {"kind": "uniform"}},
            {"weight": 0.75, "density": {"kind": "mode_born", "n": [1]}}]},
        "grid": {"cells": [6], "quadrature": [3]},
        "times": [0, 0.5],
        "integrator": {"rel_tol": 1e-10, "max_steps": 1000},
        "preimage_samples": 200,
        "pair_diagnostics": {"count": 5, "separation": 0.001, "seed": 8},
        "output_dir": "somewhere",
        "run_seed": 12
    })");
    CHECK(cfg.domain.kind() == DomainKind::Torus);
    CHECK(cfg.modes.size() == 5);
    CHECK(cfg.cells == std::array<int, 2>{6, 1});
    CHECK(cfg.integrator.rel_tol == 1e-10);
    CHECK(cfg.integrator.max_steps == 1000);
    CHECK(cfg.integrator.abs_tol == IntegratorSettings{}.abs_tol);
    CHECK(cfg.preimage_samples == 200);
    REQUIRE(cfg.pairs.has_value());
    CHECK(cfg.pairs->count == 5);
    CHECK(cfg.output_dir == "somewhere");
    CHECK(cfg.run_seed == 12);
    CHECK(resolved_config_json(validate_config(resolved_config_json(cfg))) == resolved_config_json(cfg));
}

TEST_CASE("missing config file") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}
