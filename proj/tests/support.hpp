#pragma once

#include <string>

#include "bohmrelax/config.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
    return std::string(BOHMRELAX_FIXTURE_DIR) + "/" + name;
}

inline const bohmrelax::ExperimentConfig& standard_config() {
    static const bohmrelax::ExperimentConfig config = bohmrelax::load_config(fixture("standard.json"));
    return config;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace testing
