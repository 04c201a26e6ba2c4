#include <cmath>

#include "bohmrelax/flowmap.hpp"
#include "bohmrelax/random.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bohmrelax;

namespace {

WaveSpec standing_wave() {
    return WaveSpec(DomainSpec::standard(DomainKind::Box, 2), {{{2, 1}, {0.6, 0.8}}});
}

WaveSpec translating_wave() {
    return WaveSpec(DomainSpec::standard(DomainKind::Torus, 2), {{{1, 0}, {1.0, 0.0}}});
}

IntegratorSettings tight() {
    IntegratorSettings s;
    s.rel_tol = 1e-12;
    s.abs_tol = 1e-14;
    return s;
}

}  // namespace

TEST_CASE("standing wave does not move particles") {
    const WaveSpec w = standing_wave();
    for (double t : {0.5, 3.0, -2.0, 12.0}) {
        const Point a(1.0, 0.7);
        const FlowResult r = advect(w, {a, 0.0, t});
        CHECK(norm(r.position - a) < 1e-14);
        CHECK(std::abs(r.jacobian - 1.0) < 1e-12);
        CHECK(round_trip_defect(w, a, 0.0, t) < 1e-14);
        CHECK(std::abs(jacobian_fd(w, {a, 0.0, t}, 1e-5) - 1.0) < 1e-12);
    }
}

TEST_CASE("t = s is the identity map") {
    const WaveSpec w = testing::standard_config().wave();
    const Point a(1.0, 2.0);
    const FlowResult r = advect(w, {a, 1.5, 1.5});
    CHECK(r.position == a);
    CHECK(r.jacobian == 1.0);
    CHECK(r.steps == 0);
    CHECK(round_trip_defect(w, a, 1.5, 1.5) == 0.0);
}

TEST_CASE("plane wave translates rigidly") {
    const WaveSpec w = translating_wave();
    for (double t : {0.25, 1.0, 7.5, -3.0}) {
        const Point a(5.9, 1.2);
        const FlowResult r = advect(w, {a, 0.0, t});
        const double want = std::fmod(std::fmod(a[0] + t, 2 * kPi) + 2 * kPi, 2 * kPi);
        CHECK(r.position[0] == doctest::Approx(want).epsilon(1e-12));
        CHECK(r.position[1] == doctest::Approx(a[1]).epsilon(1e-14));
        CHECK(r.displacement[0] == doctest::Approx(t).epsilon(1e-12));
        CHECK(std::abs(r.jacobian - 1.0) < 1e-12);
        CHECK(std::abs(jacobian_fd(w, {a, 0.0, t}, 1e-5) - 1.0) < 1e-10);
    }

    const WaveSpec ring(DomainSpec::standard(DomainKind::Torus, 1), {{{1, 0}, {1.0, 0.0}}});
    const FlowResult r = advect(ring, {Point(6.0), 0.0, 1.0});
    CHECK(r.position[0] == doctest::Approx(7.0 - 2 * kPi).epsilon(1e-12));
}

TEST_CASE("self-convergence at the reference label point") {
    const WaveSpec w = testing::standard_config().wave();
    const Point a(1.0, 2.0);
    IntegratorSettings fine;
    fine.rel_tol = 1e-11;
    fine.abs_tol = 1e-13;
    const FlowResult coarse = advect(w, {a, 0.0, 2 * kPi});
    const FlowResult ref = advect(w, {a, 0.0, 2 * kPi}, fine);
    CHECK(norm(coarse.position - ref.position) < 1e-6);
    CHECK(testing::rel_err(coarse.jacobian, ref.jacobian) < 1e-6);
    CHECK(coarse.jacobian > 0.0);
}

TEST_CASE("finite-difference jacobian agrees over short horizons") {
    const WaveSpec w = testing::standard_config().wave();
    auto engine = item_engine(21, 0);
    for (int i = 0; i < 40; ++i) {
        const Point a(0.2 + 2.7 * uniform01(engine), 0.2 + 2.7 * uniform01(engine));
        const double t = 0.25 * uniform01(engine);
        const double j = advect(w, {a, 0.0, t}).jacobian;
        CHECK(testing::rel_err(jacobian_fd(w, {a, 0.0, t}, 1e-5), j) < 1e-4);
    }
}

TEST_CASE("composition and jacobian reciprocity") {
    const WaveSpec w = testing::standard_config().wave();
    const IntegratorSettings s = tight();
    auto engine = item_engine(22, 0);
    int checked = 0;
    while (checked < 40) {
        const Point a(0.1 + 2.9 * uniform01(engine), 0.1 + 2.9 * uniform01(engine));
        const double t1 = 0.5 * uniform01(engine);
        const double t2 = 0.5 * uniform01(engine);
        if (w.born_density(a, 0.0) < 1e-2) {
            continue;
        }
        ++checked;
        const FlowResult p1 = advect(w, {a, 0.0, t1}, s);
        const FlowResult p12 = advect(w, {p1.position, t1, t2}, s);
        const FlowResult p2 = advect(w, {a, 0.0, t2}, s);
        CHECK(norm(p12.position - p2.position) < 1e-10);
        CHECK(testing::rel_err(p1.jacobian * p12.jacobian, p2.jacobian) < 1e-7);

        const FlowResult back = advect(w, {p2.position, t2, 0.0}, s);
        CHECK(std::abs(p2.jacobian * back.jacobian - 1.0) < 1e-7);
    }
}

TEST_CASE("born density is carried by the flow") {
    const WaveSpec w = testing::standard_config().wave();
    auto engine = item_engine(23, 0);
    for (int i = 0; i < 60; ++i) {
        const Point a(0.05 + 3.0 * uniform01(engine), 0.05 + 3.0 * uniform01(engine));
        const double t = 4 * kPi * uniform01(engine);
        const double born0 = w.born_density(a, 0.0);
        if (born0 <= 1e-6) {
            continue;
        }
        const FlowResult r = advect(w, {a, 0.0, t});
        CHECK(r.jacobian > 0.0);
        CHECK(std::abs(w.born_density(r.position, t) * r.jacobian - born0) / born0 < 1e-5);
    }
}

TEST_CASE("backward integration inverts forward integration") {
    const WaveSpec w = testing::standard_config().wave();
    const Point a(1.3, 1.9);
    const FlowResult fwd = advect(w, {a, 0.0, 0.8});
    const FlowResult bwd = advect(w, {fwd.position, 0.8, 0.0});
    CHECK(norm(bwd.position - a) < 1e-6);
    CHECK(round_trip_defect(w, a, 0.0, 0.8) == doctest::Approx(norm(bwd.position - a)));
}

TEST_CASE("errors") {
    const WaveSpec w = testing::standard_config().wave();
    CHECK_THROWS_AS(advect(w, {Point(-1.0, 1.0), 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(advect(w, {Point(0.0, 1.0), 0.0, 1.0}), NodeProximity);

    IntegratorSettings few;
    few.max_steps = 5;
    CHECK_THROWS_AS(advect(w, {Point(1.0, 2.0), 0.0, 3.0}, few), StepLimitExceeded);

    IntegratorSettings bad;
    bad.rel_tol = 1e-14;
    CHECK_THROWS_AS(advect(w, {Point(1.0, 2.0), 0.0, 1.0}, bad), InvalidArgument);
    bad = {};
    bad.max_step = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);

    CHECK_THROWS_AS(jacobian_fd(w, {Point(1e-6, 1.0), 0.0, 1.0}, 1e-5), DomainError);
    CHECK_THROWS_AS(jacobian_fd(w, {Point(1.0, 1.0), 0.0, 1.0}, 0.0), InvalidArgument);
}
