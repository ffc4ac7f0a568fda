#include <cmath>

#include "doctest.h"
#include "psnf/model.hpp"
#include "psnf/rng.hpp"

using namespace psnf;

TEST_SUITE_BEGIN("model");

TEST_CASE("parameter invariants are rejected at construction") {
    CHECK_NOTHROW(PlantParams::nominal().validate());
    CHECK_THROWS_AS(PlantParams::make(0.5, 1.0, 0.5, 0.15, 0.5, 0.05),
                    std::invalid_argument);  // g == d
    CHECK_THROWS_AS(PlantParams::make(0.4, 1.0, 0.5, 0.15, 0.5, 0.05),
                    std::invalid_argument);  // g < d
    CHECK_THROWS_AS(PlantParams::make(0.5, 0.0, 0.015, 0.15, 0.5, 0.05),
                    std::invalid_argument);
    CHECK_THROWS_AS(PlantParams::make(0.5, 1.0, 0.015, -0.1, 0.5, 0.05),
                    std::invalid_argument);
}

TEST_CASE("dimensionless groups of the nominal parameters") {
    const auto p = PlantParams::nominal();
    CHECK(p.alpha() == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(p.beta() == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(p.kappa() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(p.discriminant() == doctest::Approx(0.6557438524301998).epsilon(1e-14));
}

TEST_CASE("pulse value phase convention") {
    CHECK(pulse_value(PulseWave::make(1.0, 0.0, 0.3), 0.5) == 0.0);
    CHECK(pulse_value(PulseWave::make(1.0, 1.0, 0.3), 0.99) == 1.0);
    const auto w = PulseWave::make(2.0, 0.31, 0.3);
    CHECK(pulse_value(w, 0.4) == 1.0);   // 0.4/2 = 0.2 < 0.31
    CHECK(pulse_value(w, 0.7) == 0.0);   // 0.7/2 = 0.35 >= 0.31
    CHECK(pulse_value(w, 0.0) == 1.0);   // pulse starts high
}

TEST_CASE("pulse value is periodic") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto w = PulseWave::make(rng.uniform(0.1, 5.0), rng.uniform01(),
                                       rng.uniform(0.0, 1.0));
        const double t = rng.uniform(0.0, 40.0);
        CHECK(pulse_value(w, t) == pulse_value(w, t + w.period));
    }
}

TEST_CASE("vector field at simple states") {
    const auto p = PlantParams::nominal();
    const auto at_origin = vector_field(p, State{0.0, 0.0}, 0.0);
    CHECK(at_origin.db == 0.0);
    CHECK(at_origin.dt == 0.0);

    const auto at_capacity = vector_field(p, State{1.0, 0.0}, 0.0);
    CHECK(at_capacity.db == doctest::Approx(-0.015).epsilon(1e-14));
    CHECK(at_capacity.dt == doctest::Approx(0.0075).epsilon(1e-14));
}

TEST_CASE("vector field vanishes at both equilibria") {
    const auto p = PlantParams::nominal();
    const auto eq = equilibria(p);
    for (const State& x : {eq.origin, eq.coexistence}) {
        const auto f = vector_field(p, x, 0.0);
        CHECK(std::abs(f.db) <= 1e-12);
        CHECK(std::abs(f.dt) <= 1e-12);
    }
}

TEST_CASE("coexistence equilibrium values") {
    const auto eq = equilibria(PlantParams::nominal());
    CHECK(eq.coexistence_scaled.b == doctest::Approx(0.6147520).epsilon(1e-7));
    CHECK(eq.coexistence_scaled.t == doctest::Approx(7.8943989).epsilon(1e-7));
    CHECK(eq.coexistence.b == doctest::Approx(0.6147520).epsilon(1e-7));
    CHECK(eq.coexistence.t == doctest::Approx(1.1841598).epsilon(1e-7));

    // Cross-check through the biomass nullcline T = (g(1-B) - d)/s.
    const auto p = PlantParams::nominal();
    const double t_check = (p.g * (1.0 - eq.coexistence.b) - p.d) / p.s;
    CHECK(eq.coexistence.t == doctest::Approx(t_check).epsilon(1e-12));
}

TEST_CASE("biomass equilibrium collapses as d approaches g") {
    const auto p = PlantParams::make(0.5, 1.0, 0.49999, 0.15, 0.5, 0.05);
    const auto eq = equilibria(p);
    CHECK(eq.coexistence_scaled.b > 0.0);
    CHECK(eq.coexistence_scaled.b < 1e-4);
}

TEST_CASE("coexistence equilibrium is linearly stable") {
    const auto p = PlantParams::nominal();
    const auto J = jacobian(p, equilibria(p).coexistence);
    const double trace = J[0][0] + J[1][1];
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    CHECK(trace < 0.0);
    CHECK(det > 0.0);
}

TEST_CASE("ideal biomass") {
    CHECK(ideal_biomass(PlantParams::nominal()) == doctest::Approx(0.97).epsilon(1e-12));
    CHECK(ideal_biomass(PlantParams::make(0.03, 1.0, 0.015, 0.15, 0.5, 0.05)) ==
          doctest::Approx(0.5).epsilon(1e-12));  // g = 2d
    // Vanishing mortality pushes the ideal value to the carrying capacity.
    CHECK(ideal_biomass(PlantParams::make(0.5, 1.0, 1e-9, 0.15, 0.5, 0.05)) ==
          doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("nondimensionalization") {
    const auto p = PlantParams::nominal();
    const State scaled = nondimensionalize(p, State{1.0, 0.15});
    CHECK(scaled.b == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(scaled.t == doctest::Approx(1.0).epsilon(1e-14));

    const State origin = nondimensionalize(p, State{0.0, 0.0});
    CHECK(origin.b == 0.0);
    CHECK(origin.t == 0.0);
}

TEST_CASE("nondimensionalize and dimensionalize are mutual inverses") {
    const auto p = PlantParams::nominal();
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const State x{rng.uniform(0.0, 2.0), rng.uniform(0.0, 5.0)};
        const State back = dimensionalize(p, nondimensionalize(p, x));
        CHECK(back.b == doctest::Approx(x.b).epsilon(1e-14));
        CHECK(back.t == doctest::Approx(x.t).epsilon(1e-14));
    }
}

TEST_SUITE_END();
