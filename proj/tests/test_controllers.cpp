#include <cmath>

#include "doctest.h"
#include "psnf/averaging.hpp"
#include "psnf/controllers.hpp"
#include "psnf/model.hpp"
#include "psnf/rng.hpp"

using namespace psnf;

TEST_SUITE_BEGIN("controllers");

TEST_CASE("pi output equals the feedforward duty under zero error") {
    PiConfig cfg;
    cfg.kp = 0.1;
    cfg.ki = 26.0;
    cfg.d_ref = 0.3095;
    cfg.quantization_step = 0.0;
    PiState st{0.0, cfg.d_ref};
    for (int i = 0; i < 10; ++i) {
        CHECK(pi_step(cfg, st, 0.0) == cfg.d_ref);
    }
}

TEST_CASE("pi first-step arithmetic") {
    PiConfig cfg;
    cfg.kp = 0.1;
    cfg.ki = 26.0;
    cfg.d_ref = 0.3095;
    cfg.quantization_step = 0.0;
    PiState st{0.0, cfg.d_ref};
    const double duty = pi_step(cfg, st, 0.01);
    CHECK(duty == doctest::Approx(0.5705).epsilon(1e-12));  // 0.3095 + 0.001 + 0.26
}

TEST_CASE("saturation freezes the integral under anti-windup") {
    PiConfig cfg;
    cfg.kp = 0.1;
    cfg.ki = 26.0;
    cfg.d_ref = 0.3095;
    cfg.quantization_step = 0.0;
    PiState st{0.0, cfg.d_ref};
    CHECK(pi_step(cfg, st, 0.1) == 1.0);
    const double frozen = st.error_sum;
    CHECK(frozen == 0.1);
    for (int i = 0; i < 5; ++i) {
        CHECK(pi_step(cfg, st, 0.1) == 1.0);
        CHECK(st.error_sum == frozen);
    }
    // An error of the opposite sign resumes integration.
    pi_step(cfg, st, -0.2);
    CHECK(st.error_sum == doctest::Approx(frozen - 0.2).epsilon(1e-12));
}

TEST_CASE("quantization rounds to the duty quantum") {
    PiConfig cfg;
    cfg.kp = 1.0;
    cfg.ki = 0.0;
    cfg.d_ref = 0.3;
    cfg.quantization_step = 0.01;
    PiState st{0.0, cfg.d_ref};
    const double duty = pi_step(cfg, st, 0.017);
    CHECK(duty == doctest::Approx(0.32).epsilon(1e-12));
    const double steps = duty / 0.01;
    CHECK(std::abs(steps - std::round(steps)) <= 1e-9);
}

TEST_CASE("emitted duties stay in [0, 1] for any error sequence") {
    PiConfig cfg;
    cfg.kp = 0.7;
    cfg.ki = 13.0;
    cfg.d_ref = 0.3095;
    PiState st{0.0, cfg.d_ref};
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const double duty = pi_step(cfg, st, rng.uniform(-0.5, 0.5));
        CHECK(duty >= 0.0);
        CHECK(duty <= 1.0);
    }
}

TEST_CASE("pi config guards") {
    PiConfig cfg;
    cfg.kp = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.kp = 0.1;
    cfg.quantization_step = 0.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("open-loop policy is constant") {
    const auto policy = open_loop_policy(0.3095);
    for (int i = 0; i < 40; ++i) CHECK(policy(i) == 0.3095);
    CHECK(open_loop_policy(0.0)(5) == 0.0);
    CHECK(open_loop_policy(1.0)(5) == 1.0);
    CHECK_THROWS_AS(open_loop_policy(1.5), std::invalid_argument);
}

TEST_CASE("degenerate GA reduces the MPC to a single candidate") {
    MpcConfig cfg;
    cfg.horizon = 1;
    cfg.wave = PulseWave::make(2.0, 0.0, 0.3);
    cfg.ga.first_gene_halfwidth = 0.0;  // every individual starts at previous_duty
    cfg.ga.mutation_prob = 0.0;
    cfg.ga.generations = 1;

    const auto p = PlantParams::nominal();
    const double d_exact = invert_feedforward(p, 0.3, 0.9).duty;
    const double duty = mpc_step(cfg, equilibria(p).coexistence, d_exact, 17);
    CHECK(duty == d_exact);
}

TEST_CASE("mpc is deterministic under a fixed seed") {
    MpcConfig cfg;
    cfg.wave = PulseWave::make(2.0, 0.0, 0.3);
    const State measured{0.8, 0.3};
    const double a = mpc_step(cfg, measured, 0.31, 42);
    const double b = mpc_step(cfg, measured, 0.31, 42);
    CHECK(a == b);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
}

TEST_SUITE_END();
