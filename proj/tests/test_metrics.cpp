#include <cmath>

#include "doctest.h"
#include "psnf/metrics.hpp"
#include "psnf/trajectory.hpp"

using namespace psnf;

namespace {

Trajectory constant_traj(double b, double period, double t_end, double h) {
    Trajectory traj;
    traj.period = period;
    const long n = std::lround(t_end / h);
    for (long i = 0; i <= n; ++i) {
        traj.times.push_back(i * h);
        traj.states.push_back(State{b, 0.0});
        traj.inputs.push_back(0.0);
    }
    return traj;
}

// B = high until t_step, then b_ref; the moving average decays linearly
// over the following period.
Trajectory step_traj(double high, double b_ref, double t_step, double period,
                     double t_end, double h) {
    Trajectory traj;
    traj.period = period;
    const long n = std::lround(t_end / h);
    for (long i = 0; i <= n; ++i) {
        const double t = i * h;
        traj.times.push_back(t);
        traj.states.push_back(State{t < t_step ? high : b_ref, 0.0});
        traj.inputs.push_back(0.0);
    }
    return traj;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("steady-state error of constant trajectories") {
    const double b_ref = 0.9;
    const auto on_target = constant_traj(b_ref, 1.0, 20.0, 0.01);
    CHECK(steady_state_error_percent(on_target, b_ref, 20) <= 1e-10);

    const auto off_target = constant_traj(0.99 * b_ref, 1.0, 20.0, 0.01);
    CHECK(steady_state_error_percent(off_target, b_ref, 20) ==
          doctest::Approx(1.0).epsilon(1e-9));

    const auto short_traj = constant_traj(b_ref, 1.0, 3.0, 0.01);
    CHECK_THROWS_AS(steady_state_error_percent(short_traj, b_ref, 20),
                    std::out_of_range);
    CHECK_THROWS_AS(steady_state_error_percent(on_target, b_ref, 4),
                    std::invalid_argument);
}

TEST_CASE("settling is immediate when the band already holds") {
    const auto traj = constant_traj(0.9, 2.0, 40.0, 0.01);
    const auto ps = settling_periods(traj, 0.9);
    REQUIRE(ps.has_value());
    CHECK(*ps == 1);
}

TEST_CASE("settling ceiling arithmetic") {
    // 20% error until 1.8 P; the moving average re-enters the 10% band at
    // 2.3 P, so the settling time rounds up to 3 periods.
    const double period = 2.0;
    const auto traj = step_traj(1.2 * 0.9, 0.9, 1.8 * period, period, 20.0, 0.001);
    const auto ps = settling_periods(traj, 0.9);
    REQUIRE(ps.has_value());
    CHECK(*ps == 3);
}

TEST_CASE("settling reports not-settled") {
    const auto traj = constant_traj(0.5, 2.0, 40.0, 0.01);
    CHECK_FALSE(settling_periods(traj, 0.9).has_value());
}

TEST_CASE("settling is monotone in the band width") {
    const double period = 2.0;
    const auto traj = step_traj(1.2 * 0.9, 0.9, 1.8 * period, period, 20.0, 0.001);
    const auto tight = settling_periods(traj, 0.9, 0.10);
    const auto loose = settling_periods(traj, 0.9, 0.15);
    REQUIRE(tight.has_value());
    REQUIRE(loose.has_value());
    CHECK(*loose <= *tight);
}

TEST_CASE("max duty") {
    CHECK(max_duty({0.31}) == 0.31);
    CHECK(max_duty({0.3, 0.57, 0.31, 0.2}) == 0.57);
    CHECK_THROWS_AS(max_duty({}), std::invalid_argument);
}

TEST_CASE("ise and itae analytic identities") {
    // Constant relative error of 0.1 over [1, 20] with P = 1:
    // ISE = 0.01 * 19, ITAE = 0.1 * (400 - 1) / 2.
    const double b_ref = 0.9;
    const auto traj = constant_traj(1.1 * b_ref, 1.0, 20.0, 0.01);
    CHECK(ise(traj, b_ref, 1.0, 20.0) == doctest::Approx(0.19).epsilon(1e-9));
    CHECK(itae(traj, b_ref, 1.0, 20.0) == doctest::Approx(19.95).epsilon(1e-9));

    // Zero error gives zero integrals, up to quadrature roundoff.
    const auto perfect = constant_traj(b_ref, 1.0, 20.0, 0.01);
    CHECK(ise(perfect, b_ref, 1.0, 20.0) <= 1e-20);
    CHECK(itae(perfect, b_ref, 1.0, 20.0) <= 1e-11);
}

TEST_CASE("itae weights late errors more") {
    const double b_ref = 0.9;
    const double period = 1.0;
    // Same error mass, placed early vs late.
    const auto early = step_traj(1.2 * b_ref, b_ref, 5.0, period, 40.0, 0.005);
    Trajectory late;
    late.period = period;
    for (long i = 0; i <= 8000; ++i) {
        const double t = i * 0.005;
        late.times.push_back(t);
        late.states.push_back(State{t >= 35.0 ? 1.2 * b_ref : b_ref, 0.0});
        late.inputs.push_back(0.0);
    }
    CHECK(itae(late, b_ref, 1.0, 40.0) > itae(early, b_ref, 1.0, 40.0));
}

TEST_CASE("ise is stable under sample refinement") {
    // B must be continuous for the trapezoid rule to converge at second
    // order, so use a smooth relaxation instead of a step.
    const double b_ref = 0.9;
    const auto make = [&](double h) {
        Trajectory traj;
        traj.period = 2.0;
        const long n = std::lround(20.0 / h);
        for (long i = 0; i <= n; ++i) {
            const double t = i * h;
            traj.times.push_back(t);
            traj.states.push_back(State{b_ref * (1.0 + 0.1 * std::exp(-0.4 * t)), 0.0});
            traj.inputs.push_back(0.0);
        }
        return traj;
    };
    const double a = ise(make(0.0025), b_ref, 2.0, 20.0);
    const double b = ise(make(0.00125), b_ref, 2.0, 20.0);
    CHECK(std::abs(a - b) / a <= 1e-6);
}

TEST_CASE("metric windows must start at or after one period") {
    const auto traj = constant_traj(0.9, 2.0, 20.0, 0.01);
    CHECK_THROWS_AS(ise(traj, 0.9, 0.5, 20.0), std::out_of_range);
    CHECK_THROWS_AS(itae(traj, 0.9, 0.5, 20.0), std::out_of_range);
}

TEST_SUITE_END();
