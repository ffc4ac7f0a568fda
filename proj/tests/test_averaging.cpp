#include <cmath>

#include "doctest.h"
#include "psnf/averaging.hpp"
#include "psnf/integrate.hpp"
#include "psnf/model.hpp"
#include "psnf/trajectory.hpp"

using namespace psnf;

namespace {

constexpr double kDutyRef = 13.0 / 42.0;  // closed-form inverse of 0.9 at gamma 0.3

// Steady periodic mean of the full simulation for one (P, D): integrate
// long enough that the transient is gone, then average the last period.
double steady_period_mean(double period, double duty, double gamma) {
    const auto p = PlantParams::nominal();
    const auto w = PulseWave::make(period, duty, gamma);
    const int n_periods = static_cast<int>(std::ceil(200.0 / period));
    const double t_end = n_periods * period;
    const auto traj = integrate_segment(p, w, duty, equilibria(p).coexistence, 0.0,
                                        t_end, 0.005);
    return period_mean_biomass(traj, t_end - period, t_end);
}

}  // namespace

TEST_SUITE_BEGIN("averaging");

TEST_CASE("averaged vector field zeros") {
    const auto p = PlantParams::nominal();
    const auto zero = averaged_vector_field(p, 0.3, 0.5, AveragedState{0.0, 0.0, 1.0, 0.0});
    CHECK(zero.db_av == 0.0);
    CHECK(zero.dt_av == 0.0);

    // With the input off, the uncontrolled equilibrium is a fixed point.
    const auto eq = equilibria(p);
    const AveragedState at_eq{eq.coexistence_scaled.b, eq.coexistence_scaled.t, 1.0, 0.0};
    const auto f = averaged_vector_field(p, 0.3, 0.0, at_eq);
    CHECK(std::abs(f.db_av) <= 1e-12);
    CHECK(std::abs(f.dt_av) <= 1e-12);
}

TEST_CASE("averaged vector field vanishes at the controlled equilibrium") {
    const auto p = PlantParams::nominal();
    const double gamma = 0.3;
    const double duty = kDutyRef;
    const double eta = gamma * duty / p.kappa();
    const double b = averaged_equilibrium(p, gamma, duty);
    const AveragedState avg{b, averaged_toxin_at(p, eta, b), 1.0, 0.0};
    const auto f = averaged_vector_field(p, gamma, duty, avg);
    CHECK(std::abs(f.db_av) <= 1e-10);
    CHECK(std::abs(f.dt_av) <= 1e-10);
}

TEST_CASE("averaged equilibrium values") {
    const auto p = PlantParams::nominal();
    CHECK(averaged_equilibrium(p, 0.3, 0.0) ==
          doctest::Approx(0.6147520491899334).epsilon(1e-12));
    CHECK(averaged_equilibrium(p, 0.3, kDutyRef) == doctest::Approx(0.9).epsilon(1e-6));
    // The limit of unbounded removal is the toxin-free biomass 1 - alpha.
    CHECK(averaged_equilibrium_from_eta(p, 1e9) ==
          doctest::Approx(1.0 - p.alpha()).epsilon(1e-6));
}

TEST_CASE("averaged equilibrium is strictly increasing in the duty") {
    const auto p = PlantParams::nominal();
    double prev = averaged_equilibrium(p, 0.3, 0.0);
    for (int i = 1; i <= 100; ++i) {
        const double cur = averaged_equilibrium(p, 0.3, i / 100.0);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("small-alpha approximation and its branch") {
    const auto p = PlantParams::nominal();
    const auto at_zero = approx_equilibrium(p, 0.3, 0.0);
    CHECK(at_zero.b_av == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(at_zero.valid);

    // The operating point sits on the saturated branch: eta = 0.93 >= beta-1.
    const auto at_ref = approx_equilibrium(p, 0.3, kDutyRef);
    CHECK_FALSE(at_ref.valid);

    const auto no_input = approx_equilibrium(p, 0.0, 0.7);
    CHECK(no_input.b_av == doctest::Approx(1.0 / p.beta()).epsilon(1e-12));
    CHECK(no_input.valid);  // beta > 1
}

TEST_CASE("approximation error is O(alpha) away from the branch point") {
    // alpha = 0.003; eta small keeps 4 alpha beta (1+eta) << (beta-1-eta)^2.
    const auto small_alpha = PlantParams::make(0.5, 1.0, 0.0015, 0.15, 0.5, 0.05);
    for (double duty : {0.0, 0.01}) {
        const double exact = averaged_equilibrium(small_alpha, 0.3, duty);
        const auto approx = approx_equilibrium(small_alpha, 0.3, duty);
        CHECK(approx.valid);
        CHECK(std::abs(approx.b_av - exact) / exact <= 0.01);
    }
    // Halving alpha roughly halves the gap.
    const auto half_alpha = PlantParams::make(0.5, 1.0, 0.00075, 0.15, 0.5, 0.05);
    const double gap_full = std::abs(approx_equilibrium(small_alpha, 0.3, 0.01).b_av -
                                     averaged_equilibrium(small_alpha, 0.3, 0.01));
    const double gap_half = std::abs(approx_equilibrium(half_alpha, 0.3, 0.01).b_av -
                                     averaged_equilibrium(half_alpha, 0.3, 0.01));
    CHECK(gap_half < 0.6 * gap_full);
}

TEST_CASE("feedforward inversion at the reference target") {
    const auto p = PlantParams::nominal();
    const auto res = invert_feedforward(p, 0.3, 0.9);
    CHECK(res.eta == doctest::Approx(13.0 / 14.0).epsilon(1e-12));
    CHECK(res.duty == doctest::Approx(kDutyRef).epsilon(1e-12));
    CHECK_FALSE(res.saturated);
}

TEST_CASE("feedforward inversion at the uncontrolled equilibrium") {
    const auto p = PlantParams::nominal();
    const auto res = invert_feedforward(p, 0.3, 0.6147520);
    CHECK(std::abs(res.eta) <= 1e-6);
    CHECK(res.duty == 0.0);
}

TEST_CASE("feedforward saturation and infeasibility") {
    const auto p = PlantParams::nominal();
    const auto weak = invert_feedforward(p, 0.01, 0.9);
    CHECK(weak.saturated);
    CHECK(weak.duty == 1.0);

    CHECK_THROWS_AS(invert_feedforward(p, 0.3, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(invert_feedforward(p, 0.3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_feedforward(p, 0.0, 0.9), std::invalid_argument);
}

TEST_CASE("inversion round-trips the equilibrium map") {
    const auto p = PlantParams::nominal();
    for (int i = 1; i <= 99; ++i) {
        const double duty = i / 100.0;
        const double target = averaged_equilibrium(p, 0.3, duty);
        const auto res = invert_feedforward(p, 0.3, target);
        CHECK(std::abs(res.duty - duty) <= 1e-9);
        CHECK(std::abs(averaged_equilibrium(p, 0.3, res.duty) - target) <= 1e-9);
    }
}

TEST_CASE("tabulated feedforward curve") {
    const auto p = PlantParams::nominal();
    const auto curve = tabulate_feedforward_curve(p, 0.3, 101);
    CHECK(curve.duties().size() == 101);
    const double d_ref = curve.lookup(0.9);
    CHECK(d_ref >= 0.305);
    CHECK(d_ref <= 0.315);

    for (double duty : {0.1, 0.5, 0.9}) {
        const double y = averaged_equilibrium(p, 0.3, duty);
        CHECK(std::abs(curve.lookup(y) - duty) <= 1e-4);  // ~1/n^2
    }
    for (std::size_t i = 1; i < curve.values().size(); ++i) {
        CHECK(curve.values()[i] >= curve.values()[i - 1]);
    }
}

TEST_CASE("open-loop design bound") {
    const auto p = PlantParams::nominal();
    CHECK(open_loop_condition(p, 0.1) == doctest::Approx(0.01525).epsilon(1e-12));
    CHECK(open_loop_condition(p, 0.0) == doctest::Approx(0.02275).epsilon(1e-12));
    CHECK(open_loop_condition(p, 10.0) < 0.0);  // any non-negative removal works
}

TEST_CASE("full simulation approaches the averaged equilibrium as P shrinks") {
    double prev_gap = 1e9;
    for (double period : {4.0, 2.0, 1.0, 0.5}) {
        const double mean = steady_period_mean(period, kDutyRef, 0.3);
        const double gap = std::abs(mean - 0.9);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap / 0.9 < 0.05);
}

TEST_SUITE_END();
