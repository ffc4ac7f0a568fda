#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "psnf/model.hpp"

namespace psnf {

/// Sampled solution of the controlled plant over one or more segments.
/// Times are strictly increasing; inputs[i] is the realized removal flux
/// at times[i]. Immutable by convention once filled.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> inputs;
    double period = 0.0;       ///< pulse period the samples belong to (months)
    long clamp_count = 0;      ///< roundoff negatives clamped to zero

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    const State& back_state() const { return states.back(); }
};

/// Integral of B over [a, b] on the piecewise-linear interpolant of the
/// samples. [a, b] must lie inside the sampled span.
double integrate_biomass(const Trajectory& traj, double a, double b);

/// (1/P) * integral of B over [window_start, window_end]; the window length
/// must equal the trajectory period. Throws std::out_of_range when the
/// window leaves the sampled span.
double period_mean_biomass(const Trajectory& traj, double window_start,
                           double window_end);

/// Moving average of B with width one period: period_mean_biomass(t-P, t).
/// Undefined (throws) for t < period.
double moving_average(const Trajectory& traj, double t);

/// CSV export, header `time,B,T,u`, shortest round-trip formatting.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace psnf
