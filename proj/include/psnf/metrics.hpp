#pragma once

#include <optional>
#include <vector>

#include "psnf/trajectory.hpp"

namespace psnf {

/// |mean of B over the last five periods - b_ref| / b_ref * 100.
/// Requires n_periods >= 5 and a trajectory spanning [.., n_periods * P].
double steady_state_error_percent(const Trajectory& traj, double b_ref,
                                  int n_periods);

/// Number of periods after which the moving average enters the relative
/// band around b_ref and never leaves it again (over the sampled points).
/// Empty when it is still outside at the final sample.
std::optional<int> settling_periods(const Trajectory& traj, double b_ref,
                                    double band = 0.10);

/// Largest applied duty-cycle. Throws on an empty history.
double max_duty(const std::vector<double>& duty_history);

/// Integral of the squared relative moving-average error over [t0, tf].
double ise(const Trajectory& traj, double b_ref, double t0, double tf);

/// Integral of time * |relative moving-average error| over [t0, tf].
double itae(const Trajectory& traj, double b_ref, double t0, double tf);

/// Metrics bundle for one closed-loop run.
struct RunReport {
    double e_r_percent = 0.0;
    std::optional<int> settling_periods;
    double d_max = 0.0;
    double ise = 0.0;
    double itae = 0.0;
    std::vector<double> duty_history;   ///< duty applied in each period
    std::vector<double> error_history;  ///< error that produced each duty (0 for the first)
    State final_state;
    long clamp_count = 0;
};

}  // namespace psnf
