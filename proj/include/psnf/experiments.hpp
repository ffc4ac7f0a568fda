#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psnf/controllers.hpp"
#include "psnf/metrics.hpp"
#include "psnf/model.hpp"
#include "psnf/rng.hpp"
#include "psnf/trajectory.hpp"

namespace psnf {

enum class ControllerKind { open_loop, pi, mpc };

const char* controller_name(ControllerKind kind);
std::uint64_t controller_id(ControllerKind kind);
std::optional<ControllerKind> controller_from_name(const std::string& name);

/// Everything one closed-loop run needs. The feedforward duty and the MPC
/// prediction always come from `prediction_params` (the model the operator
/// believes in); `params` is the plant actually integrated.
struct RunConfig {
    PlantParams params = PlantParams::nominal();
    PlantParams prediction_params = PlantParams::nominal();
    PulseWave wave{2.0, 0.0, 0.3};
    ControllerKind controller = ControllerKind::pi;
    double open_loop_duty = -1.0;  ///< < 0 means: use the feedforward duty
    PiConfig pi;
    GaConfig ga;
    int mpc_horizon = 5;
    double b_ref_av = 0.9;  ///< dimensionless target
    int n_periods = 20;
    std::optional<State> initial;  ///< default: coexistence equilibrium of params
    double h = 0.005;
    std::uint64_t seed = 1;

    void validate() const;
};

struct RunResult {
    Trajectory trajectory;
    RunReport report;
    double d_ref = 0.0;  ///< feedforward duty used as the first applied duty
};

/// Simulate n_periods of the closed loop: apply the current duty over one
/// period, measure the period mean at the boundary, and ask the controller
/// for the next duty. Propagates IntegrationError on divergence. When
/// ga_trace is given, the per-step GA evolution records are appended to it
/// (MPC runs only).
RunResult run_closed_loop(const RunConfig& cfg,
                          std::vector<EvolveResult>* ga_trace = nullptr);

struct SweepConfig {
    // PI tuning grid.
    std::vector<double> kp_grid;
    std::vector<double> ki_grid;
    bool exclude_unsettled = true;  ///< drop pairs with P_s > 7

    // Robustness sweep.
    std::vector<double> cv_values;
    int runs_per_cv = 50;
    std::vector<ControllerKind> controllers{ControllerKind::open_loop,
                                            ControllerKind::pi, ControllerKind::mpc};

    int workers = 0;  ///< 0: PSNF_WORKERS env var, else hardware threads
};

struct TuneRow {
    double kp = 0.0;
    double ki = 0.0;
    bool excluded = false;
    std::string reason;  ///< "", "saturation", "settling", "diverged"
    double e_r_percent = 0.0;
    std::optional<int> settling_periods;
    double d_max = 0.0;
    double ise = 0.0;
    double itae = 0.0;
};

/// One PI run per (kp, ki) pair, row order: kp major, ki minor. Pairs whose
/// duty saturates (>= 0.995 or <= 0.005 at any period) or that settle too
/// slowly are flagged excluded with a reason; runs that diverge likewise.
std::vector<TuneRow> tune_pi_grid(const RunConfig& base, const SweepConfig& sweep);

struct RobustnessRow {
    ControllerKind controller = ControllerKind::open_loop;
    double cv = 0.0;
    int run = 0;
    std::uint64_t seed = 0;
    double e_r_percent = 0.0;
    std::optional<int> settling_periods;
    double ise = 0.0;
    double itae = 0.0;
    bool diverged = false;
    PlantParams drawn = PlantParams::nominal();  ///< perturbed plant of this run
    long redraws = 0;
};

struct AggregateCell {
    ControllerKind controller = ControllerKind::open_loop;
    double cv = 0.0;
    int n = 0;            ///< runs contributing to the statistics
    int diverged = 0;
    int not_settled = 0;  ///< settling recorded as n_periods for these
    long redraws = 0;
    double mean_e_r = 0.0, std_e_r = 0.0;
    double mean_settling = 0.0, std_settling = 0.0;
    double mean_ise = 0.0, std_ise = 0.0;
    double mean_itae = 0.0, std_itae = 0.0;
};

struct RobustnessResult {
    /// Ordered by (cv index, run, controller position in SweepConfig).
    std::vector<RobustnessRow> rows;
    /// Ordered by (controller position, cv index).
    std::vector<AggregateCell> aggregates;
};

/// Monte Carlo robustness protocol: per (cv, run), draw one perturbed
/// parameter set (all six independently normal around nominal with
/// sd = cv * nominal; the whole set is redrawn while any value is
/// non-positive or g <= d) and run every controller on that same plant from
/// its coexistence equilibrium. Feedforward and prediction keep the nominal
/// model. Streams are derived from (master seed, cv index, run index,
/// controller), so results do not depend on worker scheduling.
RobustnessResult robustness_sweep(const RunConfig& base, const SweepConfig& sweep);

/// Sample-stddev aggregation of rows, recomputed two-pass from the stored
/// per-run values. Divergent runs are excluded and counted; runs that never
/// settle contribute n_periods to the settling statistics.
std::vector<AggregateCell> aggregate_rows(const std::vector<RobustnessRow>& rows,
                                          const SweepConfig& sweep, int n_periods);

PlantParams draw_params(const PlantParams& nominal, double cv, Rng& rng,
                        long& redraws);

/// Worker count actually used: PSNF_WORKERS env var wins, then `requested`,
/// then the hardware concurrency.
int resolve_workers(int requested);

/// Run body(0..n-1) on `workers` threads; any exception is rethrown on the
/// caller after all threads join.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);

// CSV schemas (pinned): see the corresponding write_* implementation.
void write_tuning_csv(std::ostream& out, const std::vector<TuneRow>& rows);
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows,
                          int n_periods);
void write_duty_csv(std::ostream& out, const RunReport& report);
void write_curve_csv(std::ostream& out, const std::vector<double>& duties,
                     const std::vector<double>& values);

}  // namespace psnf
