#pragma once

#include <cstdint>
#include <functional>

#include "psnf/ga.hpp"
#include "psnf/model.hpp"

namespace psnf {

/// PI correction on top of the feedforward duty-cycle.
struct PiConfig {
    double kp = 0.1;
    double ki = 26.0;
    double d_ref = 0.0;
    double quantization_step = 0.01;  ///< 0 disables rounding
    bool anti_windup = true;          ///< conditional integration

    void validate() const;
};

/// Mutable per-run controller state. The initial applied duty, before any
/// error sample, is d_ref itself.
struct PiState {
    double error_sum = 0.0;
    double last_duty = 0.0;
};

/// One discrete PI update from the latest period-mean error. Integration is
/// frozen while the output sits on a bound and the error keeps pushing into
/// it; the output is clamped to [0, 1] and optionally rounded to the duty
/// quantum.
double pi_step(const PiConfig& cfg, PiState& st, double error);

/// Constant-duty baseline; the returned policy ignores the period index.
std::function<double(int)> open_loop_policy(double duty_const);

/// Receding-horizon controller settings. The prediction model is the
/// nominal plant regardless of what the true plant does.
struct MpcConfig {
    int horizon = 5;  ///< periods in the prediction window
    GaConfig ga;
    double b_ref_av = 0.9;  ///< dimensionless biomass target
    PlantParams prediction_params = PlantParams::nominal();
    PulseWave wave{2.0, 0.0, 0.3};
    double h = 0.005;  ///< prediction integration step, months

    void validate() const;
};

/// Optimize the duty sequence over the horizon from the measured state and
/// return the first element. The cost is the sum over the horizon of the
/// per-period relative biomass errors of the predicted response. Equal
/// seeds give bit-identical results.
double mpc_step(const MpcConfig& cfg, const State& measured, double previous_duty,
                std::uint64_t rng_seed, EvolveResult* detail = nullptr);

}  // namespace psnf
