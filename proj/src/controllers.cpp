#include "psnf/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "psnf/integrate.hpp"

namespace psnf {

void PiConfig::validate() const {
    if (kp < 0.0 || ki < 0.0) throw std::invalid_argument("PI gains must be non-negative");
    if (d_ref < 0.0 || d_ref > 1.0) throw std::invalid_argument("feedforward duty outside [0, 1]");
    if (quantization_step < 0.0 || quantization_step > 0.1) {
        throw std::invalid_argument("duty quantum must lie in [0, 0.1]");
    }
}

double pi_step(const PiConfig& cfg, PiState& st, double error) {
    if (!std::isfinite(error)) throw std::invalid_argument("PI error must be finite");
    const bool sat_high = st.last_duty >= 1.0;
    const bool sat_low = st.last_duty <= 0.0;
    const bool freeze =
        cfg.anti_windup && ((sat_high && error > 0.0) || (sat_low && error < 0.0));
    if (!freeze) st.error_sum += error;

    double duty = cfg.d_ref + cfg.kp * error + cfg.ki * st.error_sum;
    duty = std::clamp(duty, 0.0, 1.0);
    if (cfg.quantization_step > 0.0) {
        duty = std::clamp(std::round(duty / cfg.quantization_step) * cfg.quantization_step,
                          0.0, 1.0);
    }
    st.last_duty = duty;
    return duty;
}

std::function<double(int)> open_loop_policy(double duty_const) {
    if (duty_const < 0.0 || duty_const > 1.0) {
        throw std::invalid_argument("constant duty outside [0, 1]");
    }
    return [duty_const](int) { return duty_const; };
}

void MpcConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("prediction horizon must cover at least one period");
    ga.validate();
    prediction_params.validate();
    wave.validate();
    if (!(h > 0.0)) throw std::invalid_argument("prediction step must be positive");
    if (!(b_ref_av > 0.0) || b_ref_av > 1.0) {
        throw std::invalid_argument("biomass target must lie in (0, 1]");
    }
}

double mpc_step(const MpcConfig& cfg, const State& measured, double previous_duty,
                std::uint64_t rng_seed, EvolveResult* detail) {
    cfg.validate();
    const double period = cfg.wave.period;
    const double b_ref = cfg.b_ref_av * cfg.prediction_params.b_max;

    const Objective cost = [&](const std::vector<double>& genes) {
        State s = measured;
        double total = 0.0;
        for (int j = 0; j < cfg.horizon; ++j) {
            const auto r = simulate_period_mean(cfg.prediction_params, cfg.wave,
                                                genes[static_cast<std::size_t>(j)], s,
                                                j * period, (j + 1) * period, cfg.h);
            total += std::abs(r.mean_biomass - b_ref) / b_ref;
            s = r.end_state;
        }
        return total;
    };

    EvolveResult res = evolve(cfg.ga, cfg.horizon, cost, previous_duty, rng_seed);
    const double first = std::clamp(res.best.genes[0], 0.0, 1.0);
    if (detail != nullptr) *detail = std::move(res);
    return first;
}

}  // namespace psnf
