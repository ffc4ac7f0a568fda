#include "psnf/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "psnf/io.hpp"

namespace psnf {

namespace {

// Pulse switching instants strictly inside (t0, t1). Returned sorted.
// A duty of 0 or 1 has no discontinuities.
std::vector<double> switch_instants(double t0, double t1, double period, double duty) {
    std::vector<double> out;
    if (duty <= 0.0 || duty >= 1.0) return out;
    for (long m = static_cast<long>(std::floor(t0 / period)) - 1;; ++m) {
        const double on = static_cast<double>(m) * period;
        if (on >= t1) break;
        if (on > t0) out.push_back(on);
        const double off = (static_cast<double>(m) + duty) * period;
        if (off > t0 && off < t1) out.push_back(off);
    }
    return out;
}

// Sample grid: t0, the base points t0 + j h below t1, t1 itself, plus the
// switch instants. Base points that collide with a switch (within eps) are
// replaced by the exact switch value.
std::vector<double> sample_grid(double t0, double t1, double h,
                                const std::vector<double>& switches) {
    const double eps = h * 1e-9;
    std::vector<double> base;
    base.push_back(t0);
    for (long j = 1;; ++j) {
        const double tj = t0 + static_cast<double>(j) * h;
        if (tj >= t1 - eps) break;
        base.push_back(tj);
    }
    base.push_back(t1);

    std::vector<double> grid;
    grid.reserve(base.size() + switches.size());
    std::size_t ib = 0, is = 0;
    while (ib < base.size() || is < switches.size()) {
        double next;
        if (is >= switches.size()) {
            next = base[ib++];
        } else if (ib >= base.size()) {
            next = switches[is++];
        } else if (std::abs(base[ib] - switches[is]) <= eps) {
            next = switches[is++];  // keep the exact switch time
            ++ib;
        } else if (base[ib] < switches[is]) {
            next = base[ib++];
        } else {
            next = switches[is++];
        }
        if (!grid.empty() && next - grid.back() <= eps) continue;
        grid.push_back(next);
    }
    return grid;
}

inline State rk4_step(const PlantParams& p, const State& s, double removal_rate,
                      double dt) {
    const auto f = [&](const State& x) {
        return vector_field(p, x, removal_rate * x.t);
    };
    const Derivative k1 = f(s);
    const Derivative k2 = f(State{s.b + 0.5 * dt * k1.db, s.t + 0.5 * dt * k1.dt});
    const Derivative k3 = f(State{s.b + 0.5 * dt * k2.db, s.t + 0.5 * dt * k2.dt});
    const Derivative k4 = f(State{s.b + dt * k3.db, s.t + dt * k3.dt});
    return State{
        s.b + dt / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db),
        s.t + dt / 6.0 * (k1.dt + 2.0 * k2.dt + 2.0 * k3.dt + k4.dt),
    };
}

// Clamp roundoff negatives, reject anything worse.
void guard_state(State& s, double time, long& clamp_count) {
    if (!std::isfinite(s.b) || !std::isfinite(s.t)) {
        throw IntegrationError(
            "integration diverged (non-finite state) at t = " + format_double(time),
            time);
    }
    for (double* v : {&s.b, &s.t}) {
        if (*v < 0.0) {
            if (*v < -1e-12) {
                throw IntegrationError(
                    "integration produced a negative state at t = " + format_double(time),
                    time);
            }
            *v = 0.0;
            ++clamp_count;
        }
    }
}

// March the state across the grid, invoking on_sample(time, state) for every
// grid point including t0. The removal rate within each interval is decided
// at the interval midpoint, which by construction never sits on a switch.
template <typename OnSample>
State march(const PlantParams& params, const PulseWave& wave,
            const std::vector<double>& grid, State s, long& clamp_count,
            OnSample&& on_sample) {
    on_sample(grid.front(), s);
    const double amplitude = wave.gamma * params.g;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double ta = grid[i];
        const double tb = grid[i + 1];
        const double rate = amplitude * pulse_value(wave, 0.5 * (ta + tb));
        s = rk4_step(params, s, rate, tb - ta);
        guard_state(s, tb, clamp_count);
        on_sample(tb, s);
    }
    return s;
}

PulseWave effective_wave(const PulseWave& wave, double duty_override) {
    if (duty_override < 0.0 || duty_override > 1.0) {
        throw std::invalid_argument("duty override outside [0, 1]");
    }
    PulseWave eff = wave;
    eff.duty = duty_override;
    return eff;
}

void check_span(double t0, double t1, double h) {
    if (!(t0 < t1)) throw std::invalid_argument("segment must have t0 < t1");
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
}

}  // namespace

Trajectory integrate_segment(const PlantParams& params, const PulseWave& wave,
                             double duty_override, const State& start,
                             double t0, double t1, double h) {
    check_span(t0, t1, h);
    const PulseWave eff = effective_wave(wave, duty_override);
    const auto switches = switch_instants(t0, t1, eff.period, eff.duty);
    const auto grid = sample_grid(t0, t1, h, switches);

    Trajectory traj;
    traj.period = eff.period;
    traj.times.reserve(grid.size());
    traj.states.reserve(grid.size());
    traj.inputs.reserve(grid.size());

    const double amplitude = eff.gamma * params.g;
    march(params, eff, grid, start, traj.clamp_count, [&](double t, const State& s) {
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.inputs.push_back(amplitude * pulse_value(eff, t) * s.t);
    });
    return traj;
}

PeriodMeanResult simulate_period_mean(const PlantParams& params,
                                      const PulseWave& wave, double duty_override,
                                      const State& start, double t0, double t1,
                                      double h) {
    check_span(t0, t1, h);
    const PulseWave eff = effective_wave(wave, duty_override);
    const auto switches = switch_instants(t0, t1, eff.period, eff.duty);
    const auto grid = sample_grid(t0, t1, h, switches);

    PeriodMeanResult res;
    double integral = 0.0;
    double prev_t = 0.0, prev_b = 0.0;
    bool have_prev = false;
    res.end_state = march(params, eff, grid, start, res.clamp_count,
                          [&](double t, const State& s) {
                              if (have_prev) {
                                  integral += 0.5 * (prev_b + s.b) * (t - prev_t);
                              }
                              prev_t = t;
                              prev_b = s.b;
                              have_prev = true;
                          });
    res.mean_biomass = integral / (t1 - t0);
    return res;
}

}  // namespace psnf
