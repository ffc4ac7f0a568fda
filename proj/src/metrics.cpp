#include "psnf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psnf {

namespace {

// Relative moving-average error at time t.
double e_ma(const Trajectory& traj, double b_ref, double t) {
    return (moving_average(traj, t) - b_ref) / b_ref;
}

// Quadrature nodes for the error integrals: t0, every sample strictly
// inside (t0, tf), and tf.
std::vector<double> error_nodes(const Trajectory& traj, double t0, double tf) {
    if (!(t0 < tf)) throw std::invalid_argument("empty metric window");
    if (t0 < traj.period - 1e-9 * traj.period) {
        throw std::out_of_range("error metrics start no earlier than one period");
    }
    std::vector<double> nodes;
    nodes.push_back(t0);
    for (double t : traj.times) {
        if (t > t0 && t < tf) nodes.push_back(t);
    }
    nodes.push_back(tf);
    return nodes;
}

template <typename F>
double trapezoid_error_integral(const Trajectory& traj, double t0, double tf, F&& f) {
    const auto nodes = error_nodes(traj, t0, tf);
    double sum = 0.0;
    double prev_t = nodes.front();
    double prev_f = f(prev_t);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double cur_f = f(nodes[i]);
        sum += 0.5 * (prev_f + cur_f) * (nodes[i] - prev_t);
        prev_t = nodes[i];
        prev_f = cur_f;
    }
    return sum;
}

}  // namespace

double steady_state_error_percent(const Trajectory& traj, double b_ref,
                                  int n_periods) {
    if (n_periods < 5) throw std::invalid_argument("steady-state error needs at least five periods");
    if (!(b_ref > 0.0)) throw std::invalid_argument("reference biomass must be positive");
    const double tf = n_periods * traj.period;
    const double t0 = (n_periods - 5) * traj.period;
    const double mean = integrate_biomass(traj, t0, tf) / (5.0 * traj.period);
    return std::abs(mean - b_ref) / b_ref * 100.0;
}

std::optional<int> settling_periods(const Trajectory& traj, double b_ref,
                                    double band) {
    if (!(b_ref > 0.0)) throw std::invalid_argument("reference biomass must be positive");
    if (!(band > 0.0)) throw std::invalid_argument("settling band must be positive");
    const double period = traj.period;
    const double threshold = band * b_ref;

    // Samples at which the moving average is defined.
    const auto first = std::lower_bound(traj.times.begin(), traj.times.end(),
                                        period * (1.0 - 1e-9));
    if (first == traj.times.end()) {
        throw std::out_of_range("trajectory shorter than one period");
    }

    double settle_time = *first;
    for (auto it = traj.times.end(); it-- != first;) {
        if (std::abs(moving_average(traj, *it) - b_ref) > threshold) {
            if (it + 1 == traj.times.end()) return std::nullopt;  // still outside at the end
            settle_time = *(it + 1);
            break;
        }
    }
    const int periods = static_cast<int>(std::ceil(settle_time / period - 1e-9));
    return std::max(1, periods);
}

double max_duty(const std::vector<double>& duty_history) {
    if (duty_history.empty()) throw std::invalid_argument("empty duty history");
    return *std::max_element(duty_history.begin(), duty_history.end());
}

double ise(const Trajectory& traj, double b_ref, double t0, double tf) {
    return trapezoid_error_integral(traj, t0, tf, [&](double t) {
        const double e = e_ma(traj, b_ref, t);
        return e * e;
    });
}

double itae(const Trajectory& traj, double b_ref, double t0, double tf) {
    return trapezoid_error_integral(traj, t0, tf, [&](double t) {
        return t * std::abs(e_ma(traj, b_ref, t));
    });
}

}  // namespace psnf
