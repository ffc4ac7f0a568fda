#include "psnf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "psnf/io.hpp"

namespace psnf {

namespace {

// Linear interpolation of B on the segment [times[i], times[i+1]].
double interp_biomass(const Trajectory& traj, std::size_t i, double x) {
    const double t0 = traj.times[i];
    const double t1 = traj.times[i + 1];
    if (x == t0) return traj.states[i].b;
    if (x == t1) return traj.states[i + 1].b;
    const double w = (x - t0) / (t1 - t0);
    return traj.states[i].b + w * (traj.states[i + 1].b - traj.states[i].b);
}

}  // namespace

double integrate_biomass(const Trajectory& traj, double a, double b) {
    if (traj.size() < 2) throw std::out_of_range("trajectory has fewer than two samples");
    const double lo = traj.times.front();
    const double hi = traj.times.back();
    const double tol = 1e-9 * std::max(1.0, hi - lo);
    if (a < lo - tol || b > hi + tol || a > b + tol) {
        throw std::out_of_range("integration window outside trajectory span");
    }
    a = std::clamp(a, lo, hi);
    b = std::clamp(b, lo, hi);
    if (b <= a) return 0.0;

    const auto begin = traj.times.begin();
    const std::size_t ia = std::upper_bound(begin, traj.times.end(), a) - begin;
    const std::size_t ib = std::lower_bound(begin, traj.times.end(), b) - begin;

    if (ia > ib || ia == traj.size()) {  // both endpoints inside one gap
        const std::size_t seg = std::min(ia, traj.size() - 1) - 1;
        return 0.5 * (interp_biomass(traj, seg, a) + interp_biomass(traj, seg, b)) * (b - a);
    }
    if (ia == ib) {
        return 0.5 * (interp_biomass(traj, ia - 1, a) + interp_biomass(traj, ia - 1, b)) *
               (b - a);
    }

    double sum = 0.5 * (interp_biomass(traj, ia - 1, a) + traj.states[ia].b) *
                 (traj.times[ia] - a);
    for (std::size_t i = ia; i + 1 < ib; ++i) {
        sum += 0.5 * (traj.states[i].b + traj.states[i + 1].b) *
               (traj.times[i + 1] - traj.times[i]);
    }
    if (b > traj.times[ib - 1]) {
        const double fb = (ib < traj.size()) ? interp_biomass(traj, ib - 1, b)
                                             : traj.states.back().b;
        sum += 0.5 * (traj.states[ib - 1].b + fb) * (b - traj.times[ib - 1]);
    }
    return sum;
}

double period_mean_biomass(const Trajectory& traj, double window_start,
                           double window_end) {
    if (!(traj.period > 0.0)) throw std::invalid_argument("trajectory has no period");
    const double len = window_end - window_start;
    if (std::abs(len - traj.period) > 1e-9 * traj.period) {
        throw std::invalid_argument("window length must equal one period");
    }
    return integrate_biomass(traj, window_start, window_end) / traj.period;
}

double moving_average(const Trajectory& traj, double t) {
    if (!(traj.period > 0.0)) throw std::invalid_argument("trajectory has no period");
    if (t < traj.period - 1e-9 * traj.period) {
        throw std::out_of_range("moving average undefined before one full period");
    }
    return period_mean_biomass(traj, t - traj.period, t);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "time,B,T,u\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]) << ',' << format_double(traj.states[i].b)
            << ',' << format_double(traj.states[i].t) << ','
            << format_double(traj.inputs[i]) << '\n';
    }
}

}  // namespace psnf
