#include "psnf/model.hpp"

#include <cmath>

namespace psnf {

PlantParams PlantParams::make(double g, double b_max, double d, double s,
                              double c, double k) {
    PlantParams p{g, b_max, d, s, c, k};
    p.validate();
    return p;
}

PlantParams PlantParams::nominal() {
    return PlantParams{0.5, 1.0, 0.015, 0.15, 0.5, 0.05};
}

void PlantParams::validate() const {
    if (!(g > 0.0) || !(b_max > 0.0) || !(d > 0.0) || !(s > 0.0) ||
        !(c > 0.0) || !(k > 0.0)) {
        throw std::invalid_argument("plant parameters must be strictly positive");
    }
    if (!(g > d)) {
        throw std::invalid_argument(
            "growth rate must exceed death rate (no positive equilibrium otherwise)");
    }
}

double PlantParams::discriminant() const {
    const double b = beta();
    return std::sqrt((b - 1.0) * (b - 1.0) + 4.0 * alpha() * b);
}

PulseWave PulseWave::make(double period, double duty, double gamma) {
    PulseWave w{period, duty, gamma};
    if (w.duty < 0.0) w.duty = 0.0;
    if (w.duty > 1.0) w.duty = 1.0;
    w.validate();
    return w;
}

void PulseWave::validate() const {
    if (!(period > 0.0)) throw std::invalid_argument("pulse period must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("pulse amplitude must be non-negative");
    if (duty < 0.0 || duty > 1.0) throw std::invalid_argument("duty-cycle outside [0, 1]");
}

double pulse_value(const PulseWave& wave, double time) {
    if (wave.duty <= 0.0) return 0.0;
    if (wave.duty >= 1.0) return 1.0;
    const double phase = std::fmod(time, wave.period);
    return phase < wave.duty * wave.period ? 1.0 : 0.0;
}

Derivative vector_field(const PlantParams& p, const State& x, double removal_flux) {
    const double decay = p.d * x.b + p.s * x.b * x.t;
    return Derivative{
        p.g * x.b * (1.0 - x.b / p.b_max) - decay,
        p.c * decay - p.k * x.t - removal_flux,
    };
}

std::array<std::array<double, 2>, 2> jacobian(const PlantParams& p, const State& x) {
    return {{
        {p.g * (1.0 - 2.0 * x.b / p.b_max) - p.d - p.s * x.t, -p.s * x.b},
        {p.c * (p.d + p.s * x.t), p.c * p.s * x.b - p.k},
    }};
}

Equilibria equilibria(const PlantParams& p) {
    const double a = p.alpha();
    const double b = p.beta();
    const double gam = p.discriminant();
    const double b_scaled = (1.0 + b - gam) / (2.0 * b);
    const double t_scaled = (b - 1.0 - 2.0 * a * b + gam) / (2.0 * a * b * b);
    const State scaled{b_scaled, t_scaled};
    return Equilibria{State{0.0, 0.0}, dimensionalize(p, scaled), scaled};
}

double ideal_biomass(const PlantParams& p) {
    return p.b_max / p.g * (p.g - p.d);
}

State nondimensionalize(const PlantParams& p, const State& x) {
    return State{x.b / p.b_max, p.k * x.t / (p.c * p.d * p.b_max)};
}

State dimensionalize(const PlantParams& p, const State& scaled) {
    return State{scaled.b * p.b_max, scaled.t * p.c * p.d * p.b_max / p.k};
}

}  // namespace psnf
