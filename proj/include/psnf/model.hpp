#pragma once

#include <array>
#include <stdexcept>

namespace psnf {

/// Rate constants of the biomass/toxin plant.
///
/// Units: g, d, k in 1/month; b_max in kg/cm^2; s in cm^2/(kg month);
/// c dimensionless. Construct through make() or nominal() so the
/// positivity and g > d invariants are checked once, up front.
struct PlantParams {
    double g;      ///< biomass growth rate
    double b_max;  ///< carrying capacity
    double d;      ///< natural death rate
    double s;      ///< toxin sensitivity
    double c;      ///< toxin production rate
    double k;      ///< toxin decay rate

    static PlantParams make(double g, double b_max, double d, double s,
                            double c, double k);
    static PlantParams nominal();

    /// Throws std::invalid_argument unless all rates are positive and g > d.
    void validate() const;

    // Dimensionless groups.
    double alpha() const { return d / g; }
    double beta() const { return c * s * b_max / k; }
    double kappa() const { return k / g; }
    /// Discriminant of the coexistence equilibrium, sqrt((beta-1)^2 + 4 alpha beta).
    double discriminant() const;
};

/// Surface densities (kg/cm^2) of biomass and toxin.
struct State {
    double b = 0.0;
    double t = 0.0;
};

/// Rectangular periodic removal schedule. The on-phase occupies
/// [m P, m P + duty P) for every integer m >= 0 (pulse starts high).
///
/// gamma is the removal amplitude expressed in units of the growth rate g:
/// while the pulse is on, the toxin loses mass at rate gamma * g (1/month).
struct PulseWave {
    double period = 2.0;  ///< months
    double duty = 0.0;    ///< in [0, 1]
    double gamma = 0.3;   ///< removal amplitude, units of g

    static PulseWave make(double period, double duty, double gamma);
    void validate() const;
};

/// 0/1 value of the pulse at `time` (months, >= 0). duty 0 is always off,
/// duty 1 always on.
double pulse_value(const PulseWave& wave, double time);

/// Time derivative of the controlled plant. `removal_flux` is the realized
/// toxin removal u (kg/cm^2/month), subtracted from the toxin balance.
struct Derivative {
    double db = 0.0;
    double dt = 0.0;
};
Derivative vector_field(const PlantParams& p, const State& x, double removal_flux);

/// Jacobian of the uncontrolled plant at `x` (row-major 2x2).
std::array<std::array<double, 2>, 2> jacobian(const PlantParams& p, const State& x);

struct Equilibria {
    State origin;                ///< (0, 0)
    State coexistence;           ///< dimensional (B*, T*)
    State coexistence_scaled;    ///< dimensionless (B~*, T~*)
};

/// Both admissible equilibria of the uncontrolled plant. The coexistence
/// point is evaluated in dimensionless form first, then scaled back.
Equilibria equilibria(const PlantParams& p);

/// Biomass that would be sustained with the toxin fully removed,
/// (b_max/g)(g - d).
double ideal_biomass(const PlantParams& p);

/// B~ = B/b_max, T~ = k T/(c d b_max).
State nondimensionalize(const PlantParams& p, const State& x);
State dimensionalize(const PlantParams& p, const State& scaled);

}  // namespace psnf
