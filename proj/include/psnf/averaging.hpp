#pragma once

#include <vector>

#include "psnf/model.hpp"

namespace psnf {

/// Period-averaged dimensionless state. epsilon is the pulse period P and
/// tau = t~/P the slow time the averaged model evolves in.
struct AveragedState {
    double b_av = 0.0;  ///< average biomass, in [0, 1]
    double t_av = 0.0;  ///< average toxin, >= 0
    double epsilon = 0.0;
    double tau = 0.0;
};

/// Right-hand side of the averaged model in slow time:
/// d b_av/d tau = eps [ b(1-b) - alpha b - alpha beta b t ]
/// d t_av/d tau = eps [ kappa b + beta kappa b t - kappa t - gamma D t ].
struct AveragedDerivative {
    double db_av = 0.0;
    double dt_av = 0.0;
};
AveragedDerivative averaged_vector_field(const PlantParams& p, double gamma,
                                         double duty, const AveragedState& avg);

/// Dimensionless biomass coordinate of the positive equilibrium of the
/// averaged model, as a function of eta = gamma * duty / kappa.
double averaged_equilibrium_from_eta(const PlantParams& p, double eta);
double averaged_equilibrium(const PlantParams& p, double gamma, double duty);

/// Average toxin at the biomass equilibrium value, t = b / (1 + eta - beta b).
double averaged_toxin_at(const PlantParams& p, double eta, double b_av);

/// Small-alpha closed form (1 + eta)/beta. Only meaningful on the branch
/// eta < beta - 1; `valid` is false outside it.
struct ApproxEquilibrium {
    double b_av = 0.0;
    bool valid = false;
};
ApproxEquilibrium approx_equilibrium(const PlantParams& p, double gamma, double duty);

/// Duty-cycle whose averaged equilibrium equals b_ref_av, by exact algebraic
/// inversion of the equilibrium formula (squaring reduces it to a linear
/// equation in eta). Values the amplitude cannot reach are clamped to 1 and
/// flagged. Targets below the uncontrolled equilibrium are infeasible.
struct FeedforwardResult {
    double duty = 0.0;
    double eta = 0.0;
    bool saturated = false;
};
FeedforwardResult invert_feedforward(const PlantParams& p, double gamma,
                                     double b_ref_av);

/// Monotone piecewise-linear table of (D, B*_av(D)) used as the lookup
/// alternative to the algebraic inversion.
class FeedforwardCurve {
  public:
    FeedforwardCurve(std::vector<double> duties, std::vector<double> values);

    /// Inverse lookup: duty whose equilibrium is b_ref_av, clamped to the
    /// table's range.
    double lookup(double b_ref_av) const;
    /// Forward lookup by interpolation.
    double value(double duty) const;

    const std::vector<double>& duties() const { return duties_; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> duties_;
    std::vector<double> values_;
};

FeedforwardCurve tabulate_feedforward_curve(const PlantParams& p, double gamma,
                                            int n_points);

/// Lower bound on the product (dimensional amplitude gamma g) * duty that
/// keeps the biomass within delta of the ideal value in open loop:
/// -delta c s b_max - k + c s b_max^2 (g - d) / g.
double open_loop_condition(const PlantParams& p, double delta);

}  // namespace psnf
