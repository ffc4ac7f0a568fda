#pragma once

#include <stdexcept>
#include <string>

#include "psnf/model.hpp"
#include "psnf/trajectory.hpp"

namespace psnf {

/// Raised when the state stops being finite (or goes more than roundoff
/// negative); carries the time at which integration broke down.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

  private:
    double time_;
};

/// Classic fixed-step RK4 over [t0, t1] with the pulse-wave removal input.
/// `duty_override` replaces wave.duty for this segment (controllers change
/// the duty per period). Steps are split so that no step straddles a pulse
/// switching instant; there is a sample exactly at every switch inside
/// (t0, t1) and the final sample lands exactly on t1.
///
/// The phase of the pulse is global: the on-phase is [m P, m P + D P) for
/// integer m, regardless of t0.
Trajectory integrate_segment(const PlantParams& params, const PulseWave& wave,
                             double duty_override, const State& start,
                             double t0, double t1, double h);

struct PeriodMeanResult {
    double mean_biomass = 0.0;
    State end_state;
    long clamp_count = 0;
};

/// Same stepper as integrate_segment, but accumulates the trapezoidal mean
/// of B over [t0, t1] on the fly instead of storing samples. Used by the
/// predictive controller where only the mean and the end state matter.
PeriodMeanResult simulate_period_mean(const PlantParams& params,
                                      const PulseWave& wave, double duty_override,
                                      const State& start, double t0, double t1,
                                      double h);

}  // namespace psnf
