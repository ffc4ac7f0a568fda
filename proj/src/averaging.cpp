#include "psnf/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psnf {

AveragedDerivative averaged_vector_field(const PlantParams& p, double gamma,
                                         double duty, const AveragedState& avg) {
    if (duty < 0.0 || duty > 1.0) throw std::invalid_argument("duty outside [0, 1]");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    const double a = p.alpha();
    const double b = p.beta();
    const double kap = p.kappa();
    const double eps = avg.epsilon;
    const double bb = avg.b_av;
    const double tt = avg.t_av;
    return AveragedDerivative{
        eps * (bb * (1.0 - bb) - a * bb - a * b * bb * tt),
        eps * (kap * bb + b * kap * bb * tt - kap * tt - gamma * duty * tt),
    };
}

double averaged_equilibrium_from_eta(const PlantParams& p, double eta) {
    const double a = p.alpha();
    const double b = p.beta();
    const double w = b - 1.0 - eta;
    return (b + 1.0 + eta - std::sqrt(w * w + 4.0 * a * b * (1.0 + eta))) / (2.0 * b);
}

double averaged_equilibrium(const PlantParams& p, double gamma, double duty) {
    if (duty < 0.0 || duty > 1.0) throw std::invalid_argument("duty outside [0, 1]");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    return averaged_equilibrium_from_eta(p, gamma * duty / p.kappa());
}

double averaged_toxin_at(const PlantParams& p, double eta, double b_av) {
    return b_av / (1.0 + eta - p.beta() * b_av);
}

ApproxEquilibrium approx_equilibrium(const PlantParams& p, double gamma, double duty) {
    if (duty < 0.0 || duty > 1.0) throw std::invalid_argument("duty outside [0, 1]");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    const double eta = gamma * duty / p.kappa();
    const double b = p.beta();
    return ApproxEquilibrium{(1.0 + eta) / b, eta < b - 1.0};
}

namespace {

// Monotone bisection of averaged_equilibrium_from_eta on eta in [0, 1e3];
// fallback for targets where the algebraic branch condition fails.
double bisect_eta(const PlantParams& p, double target) {
    double lo = 0.0, hi = 1e3;
    if (averaged_equilibrium_from_eta(p, hi) < target) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (averaged_equilibrium_from_eta(p, mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FeedforwardResult invert_feedforward(const PlantParams& p, double gamma,
                                     double b_ref_av) {
    if (!(gamma > 0.0)) throw std::invalid_argument("feedforward needs gamma > 0");
    if (!(b_ref_av < 1.0)) {
        throw std::invalid_argument("target average biomass must be below 1 (dimensionless)");
    }
    const double a = p.alpha();
    const double b = p.beta();
    const double uncontrolled = averaged_equilibrium_from_eta(p, 0.0);
    if (b_ref_av < uncontrolled - 1e-6) {
        throw std::invalid_argument(
            "target below the uncontrolled equilibrium; no removal schedule can lower biomass");
    }

    const double y = b_ref_av;
    const double aa = b + 1.0 - 2.0 * b * y;
    const double num = (b - 1.0) * (b - 1.0) + 4.0 * a * b - aa * aa;
    const double den = 2.0 * aa + 2.0 * (b - 1.0) - 4.0 * a * b;
    double eta = num / den;

    // Squaring is only valid when the un-squared root stays non-negative.
    if (!(std::isfinite(eta)) || aa + eta < 0.0) {
        eta = bisect_eta(p, y);
    }
    const bool at_boundary = eta <= 0.0;  // target is the uncontrolled value
    if (at_boundary) eta = 0.0;

    if (!at_boundary && std::abs(averaged_equilibrium_from_eta(p, eta) - y) > 1e-9) {
        eta = bisect_eta(p, y);  // algebraic branch missed the target
    }

    FeedforwardResult res;
    res.eta = eta;
    res.duty = p.kappa() * eta / gamma;
    if (res.duty > 1.0) {
        res.duty = 1.0;
        res.saturated = true;
    }
    return res;
}

FeedforwardCurve::FeedforwardCurve(std::vector<double> duties,
                                   std::vector<double> values)
    : duties_(std::move(duties)), values_(std::move(values)) {
    if (duties_.size() != values_.size() || duties_.size() < 2) {
        throw std::invalid_argument("feedforward curve needs at least two points");
    }
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        if (values_[i + 1] < values_[i]) {
            throw std::invalid_argument("feedforward curve must be non-decreasing");
        }
    }
    for (double v : values_) {
        if (v < 0.0 || v > 1.0) {
            throw std::invalid_argument("feedforward curve values must lie in [0, 1]");
        }
    }
}

double FeedforwardCurve::lookup(double b_ref_av) const {
    if (b_ref_av <= values_.front()) return duties_.front();
    if (b_ref_av >= values_.back()) return duties_.back();
    const auto it = std::lower_bound(values_.begin(), values_.end(), b_ref_av);
    const std::size_t hi = it - values_.begin();
    const std::size_t lo = hi - 1;
    const double dv = values_[hi] - values_[lo];
    if (dv <= 0.0) return duties_[lo];
    const double w = (b_ref_av - values_[lo]) / dv;
    return duties_[lo] + w * (duties_[hi] - duties_[lo]);
}

double FeedforwardCurve::value(double duty) const {
    if (duty <= duties_.front()) return values_.front();
    if (duty >= duties_.back()) return values_.back();
    const auto it = std::lower_bound(duties_.begin(), duties_.end(), duty);
    const std::size_t hi = it - duties_.begin();
    const std::size_t lo = hi - 1;
    const double w = (duty - duties_[lo]) / (duties_[hi] - duties_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

FeedforwardCurve tabulate_feedforward_curve(const PlantParams& p, double gamma,
                                            int n_points) {
    if (n_points < 2) throw std::invalid_argument("curve needs at least two points");
    std::vector<double> duties(n_points);
    std::vector<double> values(n_points);
    for (int i = 0; i < n_points; ++i) {
        duties[i] = static_cast<double>(i) / (n_points - 1);
        values[i] = averaged_equilibrium(p, gamma, duties[i]);
    }
    return FeedforwardCurve(std::move(duties), std::move(values));
}

double open_loop_condition(const PlantParams& p, double delta) {
    if (delta < 0.0) throw std::invalid_argument("delta must be non-negative");
    return -delta * p.c * p.s * p.b_max - p.k +
           p.c * p.s * p.b_max * p.b_max * (p.g - p.d) / p.g;
}

}  // namespace psnf
