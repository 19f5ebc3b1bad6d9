#pragma once

#include <cmath>
#include <vector>

#include "basinlab/landscape.hpp"
#include "basinlab/rng.hpp"

namespace basinlab {

/// Positions beyond this magnitude abort a trial as diverged.
inline constexpr double kDivergenceBound = 1e6;

/// Default |derivative| threshold treated as converged in flow mode.
inline constexpr double kFlowGradTol = 1e-8;

struct TrialOutcome {
    double position = 0.0;
    int steps = 0;
    int well = kEscaped;
    std::vector<double> trajectory;  // filled only when recording; includes p0
};

/// One noisy descent update: p - tau * l'(p) - n with n a mean-zero kick
/// of amplitude eps, uniform on [-eps, eps]. The kick is not scaled by tau.
inline double jitter_step(const Landscape& l, double p, double tau, double eps, RngStream& s) {
    return p - tau * l.deriv(p) - s.kick(eps);
}

namespace detail {

inline bool diverged(double p) {
    return !std::isfinite(p) || std::fabs(p) > kDivergenceBound;
}

}  // namespace detail

/// Run exactly max_steps jitter updates (no early stopping; with persistent
/// noise there is nothing to converge to) and classify the final position.
/// Mid-run excursions outside the interval do not disqualify a trial; only
/// the terminal position is judged. Non-finite or runaway positions abort
/// the trial immediately as escaped.
inline TrialOutcome run_trajectory(const Landscape& l, const WellCatalog& cat, double p0,
                                   double tau, double eps, int max_steps, RngStream& s,
                                   bool record = false) {
    TrialOutcome out;
    double p = p0;
    if (record) out.trajectory.push_back(p);
    int t = 0;
    while (t < max_steps) {
        p = jitter_step(l, p, tau, eps, s);
        ++t;
        if (detail::diverged(p)) break;
        if (record) out.trajectory.push_back(p);
    }
    out.position = p;
    out.steps = t;
    out.well = locate_basin(cat, p);
    return out;
}

/// Gradient flow approximated by small-step noiseless descent, stopping
/// early once |l'(p)| < grad_tol.
inline TrialOutcome gradient_flow(const Landscape& l, const WellCatalog& cat, double p0,
                                  double flow_tau = 0.01, double grad_tol = kFlowGradTol,
                                  int max_steps = 1000, bool record = false) {
    TrialOutcome out;
    double p = p0;
    if (record) out.trajectory.push_back(p);
    int t = 0;
    while (t < max_steps) {
        double grad = l.deriv(p);
        if (std::fabs(grad) < grad_tol) break;
        p -= flow_tau * grad;
        ++t;
        if (detail::diverged(p)) break;
        if (record) out.trajectory.push_back(p);
    }
    out.position = p;
    out.steps = t;
    out.well = locate_basin(cat, p);
    return out;
}

}  // namespace basinlab
