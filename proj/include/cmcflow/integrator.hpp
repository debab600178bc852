// Implicit-midpoint integration of the reduced flow with augmented quadrature
// for the immersion coordinates and first-integral drift monitoring.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmcflow/phase.hpp"

namespace cmcflow {

/// Raised when the implicit step fails to converge; carries the last residual
/// norm and, when known, the time at which the step was attempted.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& message, double residual, double time)
        : std::runtime_error(message), residual_norm(residual), failure_time(time) {}
    double residual_norm;
    double failure_time;
};

struct IntegratorConfig {
    double dt = 1e-3;
    double t0 = 0.0;
    double t1 = 10.0;
    double newton_tol = 1e-13;
    int newton_max_iter = 32;
    int record_stride = 1;

    void validate() const;
};

/**
 * Time-stamped samples of an integrated orbit. `quad` carries the accumulated
 * time-leg integrals of the three immersion coordinates along x = 0, advanced
 * with the same midpoint rule as the state so surface coordinates inherit the
 * integrator's accuracy. `drift` records |H0(t) - H0(0)| and |M(t) - M(0)|.
 */
struct Trajectory {
    ModelParams params;
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<std::array<double, 3>> quad;
    std::vector<std::array<double, 2>> drift;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double max_drift_energy() const;
    double max_drift_angular() const;
};

/// Time-leg integrands of the three immersion coordinates evaluated along
/// x = 0 (valid for the closed-form immersion at lambda = H = 1/2).
std::array<double, 3> immersion_time_integrand(const PhaseState& y);

/// One step of the implicit midpoint rule: solves
///   y1 = y0 + dt f((y0 + y1)/2)
/// by Newton iteration with the analytic Jacobian, falling back to damped
/// fixed-point iteration if the Newton matrix becomes singular.
PhaseState step_implicit_midpoint(const PhaseState& state, const ModelParams& params,
                                  double dt, const IntegratorConfig& cfg);

/// Integrates over cfg.t_span recording every record_stride-th sample (the
/// initial and final samples are always recorded).
Trajectory integrate(const PhaseState& state0, const ModelParams& params,
                     const IntegratorConfig& cfg);

/**
 * Least T > 0 at which the orbit returns to within `tol` of its initial state
 * modulo the simultaneous rotation. Returns 0.0 for a stationary trajectory
 * (the distinguished equilibrium value) and nullopt when no return occurs
 * within the sampled span. Requires at least 3 samples.
 */
std::optional<double> detect_period(const Trajectory& traj, double tol);

}  // namespace cmcflow
