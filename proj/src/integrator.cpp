#include "cmcflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmcflow {

namespace {

double residual_norm(const PhaseState& v) {
    return std::sqrt(v.rho());
}

// Solves the 4x4 system a x = b in place by Gaussian elimination with partial
// pivoting. Returns false on a (near-)singular pivot.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b,
            std::array<double, 4>& x) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 4; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int row = col + 1; row < 4; ++row) {
            const double factor = a[row][col] / a[col][col];
            for (int k = col; k < 4; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    for (int row = 3; row >= 0; --row) {
        double sum = b[row];
        for (int k = row + 1; k < 4; ++k) sum -= a[row][k] * x[k];
        x[row] = sum / a[row][row];
    }
    return true;
}

PhaseState midpoint_defect(const PhaseState& y0, const PhaseState& y1,
                           const ModelParams& params, double dt) {
    const PhaseState mid = (y0 + y1) * 0.5;
    return y1 - y0 - vector_field(mid, params) * dt;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::domain_error("IntegratorConfig: dt must be positive and finite");
    }
    if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0) {
        throw std::domain_error("IntegratorConfig: invalid time span");
    }
    if (t1 > t0 && dt > (t1 - t0)) {
        throw std::domain_error("IntegratorConfig: dt exceeds the time span");
    }
    if (!(newton_tol > 0.0)) {
        throw std::domain_error("IntegratorConfig: newton_tol must be positive");
    }
    if (newton_max_iter < 1) {
        throw std::domain_error("IntegratorConfig: newton_max_iter must be positive");
    }
    if (record_stride < 1) {
        throw std::domain_error("IntegratorConfig: record_stride must be positive");
    }
}

double Trajectory::max_drift_energy() const {
    double m = 0.0;
    for (const auto& d : drift) m = std::max(m, d[0]);
    return m;
}

double Trajectory::max_drift_angular() const {
    double m = 0.0;
    for (const auto& d : drift) m = std::max(m, d[1]);
    return m;
}

std::array<double, 3> immersion_time_integrand(const PhaseState& y) {
    return {
        4.0 * (y.q1 * y.q2 - y.p1 * y.p2),
        2.0 * (y.p1 * y.p1 + y.q2 * y.q2 - y.p2 * y.p2 - y.q1 * y.q1),
        -4.0 * (y.p1 * y.q1 + y.p2 * y.q2),
    };
}

PhaseState step_implicit_midpoint(const PhaseState& y0, const ModelParams& params,
                                  double dt, const IntegratorConfig& cfg) {
    params.validate();
    if (!y0.finite()) throw std::domain_error("step_implicit_midpoint: non-finite state");
    if (dt == 0.0 || !std::isfinite(dt)) {
        throw std::domain_error("step_implicit_midpoint: invalid dt");
    }

    // Explicit Euler predictor, then Newton polished all the way to roundoff:
    // leftover per-step residual would otherwise accumulate linearly across a
    // long run and dominate the drift of the exactly-conserved integrals.
    PhaseState y1 = y0 + vector_field(y0, params) * dt;
    const double floor = 2.0 * std::numeric_limits<double>::epsilon() * (1.0 + y0.norm());
    double res = residual_norm(midpoint_defect(y0, y1, params, dt));
    PhaseState best_y = y1;
    double best_res = res;

    for (int iter = 0; iter < cfg.newton_max_iter && res > floor; ++iter) {
        const PhaseState mid = (y0 + y1) * 0.5;
        const PhaseState defect = midpoint_defect(y0, y1, params, dt);
        auto jac = flow_jacobian(mid, params);
        // Newton matrix I - (dt/2) Df(mid).
        std::array<std::array<double, 4>, 4> m;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) m[i][j] = (i == j ? 1.0 : 0.0) - 0.5 * dt * jac[i][j];
        }
        std::array<double, 4> rhs = {-defect.p1, -defect.p2, -defect.q1, -defect.q2};
        std::array<double, 4> delta{};
        if (solve4(m, rhs, delta)) {
            y1 = y1 + PhaseState{delta[0], delta[1], delta[2], delta[3]};
        } else {
            // Damped fixed-point update when the Newton matrix degenerates.
            const PhaseState fp = y0 + vector_field(mid, params) * dt;
            y1 = y1 * 0.5 + fp * 0.5;
        }
        res = residual_norm(midpoint_defect(y0, y1, params, dt));
        if (res < best_res) {
            best_res = res;
            best_y = y1;
        } else if (best_res < cfg.newton_tol) {
            break;  // stagnated at roundoff after convergence
        }
    }
    if (best_res <= std::max(floor, cfg.newton_tol)) return best_y;
    throw IntegrationError("implicit midpoint step failed to converge", best_res,
                           std::numeric_limits<double>::quiet_NaN());
}

Trajectory integrate(const PhaseState& state0, const ModelParams& params,
                     const IntegratorConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!state0.finite()) throw std::domain_error("integrate: non-finite initial state");

    Trajectory traj;
    traj.params = params;

    const double span = cfg.t1 - cfg.t0;
    const long long n_steps = span > 0.0 ? std::max(1LL, std::llround(span / cfg.dt)) : 0LL;
    // Land exactly on t1; dt is honored up to the rounding of span/dt.
    const double dt = n_steps > 0 ? span / static_cast<double>(n_steps) : 0.0;

    const double h0_initial = hamiltonian(state0, params);
    const double m_initial = angular_integral(state0);

    PhaseState y = state0;
    std::array<double, 3> quad = {0.0, 0.0, 0.0};

    auto record = [&](long long step) {
        traj.times.push_back(cfg.t0 + static_cast<double>(step) * dt);
        traj.states.push_back(y);
        traj.quad.push_back(quad);
        traj.drift.push_back({std::abs(hamiltonian(y, params) - h0_initial),
                              std::abs(angular_integral(y) - m_initial)});
    };

    record(0);
    for (long long step = 1; step <= n_steps; ++step) {
        PhaseState y_next;
        try {
            y_next = step_implicit_midpoint(y, params, dt, cfg);
        } catch (const IntegrationError& err) {
            throw IntegrationError(err.what(), err.residual_norm,
                                   cfg.t0 + static_cast<double>(step - 1) * dt);
        }
        const PhaseState mid = (y + y_next) * 0.5;
        const auto g = immersion_time_integrand(mid);
        for (int k = 0; k < 3; ++k) quad[k] += dt * g[k];
        y = y_next;
        if (step % cfg.record_stride == 0 || step == n_steps) record(step);
    }
    return traj;
}

std::optional<double> detect_period(const Trajectory& traj, double tol) {
    if (traj.size() < 3) {
        throw std::domain_error("detect_period: need at least 3 samples");
    }
    if (!(tol > 0.0)) throw std::domain_error("detect_period: tol must be positive");

    const PhaseState& y0 = traj.states.front();
    const std::size_t n = traj.size();

    std::vector<double> dist(n);
    double dist_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = s1_distance(traj.states[i], y0);
        dist_max = std::max(dist_max, dist[i]);
    }
    // Stationary trajectory: distinguished zero period.
    const double scale = std::max(1.0, y0.norm());
    if (dist_max < 1e-14 * scale) return 0.0;

    // After the orbit has genuinely left the start, refine each local minimum
    // of the squared distance by a parabola through the sample triple; the
    // refined minimum (not the sampled one, which sits up to |f| dt/2 above
    // it) decides whether the orbit re-entered the tol-ball.
    const double escape = std::max(10.0 * tol, 0.1 * dist_max);
    bool escaped = false;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        if (!escaped) {
            if (dist[m] > escape) escaped = true;
            continue;
        }
        if (dist[m] > dist[m - 1] || dist[m] > dist[m + 1]) continue;
        const double f0 = dist[m - 1] * dist[m - 1];
        const double f1 = dist[m] * dist[m];
        const double f2 = dist[m + 1] * dist[m + 1];
        const double denom = f0 - 2.0 * f1 + f2;
        double t_star = traj.times[m];
        double f_star = f1;
        if (denom > 0.0) {
            const double h = traj.times[m + 1] - traj.times[m];
            const double shift = 0.5 * (f0 - f2) / denom;
            t_star += shift * h;
            f_star = f1 - 0.125 * (f0 - f2) * (f0 - f2) / denom;
        }
        if (std::sqrt(std::max(0.0, f_star)) < tol) return t_star - traj.times[0];
    }
    return std::nullopt;
}

}  // namespace cmcflow
