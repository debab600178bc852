#include "cmcflow/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace cmcflow {

namespace {

void require_finite(const PhaseState& state, const char* where) {
    if (!state.finite()) {
        throw std::domain_error(std::string(where) + ": non-finite phase state component");
    }
}

}  // namespace

void ModelParams::validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(mean_curvature)) {
        throw std::domain_error("ModelParams: non-finite parameter");
    }
    if (lambda == 0.0) {
        throw std::domain_error("ModelParams: lambda must be nonzero");
    }
    if (mean_curvature == 0.0) {
        throw std::domain_error("ModelParams: mean curvature must be nonzero (minimal surfaces excluded)");
    }
}

bool PhaseState::finite() const {
    return std::isfinite(p1) && std::isfinite(p2) && std::isfinite(q1) && std::isfinite(q2);
}

double PhaseState::norm() const { return std::sqrt(rho()); }

const char* to_string(SurfaceFamily family) {
    switch (family) {
        case SurfaceFamily::Degenerate: return "Degenerate";
        case SurfaceFamily::Cylinder: return "Cylinder";
        case SurfaceFamily::Unduloid: return "Unduloid";
        case SurfaceFamily::Sphere: return "Sphere";
        case SurfaceFamily::Nodoid: return "Nodoid";
        case SurfaceFamily::HelicoidalCMC: return "HelicoidalCMC";
    }
    return "Unknown";
}

PhaseState vector_field(const PhaseState& y, const ModelParams& params) {
    params.validate();
    require_finite(y, "vector_field");
    const double two_h_rho = 2.0 * params.mean_curvature * y.rho();
    const double lam = params.lambda;
    return {
        -lam * y.p1 + two_h_rho * y.q1,
        -lam * y.p2 + two_h_rho * y.q2,
        lam * y.q1 - two_h_rho * y.p1,
        lam * y.q2 - two_h_rho * y.p2,
    };
}

std::array<std::array<double, 4>, 4> flow_jacobian(const PhaseState& y,
                                                   const ModelParams& params) {
    params.validate();
    require_finite(y, "flow_jacobian");
    const double lam = params.lambda;
    const double h = params.mean_curvature;
    const double two_h_rho = 2.0 * h * y.rho();
    const double fh = 4.0 * h;
    return {{
        {-lam + fh * y.p1 * y.q1, fh * y.p2 * y.q1, two_h_rho + fh * y.q1 * y.q1, fh * y.q2 * y.q1},
        {fh * y.p1 * y.q2, -lam + fh * y.p2 * y.q2, fh * y.q1 * y.q2, two_h_rho + fh * y.q2 * y.q2},
        {-two_h_rho - fh * y.p1 * y.p1, -fh * y.p2 * y.p1, lam - fh * y.q1 * y.p1, -fh * y.q2 * y.p1},
        {-fh * y.p1 * y.p2, -two_h_rho - fh * y.p2 * y.p2, -fh * y.q1 * y.p2, lam - fh * y.q2 * y.p2},
    }};
}

double hamiltonian(const PhaseState& y, const ModelParams& params) {
    params.validate();
    require_finite(y, "hamiltonian");
    const double rho = y.rho();
    return 0.5 * params.mean_curvature * rho * rho -
           params.lambda * (y.p1 * y.q1 + y.p2 * y.q2);
}

double angular_integral(const PhaseState& y) {
    require_finite(y, "angular_integral");
    return y.p1 * y.q2 - y.p2 * y.q1;
}

PhaseState s1_rotate(const PhaseState& y, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return {
        y.p1 * c - y.p2 * s,
        y.p1 * s + y.p2 * c,
        y.q1 * c - y.q2 * s,
        y.q1 * s + y.q2 * c,
    };
}

double s1_distance(const PhaseState& a, const PhaseState& b) {
    // |e^{i phi} r_a - r_b|^2 + |e^{i phi} s_a - s_b|^2 is minimized at
    // phi = -arg(r_a conj(r_b) + s_a conj(s_b)).
    const cdouble overlap = a.r() * std::conj(b.r()) + a.s() * std::conj(b.s());
    const double d2 = a.rho() + b.rho() - 2.0 * std::abs(overlap);
    return std::sqrt(std::max(0.0, d2));
}

std::vector<PhaseState> equilibria(const ModelParams& params) {
    params.validate();
    // Nonzero rest points solve s = +-r with 2 H rho = +-lambda; on the real
    // plane this gives p1 = q1 when lambda/H > 0 and p1 = -q1 otherwise.
    const double ratio = params.lambda / (4.0 * params.mean_curvature);
    const double a = std::sqrt(std::abs(ratio));
    const double sign_q = ratio > 0.0 ? 1.0 : -1.0;
    return {
        PhaseState{0.0, 0.0, 0.0, 0.0},
        PhaseState{a, 0.0, sign_q * a, 0.0},
        PhaseState{-a, 0.0, -sign_q * a, 0.0},
    };
}

double equilibrium_orbit_distance(const PhaseState& y, const ModelParams& params) {
    params.validate();
    require_finite(y, "equilibrium_orbit_distance");
    const double ratio = params.lambda / (4.0 * params.mean_curvature);
    const double a = std::sqrt(std::abs(ratio));
    // Orbit of the rest points under the simultaneous rotation: (e^{i phi} c,
    // +-e^{i phi} c) with |c| = a. Minimizing over phi and the +- branch gives
    // a closed form through |r +- s|.
    const double sign_q = ratio > 0.0 ? 1.0 : -1.0;
    const cdouble rs = y.r() + sign_q * y.s();
    const double d2 = y.rho() + 2.0 * a * a - 2.0 * a * std::abs(rs);
    return std::sqrt(std::max(0.0, d2));
}

SurfaceClass classify(const PhaseState& y, const ModelParams& params, double tol) {
    params.validate();
    require_finite(y, "classify");
    if (!(tol > 0.0)) {
        throw std::domain_error("classify: tolerance must be positive");
    }
    SurfaceClass result;
    result.energy = hamiltonian(y, params);
    result.angular = angular_integral(y);

    if (y.rho() < tol) {
        result.family = SurfaceFamily::Degenerate;
    } else if (std::abs(result.angular) >= tol) {
        result.family = SurfaceFamily::HelicoidalCMC;
    } else if (equilibrium_orbit_distance(y, params) < tol) {
        result.family = SurfaceFamily::Cylinder;
    } else if (std::abs(result.energy) < tol) {
        result.family = SurfaceFamily::Sphere;
    } else if (result.energy < 0.0) {
        result.family = SurfaceFamily::Unduloid;
    } else {
        result.family = SurfaceFamily::Nodoid;
    }
    return result;
}

}  // namespace cmcflow
