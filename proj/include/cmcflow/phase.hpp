// Reduced Hamiltonian flow behind helicoidal constant-mean-curvature surfaces:
// vector field, first integrals, S^1 symmetry, equilibria, trajectory classes.
#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace cmcflow {

using cdouble = std::complex<double>;

/// Model constants of the reduced system. Both must be nonzero; the closed-form
/// immersion additionally requires lambda = H = 1/2 (the default).
struct ModelParams {
    double lambda = 0.5;          ///< wavenumber of the periodic ansatz
    double mean_curvature = 0.5;  ///< constant mean curvature H

    /// Throws std::domain_error if lambda or H is zero or non-finite.
    void validate() const;

    /// True when the specialized closed-form immersion applies.
    bool closed_form_immersion() const {
        return lambda == 0.5 && mean_curvature == 0.5;
    }
};

/// Point of the four-dimensional reduced phase space, equivalently the complex
/// pair r = p1 + i p2, s = q1 + i q2.
struct PhaseState {
    double p1 = 0.0;
    double p2 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;

    cdouble r() const { return {p1, p2}; }
    cdouble s() const { return {q1, q2}; }
    static PhaseState from_rs(cdouble r, cdouble s) {
        return {r.real(), r.imag(), s.real(), s.imag()};
    }

    /// Squared phase-space norm rho = |r|^2 + |s|^2.
    double rho() const { return p1 * p1 + p2 * p2 + q1 * q1 + q2 * q2; }

    bool finite() const;

    PhaseState operator+(const PhaseState& o) const { return {p1 + o.p1, p2 + o.p2, q1 + o.q1, q2 + o.q2}; }
    PhaseState operator-(const PhaseState& o) const { return {p1 - o.p1, p2 - o.p2, q1 - o.q1, q2 - o.q2}; }
    PhaseState operator*(double c) const { return {c * p1, c * p2, c * q1, c * q2}; }

    double norm() const;
};

/// Geometric family a trajectory's surface belongs to.
enum class SurfaceFamily {
    Degenerate,
    Cylinder,
    Unduloid,
    Sphere,
    Nodoid,
    HelicoidalCMC,
};

const char* to_string(SurfaceFamily family);

/// Classification result; carries the two first integrals verbatim.
struct SurfaceClass {
    SurfaceFamily family = SurfaceFamily::Degenerate;
    double energy = 0.0;   ///< value of the reduced Hamiltonian
    double angular = 0.0;  ///< value of the angular integral M
};

/// Right-hand side of the reduced flow:
///   dr/dt = -lambda r + 2 H rho s,   ds/dt = lambda s - 2 H rho r.
PhaseState vector_field(const PhaseState& state, const ModelParams& params);

/// 4x4 Jacobian of `vector_field` at `state`, row-major, variable order
/// (p1, p2, q1, q2). Closed form; used by the implicit solver and tests.
std::array<std::array<double, 4>, 4> flow_jacobian(const PhaseState& state,
                                                   const ModelParams& params);

/// Reduced Hamiltonian (H/2) rho^2 - lambda (p1 q1 + p2 q2). Conserved.
double hamiltonian(const PhaseState& state, const ModelParams& params);

/// Angular first integral M = p1 q2 - p2 q1 = Im(conj(r) s). Conserved and in
/// involution with the Hamiltonian.
double angular_integral(const PhaseState& state);

/// Simultaneous rotation of the (p1,p2) and (q1,q2) pairs by phi, i.e.
/// r -> e^{i phi} r, s -> e^{i phi} s. Leaves both first integrals invariant.
PhaseState s1_rotate(const PhaseState& state, double phi);

/// Distance between a and b modulo the simultaneous rotation (minimum over phi
/// of |s1_rotate(a, phi) - b|).
double s1_distance(const PhaseState& a, const PhaseState& b);

/// All equilibria of the flow restricted to the p2 = q2 = 0 plane: the origin
/// plus the two nonzero rest points with rho = |lambda/(2H)|.
std::vector<PhaseState> equilibria(const ModelParams& params);

/// Distance from `state` to the S^1 orbit of the nonzero equilibria.
double equilibrium_orbit_distance(const PhaseState& state, const ModelParams& params);

/// Maps a state to its surface family from the pair (energy, angular) plus an
/// equilibrium proximity test. `tol` separates the open regions from their
/// measure-zero boundaries, so states within tol of the separatrix or of an
/// equilibrium orbit are assigned the boundary class (Sphere, Cylinder).
SurfaceClass classify(const PhaseState& state, const ModelParams& params,
                      double tol = 1e-9);

}  // namespace cmcflow
