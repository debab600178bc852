// Surface reconstruction from integrated orbits: spinor ansatz, closed-form
// immersion, screw symmetry, structured meshes, metric and curvature checks.
#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cmcflow/geometry.hpp"
#include "cmcflow/integrator.hpp"
#include "cmcflow/phase.hpp"

namespace cmcflow {

/// Raised when the closed-form immersion is requested outside lambda = H = 1/2;
/// those parameter values are served by the generic field inducer instead.
class UnsupportedParametersError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Spinor pair at one point of the (t, x) strip.
struct SpinorSample {
    cdouble psi1;
    cdouble psi2;
};

/// Periodic ansatz: psi1 = r e^{i lambda x}, psi2 = s e^{i lambda x}.
SpinorSample psi_at(const PhaseState& state, double x, const ModelParams& params);

/**
 * Structured immersion grid. Vertices are stored t-major: vertex (i, j) of the
 * |t_values| x |x_values| grid sits at index i * x_count + j. Faces are quads
 * between adjacent grid lines, wound so their normal follows dX/dt x dX/dx.
 */
struct ImmersionMesh {
    std::vector<double> t_values;
    std::vector<double> x_values;
    std::vector<Vec3> points;
    std::vector<std::array<int, 4>> faces;
    std::vector<double> conformal_factor;   ///< 4 rho^2 per vertex
    std::vector<double> gauss_curvature;    ///< per vertex (constant along each t-row)

    std::size_t t_count() const { return t_values.size(); }
    std::size_t x_count() const { return x_values.size(); }
    std::size_t vertex_index(std::size_t i, std::size_t j) const {
        return i * x_values.size() + j;
    }
    const Vec3& at(std::size_t i, std::size_t j) const { return points[vertex_index(i, j)]; }
};

/**
 * Immersion coordinates X(t, x) for the closed-form case lambda = H = 1/2.
 * The time leg comes from the trajectory's quadrature accumulators (an L-shaped
 * integration path along x = 0), the space leg from exact antiderivatives:
 * with A = p1^2+q1^2-p2^2-q2^2, B = 2(p1 p2 + q1 q2) and M the angular
 * integral,
 *   X1 += 2 [A sin x + B (cos x - 1)]
 *   X2 += 2 [B sin x - A (cos x - 1)]
 *   X3 += 4 M x.
 * The base point is X(t0, 0) = 0. Throws UnsupportedParametersError for other
 * parameter values.
 */
Vec3 immersion_point(const Trajectory& traj, std::size_t sample_index, double x,
                     const ModelParams& params);

/// Tensor-grid mesh over the trajectory samples and x in [x_min, x_max] with
/// x_count columns (x_count >= 3).
ImmersionMesh generate_mesh(const Trajectory& traj, int x_count, double x_min,
                            double x_max, const ModelParams& params);

/// Screw motion: rotation by tau about the vertical axis through the origin
/// combined with a vertical translation by 4 M tau.
Vec3 helicoidal_transform(const Vec3& pt, double tau, double angular);

/// Screw motion about the vertical axis through `axis_point` instead of the
/// origin (rotation part conjugated by the offset; the lift is unchanged).
Vec3 helicoidal_transform_about(const Vec3& pt, double tau, double angular,
                                const Vec3& axis_point);

/**
 * Point the generated surface's screw axis passes through: (-2 B0, 2 A0, 0)
 * computed from the initial sample. Conserved along the flow, and the origin
 * exactly when r0^2 + s0^2 = 0. All circles of revolution (M = 0 case) are
 * centered on this axis.
 */
Vec3 screw_axis_point(const PhaseState& initial_state);

/**
 * Max over sampled (t, x, tau) of
 *   |X(t, x+tau) - helicoidal_transform_about(X(t, x), tau, M, axis)|.
 * Passing screw_axis_point(state0) checks the intrinsic invariance; passing
 * the origin checks the same identity in the axis-through-origin normal form
 * (exact when r0^2 + s0^2 = 0).
 */
double helicoidal_invariance_residual(const Trajectory& traj, const ModelParams& params,
                                      const std::vector<double>& taus,
                                      const Vec3& axis_point);

/// Same invariance measured on an assembled mesh by comparing column j+k
/// against the screw image of column j (tau = k times the column spacing).
double helicoidal_invariance_residual_mesh(const ImmersionMesh& mesh, double angular,
                                           const Vec3& axis_point, int max_shift = 4);

/// Conformal factor 4 rho^2 of the induced metric (x-independent).
double conformal_factor(const PhaseState& state);

/**
 * Gauss curvature K = -(1/4) (d^2/dt^2 log rho) / rho^2 at a trajectory
 * sample, with the second derivative taken by 4th-order central differences on
 * the uniform time grid. Requires two neighbors on each side.
 */
double gauss_curvature_analytic(const Trajectory& traj, std::size_t sample_index);

/**
 * Cotangent-Laplacian mean-curvature estimate per vertex, signed so that the
 * unit-radius cylinder fixture yields +1/2. Boundary vertices and vertices of
 * degenerate faces (area < 1e-14) are excluded and reported as NaN.
 */
std::vector<double> mean_curvature_discrete(const ImmersionMesh& mesh);

/// Median over the non-NaN entries; NaN when none.
double finite_median(std::vector<double> values);
/// Interquartile range over the non-NaN entries; NaN when none.
double finite_iqr(std::vector<double> values);

/// First-fundamental-form diagnostics measured on the mesh by 4th-order
/// central differences over interior grid points.
struct MetricStats {
    double max_anisotropy = 0.0;   ///< max | |X_x|^2 - |X_t|^2 |
    double max_obliquity = 0.0;    ///< max | X_x . X_t |
    double max_factor_error = 0.0; ///< max | |X_x|^2 - conformal_factor |
};
MetricStats metric_consistency(const ImmersionMesh& mesh);

}  // namespace cmcflow
