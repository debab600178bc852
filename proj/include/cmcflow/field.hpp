// Desk-scale pseudospectral solver for the coupled spinor transport system on
// a periodic domain, its four conserved integrals, the generic path-quadrature
// surface inducer, and the linear-system residual checker.
#pragma once

#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "cmcflow/phase.hpp"
#include "cmcflow/surface.hpp"

namespace cmcflow {

/// Raised when the blow-up guard trips during evolution.
class FieldBlowupError : public std::runtime_error {
public:
    FieldBlowupError(const std::string& message, double time, double magnitude)
        : std::runtime_error(message), blowup_time(time), max_magnitude(magnitude) {}
    double blowup_time;
    double max_magnitude;
};

/// Periodic spinor pair sampled on N equispaced points of [0, L).
struct FieldState {
    double length = 4.0 * 3.14159265358979323846;
    double time = 0.0;
    std::vector<cdouble> psi1;
    std::vector<cdouble> psi2;

    int n() const { return static_cast<int>(psi1.size()); }
    double x_at(int j) const { return length * static_cast<double>(j) / static_cast<double>(n()); }
    double max_abs() const;

    /// N >= 16 and even, matching grid sizes, finite samples, L > 0.
    void validate() const;
};

/// The four conserved integrals, kept complex with an explicit reality
/// diagnostic rather than silently projected to the real axis. The energy
/// density is (i/2)(psi1_x conj(psi2) + conj(psi1) psi2_x) + (H/2) rho^2: the
/// quartic coefficient H/2 is the unique choice conserved by the flow
/// (d/dt of the derivative term equals -(H/2) d/dt of the quartic term), and
/// the same choice makes the single-mode reduction of the energy equal L
/// times the reduced Hamiltonian.
struct ConservedSet {
    cdouble c_plus;
    cdouble c_minus;
    cdouble p_momentum;
    cdouble h_energy;
    double reality_defect = 0.0;
};

/// Spectral (FFT-based circular) x-derivative of a periodic sample vector.
/// `order` = 1 or 2; the Nyquist mode of odd derivatives is zeroed.
std::vector<cdouble> spectral_derivative(const std::vector<cdouble>& f, double length,
                                         int order = 1);

/// Builds the single-mode ansatz field psi1 = r e^{i lambda x},
/// psi2 = s e^{i lambda x}. Requires lambda L / (2 pi) to be an integer so the
/// mode fits the torus.
FieldState ansatz_field(const PhaseState& state, const ModelParams& params, double length,
                        int n, double time = 0.0);

/// Band-limited random initial data with amplitude decaying in the mode index.
FieldState random_smooth_field(double length, int n, double amplitude, int max_mode,
                               std::mt19937_64& rng);

/**
 * RK4 evolution of
 *   psi1_t =  i psi1_x + 2 H rho psi2,
 *   psi2_t = -i psi2_x - 2 H rho psi1,   rho = |psi1|^2 + |psi2|^2,
 * with spectral x-derivatives. Snapshots (including the initial and final
 * states) are taken every `snapshot_stride` steps. dt must satisfy the
 * stability guard dt <= 0.5 L / N. Throws FieldBlowupError when the field
 * magnitude exceeds 1e6 times its initial value.
 *
 * The linear symbol of this system is real (mode k of psi1 evolves like
 * e^{-k t}), so marching in t is a lateral Cauchy problem: content in mode k
 * is amplified by e^{|k| t}, and grid-roundoff in high modes would swamp any
 * run within a fraction of a time unit. The solver therefore integrates the
 * Galerkin truncation onto |mode| <= mode_cutoff (applied to the initial data
 * and after every step). The default keeps the amplification of roundoff
 * below ~1e-9 over t = 5 on the standard domain while fully resolving the
 * band-limited data classes this artifact evolves; the cubic nonlinearity of
 * retained modes stays below the grid's alias limit for N >= 64.
 */
std::vector<FieldState> evolve(const FieldState& state0, const ModelParams& params,
                               double dt, double t_end, int snapshot_stride = 1,
                               int mode_cutoff = 6);

/// Evaluates the four integrals with spectral derivatives and the trapezoid
/// rule (exact for periodic band-limited integrands).
ConservedSet conserved_quantities(const FieldState& state, const ModelParams& params);

/// Fraction of the field's squared norm carried by the single ansatz mode
/// lambda L / (2 pi).
double mode_concentration(const FieldState& state, const ModelParams& params);

/// Axis-aligned integration path order for the generic inducer.
enum class PathOrder { TimeThenSpace, SpaceThenTime };

/**
 * Surface induction by numerical path quadrature of the coordinate one-forms
 * over a uniform (t, x) snapshot grid: composite Simpson on each leg of an
 * L-shaped path (order selectable for path-independence checks). Works for any
 * solution family, including the constant-spinor minimal fixture.
 */
ImmersionMesh induce_generic(const std::vector<FieldState>& fields,
                             const ModelParams& params,
                             PathOrder path = PathOrder::TimeThenSpace);

/// Max grid-point residual of the linear system
///   |psi1_z - p psi2| + |psi2_zbar + p psi1|,  p = H (|psi1|^2 + |psi2|^2),
/// with spectral x-derivatives and 4th-order central time differences.
/// Requires at least 5 snapshots on a uniform time grid.
double dirac_residual(const std::vector<FieldState>& fields, const ModelParams& params);

}  // namespace cmcflow
