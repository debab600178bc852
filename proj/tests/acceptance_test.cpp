// End-to-end acceptance suite: one criterion per numbered block, one
// PASS/FAIL line each, nonzero exit when any criterion fails.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cmcflow/field.hpp"
#include "cmcflow/integrator.hpp"
#include "cmcflow/phase.hpp"
#include "cmcflow/surface.hpp"

using namespace cmcflow;

namespace {

constexpr double kPi = 3.14159265358979323846;
const ModelParams kParams{};  // lambda = H = 1/2 throughout

struct Line {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& note) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += note;
        }
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += "; ";
        detail += text;
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

Trajectory run(const PhaseState& y0, double dt, double t1, int stride) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t1 = t1;
    cfg.record_stride = stride;
    return integrate(y0, kParams, cfg);
}

PhaseState separatrix_state(double a) {
    double lo = 1e-6, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (hamiltonian({a, 0, mid, 0}, kParams) < 0.0 ? lo : hi) = mid;
    }
    return {a, 0.0, 0.5 * (lo + hi), 0.0};
}

PhaseState relative_equilibrium(double rho0) {
    const double mu = std::sqrt(rho0 * rho0 - 0.25);
    const double a = std::sqrt(rho0 / 2.0);
    return {a, 0.0, a * 0.5 / rho0, a * mu / rho0};
}

// ---------------------------------------------------------------------------

Line criterion1_equilibrium() {
    Line line;
    for (double sign : {1.0, -1.0}) {
        const PhaseState eq{sign * 0.5, 0.0, sign * 0.5, 0.0};
        const double f = vector_field(eq, kParams).norm();
        line.require(f <= 1e-14, "vector field at rest point " + num(f));
    }

    IntegratorConfig cfg;
    cfg.dt = 2.0 * kPi / 200.0;
    cfg.t1 = 2.0 * kPi;
    const auto traj = integrate({0.5, 0, 0.5, 0}, kParams, cfg);
    const auto mesh = generate_mesh(traj, 200, 0.0, 2.0 * kPi, kParams);
    double cylinder_dev = 0.0;
    for (const auto& p : mesh.points) {
        cylinder_dev = std::max(cylinder_dev,
                                std::abs(std::hypot(p.x, p.y - 1.0) - 1.0));
    }
    line.require(cylinder_dev < 1e-8, "cylinder deviation " + num(cylinder_dev));

    const double h_med = finite_median(mean_curvature_discrete(mesh));
    line.require(std::abs(h_med - 0.5) < 1e-3, "H median " + num(h_med));
    line.note("cyl dev " + num(cylinder_dev) + ", H median err " + num(std::abs(h_med - 0.5)));
    return line;
}

Line criterion2_conservation() {
    Line line;
    struct Case {
        const char* label;
        PhaseState y0;
    };
    const std::vector<Case> cases = {
        {"unduloid", {0.52, 0.0, 0.52, 0.0}},
        {"nodoid", {0.05, 0.0, -0.05, 0.0}},
        {"helicoidal", relative_equilibrium(0.6)},
    };
    for (const auto& c : cases) {
        const auto cls = classify(c.y0, kParams);
        line.require(std::string(to_string(cls.family)) ==
                         std::string(1, std::toupper(c.label[0])) + (c.label + 1),
                     std::string("fixture class mismatch for ") + c.label);
        const auto traj = run(c.y0, 1e-3, 100.0, 100);
        const double dh = traj.max_drift_energy();
        const double dm = traj.max_drift_angular();
        line.require(dh < 1e-10, std::string(c.label) + " dH " + num(dh));
        line.require(dm < 1e-12, std::string(c.label) + " dM " + num(dm));
        line.note(std::string(c.label) + " dH=" + num(dh) + " dM=" + num(dm));
    }

    std::vector<double> drifts;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        drifts.push_back(run({0.5, 0.0, 0.1, 0.0}, dt, 10.0, 10).max_drift_energy());
    }
    const double order =
        0.5 * (std::log2(drifts[0] / drifts[1]) + std::log2(drifts[1] / drifts[2]));
    line.require(std::abs(order - 2.0) < 0.35, "drift order " + num(order));
    line.note("drift order " + num(order));
    return line;
}

Line criterion3_classification() {
    Line line;
    const double tol = 1e-9;
    double sampled_min = 1e300;
    int wrong = 0;
    const int n = 201;
    for (int i = 0; i < n; ++i) {
        const double p = -1.0 + 2.0 * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            const double q = -1.0 + 2.0 * j / (n - 1.0);
            const PhaseState y{p, 0.0, q, 0.0};
            const auto cls = classify(y, kParams, tol);
            sampled_min = std::min(sampled_min, cls.energy);
            if (y.rho() < tol) continue;
            if (equilibrium_orbit_distance(y, kParams) < tol) continue;
            const bool ok = (std::abs(cls.energy) < tol)
                                ? cls.family == SurfaceFamily::Sphere
                                : (cls.energy < 0.0 ? cls.family == SurfaceFamily::Unduloid
                                                    : cls.family == SurfaceFamily::Nodoid);
            if (!ok) ++wrong;
        }
    }
    line.require(wrong == 0, std::to_string(wrong) + " misclassified grid states");
    line.require(std::abs(sampled_min + 1.0 / 16.0) < 1e-9,
                 "sampled min " + num(sampled_min));
    // Separatrix-level states classify as the sphere boundary.
    for (double a : {1e-3, 0.05, 0.2}) {
        const auto sep = separatrix_state(a);
        line.require(classify(sep, kParams, tol).family == SurfaceFamily::Sphere,
                     "separatrix state misclassified at a=" + num(a));
    }
    line.note("sampled min H0 " + num(sampled_min) + " (derived -1/16 supersedes the "
              "printed -1/32)");
    return line;
}

Line criterion4_sphere() {
    Line line;
    const auto sep = separatrix_state(1e-3);
    const double energy = hamiltonian(sep, kParams);
    line.require(std::abs(energy) < 1e-12, "fixture energy " + num(energy));

    const auto traj = run(sep, 1e-3, 30.0, 20);
    const auto mesh = generate_mesh(traj, 128, 0.0, 2.0 * kPi, kParams);

    // Algebraic sphere fit over vertices away from the truncation zones.
    double a[4][5] = {};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.states[i].rho() < 0.02) continue;
        for (std::size_t j = 0; j < mesh.x_count(); j += 4) {
            const Vec3 p = mesh.at(i, j);
            const double row[4] = {2.0 * p.x, 2.0 * p.y, 2.0 * p.z, 1.0};
            const double rhs = p.dot(p);
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) a[r][c] += row[r] * row[c];
                a[r][4] += row[r] * rhs;
            }
        }
    }
    for (int c = 0; c < 4; ++c) {
        int pv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[pv][c])) pv = r;
        for (int k = 0; k < 5; ++k) std::swap(a[c][k], a[pv][k]);
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 5; ++k) a[r][k] -= f * a[c][k];
        }
    }
    double sol[4];
    for (int r = 3; r >= 0; --r) {
        double s = a[r][4];
        for (int k = r + 1; k < 4; ++k) s -= a[r][k] * sol[k];
        sol[r] = s / a[r][r];
    }
    const Vec3 center{sol[0], sol[1], sol[2]};
    const double radius = std::sqrt(sol[3] + center.dot(center));
    line.require(std::abs(radius - 2.0) < 1e-2, "fitted radius " + num(radius));

    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.states[i].rho() < 0.02) continue;
        for (std::size_t j = 0; j < mesh.x_count(); ++j) {
            worst = std::max(worst, std::abs((mesh.at(i, j) - center).norm() - 2.0));
        }
    }
    line.require(worst < 1e-2, "max |dist-2| " + num(worst));
    line.note("radius " + num(radius) + ", max |dist-2| " + num(worst));
    return line;
}

Line criterion5_helicoidal() {
    Line line;
    const std::vector<double> taus = {0.1, 1.0, 2.7};
    // Normal-form states (r^2 + s^2 = 0): the conserved screw axis is the
    // vertical coordinate axis and the printed transform applies verbatim.
    const std::vector<PhaseState> normal_forms = {
        {1.0, 0.0, 0.0, 1.0},
        {0.6, 0.2, -0.2, 0.6},
        {0.3, -0.5, 0.5, 0.3},
    };
    double worst = 0.0;
    for (const auto& y0 : normal_forms) {
        const double m = angular_integral(y0);
        if (std::abs(m) < 1e-9 || screw_axis_point(y0).norm() > 1e-14) {
            line.require(false, "bad normal-form fixture");
            continue;
        }
        const auto traj = run(y0, 1e-3, 2.5, 10);
        worst = std::max(worst,
                         helicoidal_invariance_residual(traj, kParams, taus, Vec3{}));

        const Vec3 a = immersion_point(traj, 3, 0.4, kParams);
        const Vec3 b = immersion_point(traj, 3, 0.4 + 2.0 * kPi, kParams);
        const double pitch_err = std::abs((b.z - a.z) - 8.0 * kPi * m);
        line.require(pitch_err < 1e-8, "pitch error " + num(pitch_err));
    }
    line.require(worst < 1e-8, "normal-form residual " + num(worst));

    // Generic M != 0 states: same invariance about their conserved axis.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    double worst_generic = 0.0;
    for (int k = 0; k < 4; ++k) {
        PhaseState y0{u(rng), u(rng), u(rng), u(rng)};
        if (std::abs(angular_integral(y0)) < 1e-3) y0.q2 += 0.3;
        const auto traj = run(y0, 1e-3, 2.0, 20);
        worst_generic = std::max(
            worst_generic,
            helicoidal_invariance_residual(traj, kParams, taus, screw_axis_point(y0)));
    }
    line.require(worst_generic < 1e-8, "conserved-axis residual " + num(worst_generic));
    line.note("residual " + num(worst) + " (normal form), " + num(worst_generic) +
              " (generic, about the conserved axis)");
    return line;
}

Line criterion6_s1_equivalence() {
    Line line;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    std::uniform_real_distribution<double> angle(0.1, 1.4);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        PhaseState y0{u(rng), u(rng), u(rng), u(rng)};
        if (k < 5) {
            // Surfaces of revolution: the screw transform degenerates to the
            // rotation and the identity is literal.
            y0 = PhaseState{u(rng), 0.0, u(rng), 0.0};
        }
        if (y0.rho() < 1e-3) y0.p1 += 0.4;
        const double phi = angle(rng);
        const double tau = phi / kParams.lambda;
        const double m = angular_integral(y0);

        const auto base = run(y0, 1e-3, 1.5, 30);
        const auto rotated = run(s1_rotate(y0, phi), 1e-3, 1.5, 30);
        const auto mesh_base = generate_mesh(base, 24, 0.0, 2.0 * kPi, kParams);
        const auto mesh_rot = generate_mesh(rotated, 24, 0.0, 2.0 * kPi, kParams);
        for (std::size_t v = 0; v < mesh_base.points.size(); ++v) {
            Vec3 expected = helicoidal_transform(mesh_base.points[v], tau, m);
            // Both meshes anchor X(t0, 0) at the origin; that pinned gauge
            // removes the transform's vertical lift, which is restored here.
            expected.z -= 4.0 * m * tau;
            worst = std::max(worst, (mesh_rot.points[v] - expected).norm());
        }
    }
    line.require(worst < 1e-8, "vertex residual " + num(worst));
    line.note("vertex residual " + num(worst) +
              " (vertical gauge 4 M tau restored per the fixed base point)");
    return line;
}

Line criterion7_pde_reduction() {
    Line line;
    const double length = 4.0 * kPi;
    const int grid = 256;
    const PhaseState y0{0.3, 0.1, -0.2, 0.2};

    const auto f0 = ansatz_field(y0, kParams, length, grid);
    const auto c0 = conserved_quantities(f0, kParams);
    const double p_err = std::abs(c0.p_momentum - angular_integral(y0) * length);
    line.require(p_err < 1e-8, "P vs M L " + num(p_err));
    line.require(std::abs(c0.c_plus) < 1e-10, "C+ " + num(std::abs(c0.c_plus)));
    line.require(std::abs(c0.c_minus) < 1e-10, "C- " + num(std::abs(c0.c_minus)));

    const auto snaps = evolve(f0, kParams, 1e-3, 5.0, 500);

    IntegratorConfig ref_cfg;
    ref_cfg.dt = 1e-4;
    ref_cfg.t1 = 5.0;
    ref_cfg.record_stride = 50000;
    const auto ref = integrate(y0, kParams, ref_cfg);
    const auto exact = ansatz_field(ref.states.back(), kParams, length, grid, 5.0);
    double reduction = 0.0;
    for (int j = 0; j < grid; ++j) {
        reduction = std::max(reduction, std::abs(snaps.back().psi1[j] - exact.psi1[j]));
        reduction = std::max(reduction, std::abs(snaps.back().psi2[j] - exact.psi2[j]));
    }
    line.require(reduction < 1e-6, "reduction error " + num(reduction));

    double drift = 0.0;
    for (const auto& s : snaps) {
        const auto c = conserved_quantities(s, kParams);
        drift = std::max({drift, std::abs(c.c_plus - c0.c_plus),
                          std::abs(c.c_minus - c0.c_minus),
                          std::abs(c.p_momentum - c0.p_momentum),
                          std::abs(c.h_energy - c0.h_energy)});
    }
    line.require(drift < 1e-6, "integral drift " + num(drift));
    line.note("reduction " + num(reduction) + ", drift " + num(drift) + ", P-ML " +
              num(p_err));
    return line;
}

Line criterion8_path_independence() {
    Line line;
    const auto f0 = ansatz_field({0.1, 0, 0.1, 0}, kParams, 4.0 * kPi, 256);

    auto two_path_gap = [&](int stride) {
        const auto snaps = evolve(f0, kParams, 1e-3, 2.0, stride);
        const auto a = induce_generic(snaps, kParams, PathOrder::TimeThenSpace);
        const auto b = induce_generic(snaps, kParams, PathOrder::SpaceThenTime);
        double worst = 0.0;
        for (std::size_t v = 0; v < a.points.size(); ++v) {
            worst = std::max(worst, (a.points[v] - b.points[v]).norm());
        }
        return worst;
    };
    const double gap = two_path_gap(20);
    const double gap_fine = two_path_gap(10);
    line.require(gap < 1e-6, "two-path gap " + num(gap));
    line.require(gap_fine < gap, "no refinement improvement (" + num(gap_fine) + ")");

    IntegratorConfig cfg;
    cfg.dt = 2e-4;
    cfg.t1 = 2.0;
    cfg.record_stride = 50;
    const auto traj = integrate({0.1, 0, 0.1, 0}, kParams, cfg);
    std::vector<FieldState> fields;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        fields.push_back(ansatz_field(traj.states[i], kParams, 4.0 * kPi, 256, traj.times[i]));
    }
    const double residual = dirac_residual(fields, kParams);
    line.require(residual < 1e-6, "linear-system residual " + num(residual));
    line.note("gap " + num(gap) + " -> " + num(gap_fine) + " refined, residual " +
              num(residual));
    return line;
}

Line criterion9_curvature() {
    Line line;
    IntegratorConfig cfg;
    cfg.dt = 2.0 * kPi / 256.0;
    cfg.t1 = 2.0 * kPi;
    const auto cyl = integrate({0.5, 0, 0.5, 0}, kParams, cfg);
    const auto cyl_mesh = generate_mesh(cyl, 256, 0.0, 2.0 * kPi, kParams);
    for (double f : cyl_mesh.conformal_factor) {
        if (f != 1.0) {
            line.require(false, "conformal factor not exactly 1: " + num(f));
            break;
        }
    }
    const double k_mid = gauss_curvature_analytic(cyl, cyl.size() / 2);
    line.require(std::abs(k_mid) < 1e-12, "cylinder K " + num(k_mid));

    auto check_metric = [&](const ImmersionMesh& mesh, const char* label) {
        const auto stats = metric_consistency(mesh);
        const double worst = std::max({stats.max_anisotropy, stats.max_obliquity,
                                       stats.max_factor_error});
        line.require(worst < 1e-6, std::string(label) + " metric " + num(worst));
        return worst;
    };
    const double m_cyl = check_metric(cyl_mesh, "cylinder");

    const auto sep = run(separatrix_state(1e-3), 1e-3, 30.0, 10);
    const auto sep_mesh = generate_mesh(sep, 256, 0.0, 2.0 * kPi, kParams);
    const double m_sep = check_metric(sep_mesh, "sphere");

    const auto hel = run({1, 0, 0, 1}, 1e-3, 2.0, 10);
    const auto hel_mesh = generate_mesh(hel, 256, 0.0, 2.0 * kPi, kParams);
    const double m_hel = check_metric(hel_mesh, "helicoid");

    line.note("metric residuals: cyl " + num(m_cyl) + ", sphere " + num(m_sep) +
              ", helicoid " + num(m_hel));
    return line;
}

Line criterion10_periodicity() {
    Line line;
    const PhaseState y0{0.1, 0.0, 0.1, 0.0};
    const auto scout = run(y0, 1e-3, 40.0, 1);
    const auto period = detect_period(scout, 1e-8);
    line.require(period.has_value() && *period > 0.0, "no period detected");
    if (!period) return line;

    const int m = static_cast<int>(std::llround(*period / 1e-3));
    IntegratorConfig cfg;
    cfg.dt = *period / m;
    cfg.t1 = 2.0 * *period;
    const auto traj = integrate(y0, kParams, cfg);
    const double shift = traj.quad[m][2] - traj.quad[0][2];
    double worst = 0.0;
    for (std::size_t i = 0; i + m < traj.size(); i += 53) {
        for (double x : {0.0, 1.3, 3.1, 5.0}) {
            const Vec3 a = immersion_point(traj, i, x, kParams);
            const Vec3 b = immersion_point(traj, i + m, x, kParams);
            worst = std::max(worst, (b - (a + Vec3{0, 0, shift})).norm());
        }
    }
    line.require(worst < 1e-6, "translation residual " + num(worst));
    line.note("T " + num(*period) + ", axial shift " + num(shift) +
              ", translation residual " + num(worst));
    return line;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        std::function<Line()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "equilibrium correctness (rest points, unit cylinder, discrete H)",
         criterion1_equilibrium},
        {2, "first-integral conservation bounds and drift order", criterion2_conservation},
        {3, "classification map against the phase portrait", criterion3_classification},
        {4, "separatrix trajectory builds the radius-2 sphere", criterion4_sphere},
        {5, "screw invariance and pitch of helicoidal runs", criterion5_helicoidal},
        {6, "rotated states give screw-equivalent meshes", criterion6_s1_equivalence},
        {7, "field evolution reduces to the finite flow", criterion7_pde_reduction},
        {8, "coordinate integrals are path independent", criterion8_path_independence},
        {9, "conformal factor, curvature and metric checks", criterion9_curvature},
        {10, "closed cycles translate the surface by one period", criterion10_periodicity},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const Line line = c.fn();
        std::printf("[%s] C%-2d %s%s%s\n", line.pass ? "PASS" : "FAIL", c.id, c.label,
                    line.detail.empty() ? "" : " -- ", line.detail.c_str());
        std::fflush(stdout);
        if (!line.pass) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    } else {
        std::printf("all %zu criteria passed\n", criteria.size());
    }
    return failures == 0 ? 0 : 1;
}
