#include "cmcflow/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmcflow {

namespace {

constexpr double kDegenerateArea = 1e-14;

struct Antiderivatives {
    double a;  // p1^2 + q1^2 - p2^2 - q2^2
    double b;  // 2 (p1 p2 + q1 q2)
    double m;  // angular integral
};

Antiderivatives coefficients(const PhaseState& y) {
    return {
        y.p1 * y.p1 + y.q1 * y.q1 - y.p2 * y.p2 - y.q2 * y.q2,
        2.0 * (y.p1 * y.p2 + y.q1 * y.q2),
        angular_integral(y),
    };
}

Vec3 x_leg(const PhaseState& y, double x) {
    const auto [a, b, m] = coefficients(y);
    const double sx = std::sin(x);
    const double cx1 = std::cos(x) - 1.0;
    return {
        2.0 * (a * sx + b * cx1),
        2.0 * (b * sx - a * cx1),
        4.0 * m * x,
    };
}

void check_uniform_grid(const Trajectory& traj) {
    if (traj.size() < 5) {
        throw std::out_of_range("gauss_curvature_analytic: need at least 5 samples");
    }
    const double h = traj.times[1] - traj.times[0];
    for (std::size_t i = 2; i < traj.size(); ++i) {
        if (std::abs((traj.times[i] - traj.times[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            throw std::domain_error("gauss_curvature_analytic: non-uniform time grid");
        }
    }
}

}  // namespace

SpinorSample psi_at(const PhaseState& state, double x, const ModelParams& params) {
    const cdouble phase = std::exp(cdouble(0.0, params.lambda * x));
    return {state.r() * phase, state.s() * phase};
}

Vec3 immersion_point(const Trajectory& traj, std::size_t sample_index, double x,
                     const ModelParams& params) {
    if (!params.closed_form_immersion()) {
        throw UnsupportedParametersError(
            "immersion_point: closed form requires lambda = H = 1/2; "
            "use the generic field inducer for other parameters");
    }
    if (sample_index >= traj.size()) {
        throw std::out_of_range("immersion_point: sample index out of range");
    }
    const auto& quad = traj.quad[sample_index];
    const Vec3 base{quad[0], quad[1], quad[2]};
    return base + x_leg(traj.states[sample_index], x);
}

ImmersionMesh generate_mesh(const Trajectory& traj, int x_count, double x_min,
                            double x_max, const ModelParams& params) {
    if (traj.empty()) throw std::domain_error("generate_mesh: empty trajectory");
    if (x_count < 3) throw std::domain_error("generate_mesh: x_count must be >= 3");
    if (!(x_max > x_min)) throw std::domain_error("generate_mesh: empty x span");

    const std::size_t nt = traj.size();
    const std::size_t nx = static_cast<std::size_t>(x_count);

    ImmersionMesh mesh;
    mesh.t_values = traj.times;
    mesh.x_values.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) {
        mesh.x_values[j] = x_min + (x_max - x_min) * static_cast<double>(j) /
                                       static_cast<double>(nx - 1);
    }

    mesh.points.resize(nt * nx);
    mesh.conformal_factor.resize(nt * nx);
    for (std::size_t i = 0; i < nt; ++i) {
        const double cf = conformal_factor(traj.states[i]);
        for (std::size_t j = 0; j < nx; ++j) {
            mesh.points[mesh.vertex_index(i, j)] = immersion_point(traj, i, mesh.x_values[j], params);
            mesh.conformal_factor[mesh.vertex_index(i, j)] = cf;
        }
    }

    // Row-wise Gauss curvature; edge rows replicate the nearest interior value
    // (short trajectories without a full stencil report zero).
    std::vector<double> row_k(nt, 0.0);
    if (nt >= 5) {
        for (std::size_t i = 2; i + 2 < nt; ++i) row_k[i] = gauss_curvature_analytic(traj, i);
        row_k[0] = row_k[1] = row_k[2];
        row_k[nt - 1] = row_k[nt - 2] = row_k[nt - 3];
    }
    mesh.gauss_curvature.resize(nt * nx);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nx; ++j) mesh.gauss_curvature[mesh.vertex_index(i, j)] = row_k[i];
    }

    if (nt >= 2) {
        mesh.faces.reserve((nt - 1) * (nx - 1));
        for (std::size_t i = 0; i + 1 < nt; ++i) {
            for (std::size_t j = 0; j + 1 < nx; ++j) {
                mesh.faces.push_back({static_cast<int>(mesh.vertex_index(i, j)),
                                      static_cast<int>(mesh.vertex_index(i + 1, j)),
                                      static_cast<int>(mesh.vertex_index(i + 1, j + 1)),
                                      static_cast<int>(mesh.vertex_index(i, j + 1))});
            }
        }
    }
    return mesh;
}

Vec3 helicoidal_transform(const Vec3& pt, double tau, double angular) {
    const double c = std::cos(tau);
    const double s = std::sin(tau);
    return {pt.x * c - pt.y * s, pt.x * s + pt.y * c, pt.z + 4.0 * angular * tau};
}

Vec3 helicoidal_transform_about(const Vec3& pt, double tau, double angular,
                                const Vec3& axis_point) {
    const Vec3 shifted{pt.x - axis_point.x, pt.y - axis_point.y, pt.z};
    const Vec3 rotated = helicoidal_transform(shifted, tau, angular);
    return {rotated.x + axis_point.x, rotated.y + axis_point.y, rotated.z};
}

Vec3 screw_axis_point(const PhaseState& y0) {
    const auto [a0, b0, m0] = coefficients(y0);
    (void)m0;
    return {-2.0 * b0, 2.0 * a0, 0.0};
}

double helicoidal_invariance_residual(const Trajectory& traj, const ModelParams& params,
                                      const std::vector<double>& taus,
                                      const Vec3& axis_point) {
    if (traj.empty()) throw std::domain_error("helicoidal_invariance_residual: empty trajectory");
    const double m = angular_integral(traj.states.front());
    const std::size_t stride = std::max<std::size_t>(1, traj.size() / 16);
    const std::vector<double> xs = {0.0, 0.7, 1.9, 3.5, 5.2};

    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); i += stride) {
        for (double x : xs) {
            const Vec3 p = immersion_point(traj, i, x, params);
            for (double tau : taus) {
                const Vec3 shifted = immersion_point(traj, i, x + tau, params);
                const Vec3 moved = helicoidal_transform_about(p, tau, m, axis_point);
                worst = std::max(worst, (shifted - moved).norm());
            }
        }
    }
    return worst;
}

double helicoidal_invariance_residual_mesh(const ImmersionMesh& mesh, double angular,
                                           const Vec3& axis_point, int max_shift) {
    const std::size_t nt = mesh.t_count();
    const std::size_t nx = mesh.x_count();
    if (nx < 2) return 0.0;
    const double hx = mesh.x_values[1] - mesh.x_values[0];
    double worst = 0.0;
    for (int k = 1; k <= max_shift && static_cast<std::size_t>(k) < nx; ++k) {
        const double tau = k * hx;
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j + k < nx; ++j) {
                const Vec3 moved =
                    helicoidal_transform_about(mesh.at(i, j), tau, angular, axis_point);
                worst = std::max(worst, (mesh.at(i, j + k) - moved).norm());
            }
        }
    }
    return worst;
}

double conformal_factor(const PhaseState& y) {
    const double rho = y.rho();
    return 4.0 * rho * rho;
}

double gauss_curvature_analytic(const Trajectory& traj, std::size_t sample_index) {
    check_uniform_grid(traj);
    if (sample_index < 2 || sample_index + 2 >= traj.size()) {
        throw std::out_of_range("gauss_curvature_analytic: sample needs two neighbors per side");
    }
    const double h = traj.times[1] - traj.times[0];
    auto log_rho = [&](std::size_t i) { return std::log(traj.states[i].rho()); };
    const double second =
        (-log_rho(sample_index - 2) + 16.0 * log_rho(sample_index - 1) -
         30.0 * log_rho(sample_index) + 16.0 * log_rho(sample_index + 1) -
         log_rho(sample_index + 2)) /
        (12.0 * h * h);
    const double rho = traj.states[sample_index].rho();
    return -0.25 * second / (rho * rho);
}

std::vector<double> mean_curvature_discrete(const ImmersionMesh& mesh) {
    const std::size_t n = mesh.points.size();
    std::vector<Vec3> lap(n, Vec3{});
    std::vector<Vec3> normal(n, Vec3{});
    std::vector<double> area(n, 0.0);
    std::vector<bool> excluded(n, false);

    auto accumulate_triangle = [&](int ia, int ib, int ic) {
        const Vec3& a = mesh.points[ia];
        const Vec3& b = mesh.points[ib];
        const Vec3& c = mesh.points[ic];
        const Vec3 cross = (b - a).cross(c - a);
        const double tri_area = 0.5 * cross.norm();
        if (tri_area < kDegenerateArea) {
            excluded[ia] = excluded[ib] = excluded[ic] = true;
            return;
        }
        const double inv4a = 1.0 / (4.0 * tri_area);
        // cot of the angle at each corner from the opposite edge lengths
        const double la2 = (c - b).dot(c - b);
        const double lb2 = (a - c).dot(a - c);
        const double lc2 = (b - a).dot(b - a);
        const double cot_a = (lb2 + lc2 - la2) * inv4a;
        const double cot_b = (la2 + lc2 - lb2) * inv4a;
        const double cot_c = (la2 + lb2 - lc2) * inv4a;
        // Edge (b,c) is opposite corner a, etc.
        lap[ib] += (b - c) * cot_a;
        lap[ic] += (c - b) * cot_a;
        lap[ia] += (a - c) * cot_b;
        lap[ic] += (c - a) * cot_b;
        lap[ia] += (a - b) * cot_c;
        lap[ib] += (b - a) * cot_c;
        const double third = tri_area / 3.0;
        area[ia] += third;
        area[ib] += third;
        area[ic] += third;
        const Vec3 weighted = cross * 0.5;
        normal[ia] += weighted;
        normal[ib] += weighted;
        normal[ic] += weighted;
    };

    for (const auto& face : mesh.faces) {
        accumulate_triangle(face[0], face[1], face[2]);
        accumulate_triangle(face[0], face[2], face[3]);
    }

    const std::size_t nt = mesh.t_count();
    const std::size_t nx = mesh.x_count();
    std::vector<double> h(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i + 1 < nt; ++i) {
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            const std::size_t v = mesh.vertex_index(i, j);
            if (excluded[v] || area[v] <= 0.0) continue;
            const Vec3 k_vec = lap[v] / (2.0 * area[v]);
            h[v] = 0.5 * k_vec.dot(normal[v].normalized());
        }
    }
    return h;
}

double finite_median(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double finite_iqr(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    return quantile(0.75) - quantile(0.25);
}

MetricStats metric_consistency(const ImmersionMesh& mesh) {
    MetricStats stats;
    const std::size_t nt = mesh.t_count();
    const std::size_t nx = mesh.x_count();
    if (nt < 5 || nx < 5) return stats;
    const double ht = mesh.t_values[1] - mesh.t_values[0];
    const double hx = mesh.x_values[1] - mesh.x_values[0];

    auto stencil = [](const Vec3& m2, const Vec3& m1, const Vec3& p1, const Vec3& p2,
                      double h) {
        return (m2 - p2 + (p1 - m1) * 8.0) / (12.0 * h);
    };

    for (std::size_t i = 2; i + 2 < nt; ++i) {
        for (std::size_t j = 2; j + 2 < nx; ++j) {
            const Vec3 xt = stencil(mesh.at(i - 2, j), mesh.at(i - 1, j), mesh.at(i + 1, j),
                                    mesh.at(i + 2, j), ht);
            const Vec3 xx = stencil(mesh.at(i, j - 2), mesh.at(i, j - 1), mesh.at(i, j + 1),
                                    mesh.at(i, j + 2), hx);
            const double gt = xt.dot(xt);
            const double gx = xx.dot(xx);
            stats.max_anisotropy = std::max(stats.max_anisotropy, std::abs(gx - gt));
            stats.max_obliquity = std::max(stats.max_obliquity, std::abs(xt.dot(xx)));
            stats.max_factor_error = std::max(
                stats.max_factor_error,
                std::abs(gx - mesh.conformal_factor[mesh.vertex_index(i, j)]));
        }
    }
    return stats;
}

}  // namespace cmcflow
