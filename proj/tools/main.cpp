// Command-line front end: integrate orbits, generate surface meshes, sweep
// the reduced phase plane, evolve the periodic field system, and run the
// invariant suite. All outputs are plain files meant for offline inspection.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "cmcflow/field.hpp"
#include "cmcflow/integrator.hpp"
#include "cmcflow/io.hpp"
#include "cmcflow/phase.hpp"
#include "cmcflow/surface.hpp"
#include "cmcflow/verify.hpp"

namespace {

using nlohmann::json;
using namespace cmcflow;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIntegrationError = 3;
constexpr int kExitBlowup = 4;

constexpr double kPi = 3.14159265358979323846;

struct CommonOptions {
    double p1 = 0.0, p2 = 0.0, q1 = 0.0, q2 = 0.0;
    double lambda = 0.5;
    double mean_curvature = 0.5;
    double dt = 1e-3;
    double t_start = 0.0;
    double t_end = 10.0;
    int record_stride = 1;
    double newton_tol = 1e-13;
    int newton_max_iter = 32;
    double tol = 1e-9;
    std::string out_dir = ".";
    std::uint64_t seed = 0;

    PhaseState state() const { return {p1, p2, q1, q2}; }
    ModelParams params() const { return {lambda, mean_curvature}; }
    IntegratorConfig integrator() const {
        IntegratorConfig cfg;
        cfg.dt = dt;
        cfg.t0 = t_start;
        cfg.t1 = t_end;
        cfg.newton_tol = newton_tol;
        cfg.newton_max_iter = newton_max_iter;
        cfg.record_stride = record_stride;
        return cfg;
    }
    json echo() const {
        json j;
        j["p1"] = p1;
        j["p2"] = p2;
        j["q1"] = q1;
        j["q2"] = q2;
        j["lambda"] = lambda;
        j["H"] = mean_curvature;
        j["dt"] = dt;
        j["t-start"] = t_start;
        j["t-end"] = t_end;
        j["record-stride"] = record_stride;
        j["newton-tol"] = newton_tol;
        j["tol"] = tol;
        j["out"] = out_dir;
        j["seed"] = seed;
        return j;
    }
};

// Loads `--config <file>` (scanned ahead of CLI parsing) so file values act
// as defaults that explicit flags then override.
json preload_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw std::domain_error(std::string("cannot open config file ") + argv[i + 1]);
            json j;
            in >> j;
            return j;
        }
    }
    return json::object();
}

template <typename T>
void from_config(const json& cfg, const char* key, T& target) {
    if (cfg.contains(key)) target = cfg.at(key).get<T>();
}

void load_common(const json& cfg, CommonOptions& opt) {
    from_config(cfg, "p1", opt.p1);
    from_config(cfg, "p2", opt.p2);
    from_config(cfg, "q1", opt.q1);
    from_config(cfg, "q2", opt.q2);
    from_config(cfg, "lambda", opt.lambda);
    from_config(cfg, "H", opt.mean_curvature);
    from_config(cfg, "dt", opt.dt);
    from_config(cfg, "t-start", opt.t_start);
    from_config(cfg, "t-end", opt.t_end);
    from_config(cfg, "record-stride", opt.record_stride);
    from_config(cfg, "newton-tol", opt.newton_tol);
    from_config(cfg, "tol", opt.tol);
    from_config(cfg, "out", opt.out_dir);
    from_config(cfg, "seed", opt.seed);
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--p1", opt.p1, "initial p1");
    cmd->add_option("--p2", opt.p2, "initial p2");
    cmd->add_option("--q1", opt.q1, "initial q1");
    cmd->add_option("--q2", opt.q2, "initial q2");
    cmd->add_option("--lambda", opt.lambda, "wavenumber (nonzero)");
    cmd->add_option("--H", opt.mean_curvature, "mean curvature (nonzero)");
    cmd->add_option("--dt", opt.dt, "integrator step size");
    cmd->add_option("--t-start", opt.t_start, "span start");
    cmd->add_option("--t-end", opt.t_end, "span end");
    cmd->add_option("--record-stride", opt.record_stride, "sample every k-th step");
    cmd->add_option("--newton-tol", opt.newton_tol, "implicit solver residual tolerance");
    cmd->add_option("--tol", opt.tol, "classification tolerance");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "seed for randomized checks");
    cmd->add_option("--config", "JSON config file (applied before flags)")
        ->check(CLI::ExistingFile);
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw std::domain_error("cannot write " + path.string());
    return out;
}

json classification_json(const SurfaceClass& cls) {
    json j;
    j["class"] = to_string(cls.family);
    j["energy"] = cls.energy;
    j["angular"] = cls.angular;
    return j;
}

std::optional<double> maybe_period(const Trajectory& traj, double tol) {
    if (traj.size() < 3) return std::nullopt;
    return detect_period(traj, tol);
}

void set_period(json& j, const std::optional<double>& period) {
    if (period) {
        j["period"] = *period;
    } else {
        j["period"] = nullptr;
    }
}

int cmd_trajectory(const CommonOptions& opt) {
    opt.params().validate();
    opt.integrator().validate();
    const auto traj = integrate(opt.state(), opt.params(), opt.integrator());
    const auto cls = classify(opt.state(), opt.params(), opt.tol);

    auto csv = open_output(opt.out_dir, "trajectory.csv");
    write_trajectory_csv(traj, csv);

    json summary = classification_json(cls);
    set_period(summary, maybe_period(traj, 1e-8));
    summary["max_drift_H0"] = traj.max_drift_energy();
    summary["max_drift_M"] = traj.max_drift_angular();
    summary["samples"] = traj.size();
    summary["config"] = opt.echo();
    auto js = open_output(opt.out_dir, "trajectory_summary.json");
    js << summary.dump(2) << '\n';
    return kExitOk;
}

struct SurfaceOptions {
    CommonOptions common;
    int x_count = 200;
    double x_min = 0.0;
    double x_max = 2.0 * kPi;
};

int cmd_surface(const SurfaceOptions& opt) {
    opt.common.params().validate();
    opt.common.integrator().validate();
    const auto params = opt.common.params();
    const auto cls = classify(opt.common.state(), params, opt.common.tol);
    if (cls.family == SurfaceFamily::Degenerate) {
        throw std::domain_error("degenerate initial data: the origin induces no surface");
    }

    const auto traj = integrate(opt.common.state(), params, opt.common.integrator());

    ImmersionMesh mesh;
    double residual = 0.0;
    const double m = angular_integral(opt.common.state());
    if (params.closed_form_immersion()) {
        mesh = generate_mesh(traj, opt.x_count, opt.x_min, opt.x_max, params);
        residual = helicoidal_invariance_residual(traj, params, {0.1, 1.0, 2.7},
                                                  screw_axis_point(opt.common.state()));
    } else {
        // General parameters go through the path-quadrature inducer over one
        // spatial period of the ansatz.
        const double length = 2.0 * kPi / std::abs(params.lambda);
        int n = std::max(16, opt.x_count);
        if (n % 2 != 0) ++n;
        std::vector<FieldState> fields;
        fields.reserve(traj.size());
        for (std::size_t i = 0; i < traj.size(); ++i) {
            fields.push_back(ansatz_field(traj.states[i], params, length, n, traj.times[i]));
        }
        mesh = induce_generic(fields, params, PathOrder::TimeThenSpace);
        residual = helicoidal_invariance_residual_mesh(mesh, m,
                                                       screw_axis_point(opt.common.state()));
    }

    auto obj = open_output(opt.common.out_dir, "surface.obj");
    write_obj(mesh, obj);

    const auto h = mean_curvature_discrete(mesh);
    json report = classification_json(cls);
    set_period(report, maybe_period(traj, 1e-8));
    report["vertex_count"] = mesh.points.size();
    report["face_count"] = mesh.faces.size();
    report["H_discrete_median"] = finite_median(h);
    report["H_discrete_iqr"] = finite_iqr(h);
    report["helicoidal_residual"] = residual;
    report["config"] = opt.common.echo();
    report["config"]["x-count"] = opt.x_count;
    report["config"]["x-min"] = opt.x_min;
    report["config"]["x-max"] = opt.x_max;
    auto js = open_output(opt.common.out_dir, "surface_report.json");
    js << report.dump(2) << '\n';
    return kExitOk;
}

struct PortraitOptions {
    CommonOptions common;
    double p_min = -1.0, p_max = 1.0, q_min = -1.0, q_max = 1.0;
    int resolution = 201;
};

int cmd_phase_portrait(const PortraitOptions& opt) {
    const auto params = opt.common.params();
    params.validate();
    if (opt.resolution < 2) throw std::domain_error("resolution must be at least 2");

    auto csv = open_output(opt.common.out_dir, "phase_portrait.csv");
    csv << "p1,q1,H0,class,annotation\n";
    auto emit = [&](double p, double q, const char* annotation) {
        const PhaseState y{p, 0.0, q, 0.0};
        const auto cls = classify(y, params, opt.common.tol);
        csv << fmt17(p) << ',' << fmt17(q) << ',' << fmt17(cls.energy) << ','
            << to_string(cls.family) << ',' << annotation << '\n';
    };

    for (int i = 0; i < opt.resolution; ++i) {
        const double p = opt.p_min + (opt.p_max - opt.p_min) * i / (opt.resolution - 1.0);
        for (int j = 0; j < opt.resolution; ++j) {
            const double q = opt.q_min + (opt.q_max - opt.q_min) * j / (opt.resolution - 1.0);
            emit(p, q, "");
        }
    }
    for (const auto& e : equilibria(params)) emit(e.p1, e.q1, "equilibrium");
    // Zero-energy level in polar form: c^2 = (lambda / H) sin(2 theta) on the
    // quadrants where the right side is positive.
    const double ratio = params.lambda / params.mean_curvature;
    for (int k = 0; k < 256; ++k) {
        const double theta = (k + 0.5) * kPi / 256.0;
        for (double branch : {0.0, kPi}) {
            const double c2 = ratio * std::sin(2.0 * theta);
            if (c2 <= 0.0) continue;
            const double c = std::sqrt(c2);
            emit(c * std::cos(theta + branch), c * std::sin(theta + branch), "separatrix");
        }
    }
    return kExitOk;
}

struct PdeOptions {
    CommonOptions common;
    int grid = 256;
    double length = 4.0 * kPi;
    int snapshot_stride = 100;
    int mode_cutoff = 6;
    std::string init = "ansatz";
    double amplitude = 0.05;
    int max_mode = 3;
};

int cmd_pde(const PdeOptions& opt) {
    const auto params = opt.common.params();
    params.validate();
    if (opt.grid < 16 || opt.grid % 2 != 0) {
        throw std::domain_error("grid size must be even and at least 16");
    }

    FieldState f0;
    if (opt.init == "ansatz") {
        f0 = ansatz_field(opt.common.state(), params, opt.length, opt.grid);
    } else if (opt.init == "random") {
        std::mt19937_64 rng(opt.common.seed);
        f0 = random_smooth_field(opt.length, opt.grid, opt.amplitude, opt.max_mode, rng);
    } else if (opt.init == "zero") {
        f0.length = opt.length;
        f0.psi1.assign(opt.grid, 0.0);
        f0.psi2.assign(opt.grid, 0.0);
    } else {
        throw std::domain_error("init must be one of: ansatz, random, zero");
    }

    const auto snaps = evolve(f0, params, opt.common.dt, opt.common.t_end,
                              opt.snapshot_stride, opt.mode_cutoff);

    std::vector<double> times;
    std::vector<ConservedSet> sets;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%04zu.csv", i);
        auto csv = open_output(opt.common.out_dir, name);
        write_field_snapshot_csv(snaps[i], csv);
        std::snprintf(name, sizeof(name), "snapshot_%04zu.meta.json", i);
        auto meta = open_output(opt.common.out_dir, name);
        meta << snapshot_sidecar_json(snaps[i], params);
        times.push_back(snaps[i].time);
        sets.push_back(conserved_quantities(snaps[i], params));
    }
    auto csv = open_output(opt.common.out_dir, "conservation.csv");
    write_conservation_csv(times, sets, csv);

    json summary;
    double reality = 0.0;
    double drifts[4] = {0, 0, 0, 0};
    for (const auto& c : sets) {
        reality = std::max(reality, c.reality_defect);
        drifts[0] = std::max(drifts[0], std::abs(c.c_plus - sets.front().c_plus));
        drifts[1] = std::max(drifts[1], std::abs(c.c_minus - sets.front().c_minus));
        drifts[2] = std::max(drifts[2], std::abs(c.p_momentum - sets.front().p_momentum));
        drifts[3] = std::max(drifts[3], std::abs(c.h_energy - sets.front().h_energy));
    }
    summary["max_drift_c_plus"] = drifts[0];
    summary["max_drift_c_minus"] = drifts[1];
    summary["max_drift_p"] = drifts[2];
    summary["max_drift_h"] = drifts[3];
    summary["reality_defect"] = reality;

    if (opt.init == "ansatz") {
        IntegratorConfig ref_cfg;
        ref_cfg.dt = std::min(opt.common.dt, 1e-4);
        ref_cfg.t1 = opt.common.t_end;
        ref_cfg.record_stride = 1 << 30;
        const auto ref = integrate(opt.common.state(), params, ref_cfg);
        const auto exact = ansatz_field(ref.states.back(), params, opt.length, opt.grid,
                                        opt.common.t_end);
        double err = 0.0;
        for (int j = 0; j < opt.grid; ++j) {
            err = std::max(err, std::abs(snaps.back().psi1[j] - exact.psi1[j]));
            err = std::max(err, std::abs(snaps.back().psi2[j] - exact.psi2[j]));
        }
        summary["reduction_error"] = err;
    }

    summary["snapshots"] = snaps.size();
    summary["config"] = opt.common.echo();
    summary["config"]["N"] = opt.grid;
    summary["config"]["L"] = opt.length;
    summary["config"]["snapshot-stride"] = opt.snapshot_stride;
    summary["config"]["mode-cutoff"] = opt.mode_cutoff;
    summary["config"]["init"] = opt.init;
    auto js = open_output(opt.common.out_dir, "pde_summary.json");
    js << summary.dump(2) << '\n';
    return kExitOk;
}

struct VerifyOptions {
    std::string filter;
    std::uint64_t seed = 0;
    std::optional<double> tol_override;
};

int cmd_verify(const VerifyOptions& opt) {
    const auto results = run_verification(opt.seed, opt.tol_override, opt.filter);
    if (results.empty()) {
        std::cerr << "no checks match filter '" << opt.filter << "'\n";
        return kExitConfigError;
    }
    std::size_t name_width = 0;
    for (const auto& r : results) name_width = std::max(name_width, r.name.size());
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%s] %-*s measured %.3e  threshold %.3e  (%s)\n",
                    r.pass ? "PASS" : "FAIL", static_cast<int>(name_width), r.name.c_str(),
                    r.measured, r.threshold, r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constant-mean-curvature surfaces from an integrable reduced flow"};
    app.require_subcommand(1);

    json file_config;
    try {
        file_config = preload_config(argc, argv);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfigError;
    }

    CommonOptions traj_opt;
    load_common(file_config, traj_opt);
    auto* traj_cmd = app.add_subcommand("trajectory", "integrate one orbit and classify it");
    add_common_flags(traj_cmd, traj_opt);

    SurfaceOptions surf_opt;
    load_common(file_config, surf_opt.common);
    from_config(file_config, "x-count", surf_opt.x_count);
    from_config(file_config, "x-min", surf_opt.x_min);
    from_config(file_config, "x-max", surf_opt.x_max);
    auto* surf_cmd = app.add_subcommand("surface", "generate the immersed surface mesh");
    add_common_flags(surf_cmd, surf_opt.common);
    surf_cmd->add_option("--x-count", surf_opt.x_count, "grid columns across the profile");
    surf_cmd->add_option("--x-min", surf_opt.x_min, "profile parameter start");
    surf_cmd->add_option("--x-max", surf_opt.x_max, "profile parameter end");

    PortraitOptions port_opt;
    load_common(file_config, port_opt.common);
    from_config(file_config, "resolution", port_opt.resolution);
    auto* port_cmd = app.add_subcommand("phase-portrait",
                                        "classify a grid of the reduced plane");
    add_common_flags(port_cmd, port_opt.common);
    port_cmd->add_option("--p-min", port_opt.p_min, "grid lower bound in p1");
    port_cmd->add_option("--p-max", port_opt.p_max, "grid upper bound in p1");
    port_cmd->add_option("--q-min", port_opt.q_min, "grid lower bound in q1");
    port_cmd->add_option("--q-max", port_opt.q_max, "grid upper bound in q1");
    port_cmd->add_option("--resolution", port_opt.resolution, "grid points per axis");

    PdeOptions pde_opt;
    pde_opt.common.t_end = 5.0;
    load_common(file_config, pde_opt.common);
    from_config(file_config, "N", pde_opt.grid);
    from_config(file_config, "L", pde_opt.length);
    from_config(file_config, "init", pde_opt.init);
    auto* pde_cmd = app.add_subcommand("pde", "evolve the periodic field system");
    add_common_flags(pde_cmd, pde_opt.common);
    pde_cmd->add_option("--N", pde_opt.grid, "spatial grid size (even, >= 16)");
    pde_cmd->add_option("--L", pde_opt.length, "domain length");
    pde_cmd->add_option("--snapshot-stride", pde_opt.snapshot_stride, "steps between snapshots");
    pde_cmd->add_option("--mode-cutoff", pde_opt.mode_cutoff, "retained Fourier band");
    pde_cmd->add_option("--init", pde_opt.init, "initial data: ansatz | random | zero");
    pde_cmd->add_option("--amplitude", pde_opt.amplitude, "random data amplitude");
    pde_cmd->add_option("--max-mode", pde_opt.max_mode, "random data mode range");

    VerifyOptions verify_opt;
    double verify_tol = -1.0;
    auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
    verify_cmd->add_option("--filter", verify_opt.filter, "run only checks containing this text");
    verify_cmd->add_option("--seed", verify_opt.seed, "seed for randomized checks");
    auto* tol_flag = verify_cmd->add_option("--tol", verify_tol,
                                            "override every check threshold");
    verify_cmd->add_option("--config", "accepted for symmetry; verify reads no config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (*traj_cmd) return cmd_trajectory(traj_opt);
        if (*surf_cmd) return cmd_surface(surf_opt);
        if (*port_cmd) return cmd_phase_portrait(port_opt);
        if (*pde_cmd) return cmd_pde(pde_opt);
        if (*verify_cmd) {
            if (tol_flag->count() > 0) verify_opt.tol_override = verify_tol;
            return cmd_verify(verify_opt);
        }
    } catch (const FieldBlowupError& err) {
        std::cerr << "error: " << err.what() << " (t = " << err.blowup_time
                  << ", magnitude " << err.max_magnitude << ")\n";
        return kExitBlowup;
    } catch (const IntegrationError& err) {
        std::cerr << "error: " << err.what() << " (residual " << err.residual_norm << ")\n";
        return kExitIntegrationError;
    } catch (const std::domain_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}
