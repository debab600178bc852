#include "cmcflow/io.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace cmcflow {

std::string fmt17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << "t,p1,p2,q1,q2,H0,M,qx1,qx2,qx3,drift_H0,drift_M\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& y = traj.states[i];
        os << fmt17(traj.times[i]) << ',' << fmt17(y.p1) << ',' << fmt17(y.p2) << ','
           << fmt17(y.q1) << ',' << fmt17(y.q2) << ','
           << fmt17(hamiltonian(y, traj.params)) << ',' << fmt17(angular_integral(y)) << ','
           << fmt17(traj.quad[i][0]) << ',' << fmt17(traj.quad[i][1]) << ','
           << fmt17(traj.quad[i][2]) << ',' << fmt17(traj.drift[i][0]) << ','
           << fmt17(traj.drift[i][1]) << '\n';
    }
}

void write_obj(const ImmersionMesh& mesh, std::ostream& os) {
    for (const auto& p : mesh.points) {
        os << "v " << fmt17(p.x) << ' ' << fmt17(p.y) << ' ' << fmt17(p.z) << '\n';
    }
    for (const auto& f : mesh.faces) {
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
    }
}

void write_field_snapshot_csv(const FieldState& state, std::ostream& os) {
    os << "x,re_psi1,im_psi1,re_psi2,im_psi2\n";
    for (int j = 0; j < state.n(); ++j) {
        os << fmt17(state.x_at(j)) << ',' << fmt17(state.psi1[j].real()) << ','
           << fmt17(state.psi1[j].imag()) << ',' << fmt17(state.psi2[j].real()) << ','
           << fmt17(state.psi2[j].imag()) << '\n';
    }
}

std::string snapshot_sidecar_json(const FieldState& state, const ModelParams& params) {
    nlohmann::json j;
    j["L"] = state.length;
    j["N"] = state.n();
    j["time"] = state.time;
    j["lambda"] = params.lambda;
    j["H"] = params.mean_curvature;
    return j.dump(2) + "\n";
}

void write_conservation_csv(const std::vector<double>& times,
                            const std::vector<ConservedSet>& sets, std::ostream& os) {
    os << "t,re_c_plus,im_c_plus,re_c_minus,im_c_minus,re_p,im_p,re_h,im_h\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& c = sets[i];
        os << fmt17(times[i]) << ',' << fmt17(c.c_plus.real()) << ',' << fmt17(c.c_plus.imag())
           << ',' << fmt17(c.c_minus.real()) << ',' << fmt17(c.c_minus.imag()) << ','
           << fmt17(c.p_momentum.real()) << ',' << fmt17(c.p_momentum.imag()) << ','
           << fmt17(c.h_energy.real()) << ',' << fmt17(c.h_energy.imag()) << '\n';
    }
}

}  // namespace cmcflow
