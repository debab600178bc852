// Line-based, diffable output formats: trajectory CSV, OBJ meshes, field
// snapshots and conservation reports. Floats are written with 17 significant
// digits so identical runs produce byte-identical files.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cmcflow/field.hpp"
#include "cmcflow/integrator.hpp"
#include "cmcflow/surface.hpp"

namespace cmcflow {

/// Shortest-width 17-significant-digit rendering of a double.
std::string fmt17(double value);

/// Columns: t,p1,p2,q1,q2,H0,M,qx1,qx2,qx3,drift_H0,drift_M (header mandatory).
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// Wavefront OBJ: `v x y z` per vertex in row-major order, then 1-based quad
/// `f` lines.
void write_obj(const ImmersionMesh& mesh, std::ostream& os);

/// Rows of (x, Re psi1, Im psi1, Re psi2, Im psi2).
void write_field_snapshot_csv(const FieldState& state, std::ostream& os);

/// JSON sidecar {L, N, time, lambda, H} for a snapshot file.
std::string snapshot_sidecar_json(const FieldState& state, const ModelParams& params);

/// Columns: t plus real/imaginary parts of the four conserved integrals.
void write_conservation_csv(const std::vector<double>& times,
                            const std::vector<ConservedSet>& sets, std::ostream& os);

}  // namespace cmcflow
