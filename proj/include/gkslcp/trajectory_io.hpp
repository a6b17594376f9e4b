// Trajectory documents and per-node diagnostics.
//
// JSON layout:
//   { "format": "gkslcp-trajectory", "family": "local-full",
//     "grid": {"horizon": T, "steps": M},
//     "maps": [matrix, ...],            one superoperator per node, column-stacking convention
//     "tail_norms": [...], "warnings": [...] }

#pragma once

#include <string>

#include "gkslcp/propagators.hpp"

namespace gkslcp {

/// Norm of the defect of the trace functional, || vec(I)^dagger Lambda - vec(I)^dagger ||_2.
/// Bounds |tr(Lambda rho) - tr(rho)| for every rho with ||rho||_F <= 1.
double trace_deviation(const Superop& map);

json trajectory_to_json(const MapTrajectory& traj);
MapTrajectory trajectory_from_json(const json& doc);

/// Header "t,trace_dev,tail_norm"; tail_norm is empty for non-series families.
std::string trajectory_diagnostics_csv(const MapTrajectory& traj);

}  // namespace gkslcp
