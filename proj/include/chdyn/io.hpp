#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "chdyn/diagnostics.hpp"
#include "chdyn/experiments.hpp"

namespace chdyn {

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never sees a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

/// Shortest round-trip formatting (%.17g), independent of the global locale.
std::string format_number(double value);

/// `step,t,mass_bulk,mass_surf,mass_total,energy_bulk,energy_surf,energy_total,
/// newton_iters,residual`; row 0 is the initial state.
void write_series_csv(std::ostream& out, const Trajectory& traj);

/// `x,y,value` at the bulk vertices.
void write_bulk_snapshot(std::ostream& out, const BulkMesh& mesh, const Vector& values);
/// `s,x,y,value` at the boundary nodes, s the arc-length coordinate.
void write_boundary_snapshot(std::ostream& out, const BoundaryMesh& bmesh, const Vector& values);

/// u_<step>.csv, w_<step>.csv and (with a boundary) p_<step>.csv in `dir`.
void write_snapshots(const std::filesystem::path& dir, const SystemState& state,
                     const Discretization& disc);

/// One row per (boundary factor, τ); errors, consecutive orders, fitted
/// orders of the factor, and the finest-boundary errors when present.
void write_order_study_csv(std::ostream& out, const OrderStudy& study);
/// One row per ℓ.
void write_ell_sweep_csv(std::ostream& out, const std::vector<EllSweepRow>& rows);

}  // namespace chdyn
