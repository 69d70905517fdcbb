#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <utility>

#include "chdyn/mesh.hpp"

namespace chdyn {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Which nodal space a coefficient vector lives in.
enum class Space { Bulk, Boundary, Multiplier };

/// Nodal coefficients tagged with their space.
struct FieldVector {
  Space space = Space::Bulk;
  Vector values;
};

SparseMatrix assemble_bulk_mass(const BulkMesh& mesh, bool lumped);
SparseMatrix assemble_bulk_stiffness(const BulkMesh& mesh);
SparseMatrix assemble_boundary_mass(const BoundaryMesh& bmesh, bool lumped);
SparseMatrix assemble_boundary_stiffness(const BoundaryMesh& bmesh);

/// Mortar pairing between the bulk trace and the boundary space.
///
/// The multiplier space is the P1 space on the coarse chain of bulk boundary
/// vertices. `bulk(q, v)` integrates the multiplier hat q against the trace of
/// bulk hat v, `boundary(q, m)` against boundary hat m; the discrete
/// constraint reads `bulk * u - boundary * p = 0`.
struct TraceCoupling {
  SparseMatrix bulk;
  SparseMatrix boundary;
};

TraceCoupling assemble_trace_coupling(const BulkMesh& mesh, const BoundaryMesh& bmesh);

/// Bulk field restricted to the boundary chain (exact for nested chains).
Vector interpolate_trace(const BulkMesh& mesh, const BoundaryMesh& bmesh, const Vector& u);

/// All matrices a simulation needs, assembled once for a (bulk, boundary) pair.
struct Discretization {
  BulkMesh bulk;
  BoundaryMesh boundary;

  SparseMatrix mass;
  SparseMatrix stiffness;
  Vector lumped_mass;

  SparseMatrix boundary_mass;
  SparseMatrix boundary_stiffness;
  Vector boundary_lumped_mass;

  TraceCoupling trace;

  [[nodiscard]] Eigen::Index num_bulk() const { return mass.rows(); }
  [[nodiscard]] Eigen::Index num_boundary() const { return boundary_mass.rows(); }
  [[nodiscard]] Eigen::Index num_multiplier() const { return trace.bulk.rows(); }

  static std::shared_ptr<const Discretization> create(int cells_per_side, int boundary_factor = 1);
  static std::shared_ptr<const Discretization> create(BulkMesh bulk, BoundaryMesh boundary);
};

}  // namespace chdyn
