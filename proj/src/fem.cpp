#include "chdyn/fem.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "chdyn/errors.hpp"

namespace chdyn {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseMatrix diagonal(const Vector& d) {
  Triplets t;
  t.reserve(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  return from_triplets(d.size(), d.size(), t);
}

// Integral over an interval of length `len` of the product of two linear
// functions given by their endpoint values.
double linear_product(double len, double fa, double fb, double ga, double gb) {
  return len / 6.0 * (2.0 * fa * ga + fa * gb + fb * ga + 2.0 * fb * gb);
}

}  // namespace

SparseMatrix assemble_bulk_mass(const BulkMesh& mesh, bool lumped) {
  const int nv = mesh.num_vertices();
  if (lumped) {
    Vector d = Vector::Zero(nv);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const double area = mesh.signed_area(t);
      for (int v : mesh.triangles[t]) d[v] += area / 3.0;
    }
    return diagonal(d);
  }
  Triplets trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        trips.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
      }
    }
  }
  return from_triplets(nv, nv, trips);
}

SparseMatrix assemble_bulk_stiffness(const BulkMesh& mesh) {
  const int nv = mesh.num_vertices();
  Triplets trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    // grad phi_a = rot90(opposite edge) / (2 area)
    std::array<double, 3> gx{}, gy{};
    for (int a = 0; a < 3; ++a) {
      const Point& p = mesh.vertices[tri[(a + 1) % 3]];
      const Point& q = mesh.vertices[tri[(a + 2) % 3]];
      gx[a] = (p.y - q.y) / (2.0 * area);
      gy[a] = (q.x - p.x) / (2.0 * area);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        trips.emplace_back(tri[a], tri[b], area * (gx[a] * gx[b] + gy[a] * gy[b]));
      }
    }
  }
  return from_triplets(nv, nv, trips);
}

SparseMatrix assemble_boundary_mass(const BoundaryMesh& bmesh, bool lumped) {
  const int n = bmesh.num_nodes();
  if (lumped) {
    Vector d = Vector::Zero(n);
    for (int e = 0; e < n; ++e) {
      const double len = bmesh.edge_length(e);
      d[bmesh.edges[e][0]] += 0.5 * len;
      d[bmesh.edges[e][1]] += 0.5 * len;
    }
    return diagonal(d);
  }
  Triplets trips;
  trips.reserve(4 * n);
  for (int e = 0; e < n; ++e) {
    const double len = bmesh.edge_length(e);
    const auto [a, b] = bmesh.edges[e];
    trips.emplace_back(a, a, len / 3.0);
    trips.emplace_back(b, b, len / 3.0);
    trips.emplace_back(a, b, len / 6.0);
    trips.emplace_back(b, a, len / 6.0);
  }
  return from_triplets(n, n, trips);
}

SparseMatrix assemble_boundary_stiffness(const BoundaryMesh& bmesh) {
  const int n = bmesh.num_nodes();
  Triplets trips;
  trips.reserve(4 * n);
  for (int e = 0; e < n; ++e) {
    const double inv = 1.0 / bmesh.edge_length(e);
    const auto [a, b] = bmesh.edges[e];
    trips.emplace_back(a, a, inv);
    trips.emplace_back(b, b, inv);
    trips.emplace_back(a, b, -inv);
    trips.emplace_back(b, a, -inv);
  }
  return from_triplets(n, n, trips);
}

TraceCoupling assemble_trace_coupling(const BulkMesh& mesh, const BoundaryMesh& bmesh) {
  const int coarse = static_cast<int>(mesh.boundary_vertices.size());
  if (bmesh.coarse_edges != coarse ||
      std::abs(bmesh.coarse_edge_length - mesh.mesh_size()) > 1e-14) {
    throw InvalidArgument(
        "assemble_trace_coupling: boundary chain with " + std::to_string(bmesh.coarse_edges) +
        " coarse edges is not nested in a bulk trace with " + std::to_string(coarse) + " edges");
  }
  const int fine = bmesh.num_nodes();
  for (int k = 0; k < fine; ++k) {
    const auto& loc = bmesh.parent_map[k];
    if (loc.coarse_edge < 0 || loc.coarse_edge >= coarse || loc.local < 0.0 || loc.local >= 1.0) {
      throw InvalidArgument("assemble_trace_coupling: invalid parent location at node " +
                            std::to_string(k));
    }
  }

  TraceCoupling out;
  Triplets bulk;
  bulk.reserve(4 * coarse);
  for (int e = 0; e < coarse; ++e) {
    const double len = mesh.mesh_size();
    const int q0 = e;
    const int q1 = (e + 1) % coarse;
    const int v0 = mesh.boundary_vertices[q0];
    const int v1 = mesh.boundary_vertices[q1];
    bulk.emplace_back(q0, v0, len / 3.0);
    bulk.emplace_back(q1, v1, len / 3.0);
    bulk.emplace_back(q0, v1, len / 6.0);
    bulk.emplace_back(q1, v0, len / 6.0);
  }
  out.bulk = from_triplets(coarse, mesh.num_vertices(), bulk);

  // The multiplier hats are linear on every fine edge, so the two-point
  // product formula integrates exactly on the merged partition.
  Triplets bnd;
  bnd.reserve(8 * fine);
  for (int e = 0; e < fine; ++e) {
    const auto [a, b] = bmesh.edges[e];
    const auto& la = bmesh.parent_map[a];
    const auto& lb = bmesh.parent_map[b];
    const int ce = la.coarse_edge;
    const double ta = la.local;
    const double tb = lb.coarse_edge == ce ? lb.local : 1.0;
    const double len = bmesh.edge_length(e);
    const int q0 = ce;
    const int q1 = (ce + 1) % coarse;
    // coarse hat values at the fine edge endpoints
    const double psi0a = 1.0 - ta, psi0b = 1.0 - tb;
    const double psi1a = ta, psi1b = tb;
    bnd.emplace_back(q0, a, linear_product(len, psi0a, psi0b, 1.0, 0.0));
    bnd.emplace_back(q0, b, linear_product(len, psi0a, psi0b, 0.0, 1.0));
    bnd.emplace_back(q1, a, linear_product(len, psi1a, psi1b, 1.0, 0.0));
    bnd.emplace_back(q1, b, linear_product(len, psi1a, psi1b, 0.0, 1.0));
  }
  out.boundary = from_triplets(coarse, fine, bnd);
  out.boundary.prune(0.0);
  return out;
}

Vector interpolate_trace(const BulkMesh& mesh, const BoundaryMesh& bmesh, const Vector& u) {
  const int coarse = static_cast<int>(mesh.boundary_vertices.size());
  if (u.size() != mesh.num_vertices()) {
    throw InvalidArgument("interpolate_trace: bulk vector has wrong length");
  }
  if (bmesh.coarse_edges != coarse) {
    throw InvalidArgument("interpolate_trace: boundary chain is not nested in the bulk trace");
  }
  Vector p(bmesh.num_nodes());
  for (int k = 0; k < bmesh.num_nodes(); ++k) {
    const auto& loc = bmesh.parent_map[k];
    const double a = u[mesh.boundary_vertices[loc.coarse_edge]];
    const double b = u[mesh.boundary_vertices[(loc.coarse_edge + 1) % coarse]];
    p[k] = loc.local == 0.0 ? a : (1.0 - loc.local) * a + loc.local * b;
  }
  return p;
}

std::shared_ptr<const Discretization> Discretization::create(int cells_per_side,
                                                             int boundary_factor) {
  BulkMesh bulk = build_unit_square_crisscross(cells_per_side);
  BoundaryMesh boundary = refine_boundary_chain(extract_boundary_chain(bulk), boundary_factor);
  return create(std::move(bulk), std::move(boundary));
}

std::shared_ptr<const Discretization> Discretization::create(BulkMesh bulk, BoundaryMesh boundary) {
  auto d = std::make_shared<Discretization>();
  d->mass = assemble_bulk_mass(bulk, false);
  d->stiffness = assemble_bulk_stiffness(bulk);
  d->lumped_mass = assemble_bulk_mass(bulk, true).diagonal();
  d->boundary_mass = assemble_boundary_mass(boundary, false);
  d->boundary_stiffness = assemble_boundary_stiffness(boundary);
  d->boundary_lumped_mass = assemble_boundary_mass(boundary, true).diagonal();
  d->trace = assemble_trace_coupling(bulk, boundary);
  d->bulk = std::move(bulk);
  d->boundary = std::move(boundary);
  return d;
}

}  // namespace chdyn
