#include "chdyn/mesh.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "chdyn/errors.hpp"

namespace chdyn {

double BulkMesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point& a = vertices[tri[0]];
  const Point& b = vertices[tri[1]];
  const Point& c = vertices[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double BoundaryMesh::edge_length(int e) const {
  const auto& [a, b] = edges[e];
  double len = nodes[b] - nodes[a];
  if (b == 0) len += perimeter();
  return len;
}

Point BoundaryMesh::position(int k) const {
  // Unit square walked counterclockwise from the origin.
  const double s = std::fmod(nodes[k], 4.0);
  if (s < 1.0) return {s, 0.0};
  if (s < 2.0) return {1.0, s - 1.0};
  if (s < 3.0) return {3.0 - s, 1.0};
  return {0.0, 4.0 - s};
}

BulkMesh build_unit_square_crisscross(int n) {
  if (n < 1) {
    throw InvalidArgument("build_unit_square_crisscross: n must be >= 1, got " + std::to_string(n));
  }
  BulkMesh mesh;
  mesh.cells_per_side = n;
  const double h = 1.0 / n;
  const int corners = (n + 1) * (n + 1);
  mesh.vertices.reserve(corners + n * n);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * h, j * h});
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) mesh.vertices.push_back({(i + 0.5) * h, (j + 0.5) * h});
  }

  auto corner = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(4 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = corners + j * n + i;
      const int sw = corner(i, j);
      const int se = corner(i + 1, j);
      const int ne = corner(i + 1, j + 1);
      const int nw = corner(i, j + 1);
      mesh.triangles.push_back({sw, se, c});
      mesh.triangles.push_back({se, ne, c});
      mesh.triangles.push_back({ne, nw, c});
      mesh.triangles.push_back({nw, sw, c});
    }
  }

  mesh.boundary_vertices.reserve(4 * n);
  for (int i = 0; i < n; ++i) mesh.boundary_vertices.push_back(corner(i, 0));
  for (int j = 0; j < n; ++j) mesh.boundary_vertices.push_back(corner(n, j));
  for (int i = n; i > 0; --i) mesh.boundary_vertices.push_back(corner(i, n));
  for (int j = n; j > 0; --j) mesh.boundary_vertices.push_back(corner(0, j));
  return mesh;
}

BoundaryMesh extract_boundary_chain(const BulkMesh& mesh) {
  const int count = static_cast<int>(mesh.boundary_vertices.size());
  BoundaryMesh b;
  b.coarse_edges = count;
  b.coarse_edge_length = mesh.mesh_size();
  b.nodes.resize(count);
  b.edges.resize(count);
  b.parent_map.resize(count);
  for (int k = 0; k < count; ++k) {
    b.nodes[k] = k * b.coarse_edge_length;
    b.edges[k] = {k, (k + 1) % count};
    b.parent_map[k] = {k, 0.0};
  }
  return b;
}

BoundaryMesh refine_boundary_chain(const BoundaryMesh& bmesh, int factor) {
  if (factor < 1) {
    throw InvalidArgument("refine_boundary_chain: factor must be >= 1, got " +
                          std::to_string(factor));
  }
  if (factor == 1) return bmesh;
  const int count = bmesh.num_nodes();
  BoundaryMesh fine;
  fine.coarse_edges = bmesh.coarse_edges;
  fine.coarse_edge_length = bmesh.coarse_edge_length;
  fine.factor = bmesh.factor * factor;
  fine.nodes.reserve(count * factor);
  fine.parent_map.reserve(count * factor);
  for (int k = 0; k < count; ++k) {
    const ParentLocation from = bmesh.parent_map[k];
    const ParentLocation next = bmesh.parent_map[(k + 1) % count];
    // Each edge lies inside one coarse edge; an edge ending on the next coarse
    // vertex ends at local coordinate 1.
    const double end = next.coarse_edge == from.coarse_edge ? next.local : 1.0;
    for (int j = 0; j < factor; ++j) {
      const double local = from.local + (end - from.local) * j / factor;
      fine.parent_map.push_back({from.coarse_edge, local});
      fine.nodes.push_back((from.coarse_edge + local) * fine.coarse_edge_length);
    }
  }
  const int fine_count = static_cast<int>(fine.nodes.size());
  fine.edges.resize(fine_count);
  for (int k = 0; k < fine_count; ++k) fine.edges[k] = {k, (k + 1) % fine_count};
  return fine;
}

void write_mesh_csv(std::ostream& out, const BulkMesh& mesh) {
  out.precision(17);
  out << "[vertices]\n";
  for (const auto& v : mesh.vertices) out << v.x << ',' << v.y << '\n';
  out << "[triangles]\n";
  for (const auto& t : mesh.triangles) out << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

}  // namespace chdyn
