#pragma once

#include <array>
#include <iosfwd>
#include <vector>

namespace chdyn {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Conforming P1 triangulation of the unit square.
///
/// `boundary_vertices` lists the vertices on the square's boundary once each,
/// counterclockwise starting at the origin; consecutive entries (cyclically)
/// span the bulk boundary edges.
struct BulkMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_vertices;
  int cells_per_side = 0;

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles.size()); }
  [[nodiscard]] double mesh_size() const { return 1.0 / cells_per_side; }
  [[nodiscard]] double signed_area(int t) const;
};

/// Location of a boundary node on the coarse (bulk trace) chain: the bulk
/// boundary edge containing it and the local coordinate in [0, 1) along it.
struct ParentLocation {
  int coarse_edge = 0;
  double local = 0.0;
};

/// Closed 1D chain discretizing the boundary, parametrized by arc length.
///
/// Node k sits at arc position `nodes[k]`; edge k joins node k and node k+1
/// (mod size). Every coarse (bulk boundary) vertex is a node, so the bulk
/// trace space is contained in the chain's P1 space.
struct BoundaryMesh {
  std::vector<double> nodes;
  std::vector<std::array<int, 2>> edges;
  std::vector<ParentLocation> parent_map;
  int coarse_edges = 0;
  double coarse_edge_length = 0.0;
  int factor = 1;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] double perimeter() const { return coarse_edges * coarse_edge_length; }
  [[nodiscard]] double edge_length(int e) const;
  /// Planar position of node k on the unit square boundary.
  [[nodiscard]] Point position(int k) const;
};

BulkMesh build_unit_square_crisscross(int n);

BoundaryMesh extract_boundary_chain(const BulkMesh& mesh);

BoundaryMesh refine_boundary_chain(const BoundaryMesh& bmesh, int factor);

/// Writes `[vertices]` (x,y per line) and `[triangles]` (i,j,k per line).
void write_mesh_csv(std::ostream& out, const BulkMesh& mesh);

}  // namespace chdyn
