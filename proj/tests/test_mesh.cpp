#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "chdyn/errors.hpp"
#include "chdyn/mesh.hpp"
#include "doctest.h"

using namespace chdyn;

namespace {

double total_area(const BulkMesh& m) {
  double a = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) a += m.signed_area(t);
  return a;
}

double total_length(const BoundaryMesh& b) {
  double l = 0.0;
  for (std::size_t e = 0; e < b.edges.size(); ++e) l += b.edge_length(static_cast<int>(e));
  return l;
}

bool on_boundary(Point p) { return p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0; }

}  // namespace

TEST_CASE("criss-cross vertex and triangle counts") {
  const BulkMesh m1 = build_unit_square_crisscross(1);
  CHECK(m1.num_vertices() == 5);
  CHECK(m1.num_triangles() == 4);
  const BulkMesh m2 = build_unit_square_crisscross(2);
  CHECK(m2.num_vertices() == 13);
  CHECK(m2.num_triangles() == 16);
  for (int n : {3, 7, 16}) {
    const BulkMesh m = build_unit_square_crisscross(n);
    CHECK(m.num_vertices() == (n + 1) * (n + 1) + n * n);
    CHECK(m.num_triangles() == 4 * n * n);
  }
  CHECK(build_unit_square_crisscross(100).mesh_size() == doctest::Approx(0.01));
}

TEST_CASE("zero cells is rejected") {
  CHECK_THROWS_AS(build_unit_square_crisscross(0), InvalidArgument);
  CHECK_THROWS_AS(build_unit_square_crisscross(-3), InvalidArgument);
}

TEST_CASE("triangles are positively oriented and tile the square") {
  for (int n : {1, 2, 5, 12}) {
    const BulkMesh m = build_unit_square_crisscross(n);
    for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
    CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("mesh is conforming: every interior edge is shared by exactly two triangles") {
  const BulkMesh m = build_unit_square_crisscross(4);
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  int boundary_edges = 0;
  for (const auto& [edge, c] : count) {
    const Point p = m.vertices[edge.first];
    const Point q = m.vertices[edge.second];
    const bool bnd = (p.x == 0.0 && q.x == 0.0) || (p.x == 1.0 && q.x == 1.0) ||
                     (p.y == 0.0 && q.y == 0.0) || (p.y == 1.0 && q.y == 1.0);
    CHECK(c == (bnd ? 1 : 2));
    boundary_edges += bnd ? 1 : 0;
  }
  CHECK(boundary_edges == 16);
}

TEST_CASE("boundary loop visits every boundary vertex once, counterclockwise") {
  const BulkMesh m = build_unit_square_crisscross(5);
  const auto& loop = m.boundary_vertices;
  CHECK(loop.size() == 20u);
  CHECK(std::set<int>(loop.begin(), loop.end()).size() == loop.size());
  int on = 0;
  for (const Point& p : m.vertices) on += on_boundary(p) ? 1 : 0;
  CHECK(on == static_cast<int>(loop.size()));
  double shoelace = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point a = m.vertices[loop[i]];
    const Point b = m.vertices[loop[(i + 1) % loop.size()]];
    shoelace += a.x * b.y - b.x * a.y;
  }
  CHECK(0.5 * shoelace == doctest::Approx(1.0));
}

TEST_CASE("boundary chain extraction") {
  const BoundaryMesh b1 = extract_boundary_chain(build_unit_square_crisscross(1));
  CHECK(b1.num_nodes() == 4);
  CHECK(b1.edges.size() == 4u);
  for (int e = 0; e < 4; ++e) CHECK(b1.edge_length(e) == doctest::Approx(1.0));

  const BoundaryMesh b2 = extract_boundary_chain(build_unit_square_crisscross(2));
  CHECK(b2.num_nodes() == 8);
  for (int e = 0; e < 8; ++e) CHECK(b2.edge_length(e) == doctest::Approx(0.5));

  for (int n : {3, 9}) {
    const BulkMesh m = build_unit_square_crisscross(n);
    const BoundaryMesh b = extract_boundary_chain(m);
    CHECK(b.num_nodes() == 4 * n);
    CHECK(total_length(b) == doctest::Approx(4.0).epsilon(1e-14));
    // identity embedding: node k sits at bulk boundary vertex k
    for (int k = 0; k < b.num_nodes(); ++k) {
      CHECK(b.parent_map[k].coarse_edge == k);
      CHECK(b.parent_map[k].local == 0.0);
      const Point p = b.position(k);
      const Point q = m.vertices[m.boundary_vertices[k]];
      CHECK(p.x == doctest::Approx(q.x));
      CHECK(p.y == doctest::Approx(q.y));
    }
    // ring topology
    CHECK(b.edges.back()[1] == b.edges.front()[0]);
  }
}

TEST_CASE("nested boundary refinement") {
  const BoundaryMesh ring = extract_boundary_chain(build_unit_square_crisscross(1));
  const BoundaryMesh same = refine_boundary_chain(ring, 1);
  CHECK(same.nodes == ring.nodes);
  CHECK(same.edges == ring.edges);

  const BoundaryMesh two = refine_boundary_chain(ring, 2);
  CHECK(two.num_nodes() == 8);
  for (int e = 0; e < 8; ++e) CHECK(two.edge_length(e) == doctest::Approx(0.5));

  const BoundaryMesh fig =
      refine_boundary_chain(extract_boundary_chain(build_unit_square_crisscross(16)), 4);
  CHECK(fig.edge_length(0) == doctest::Approx(std::pow(2.0, -6)));
  CHECK(fig.num_nodes() == 256);

  CHECK_THROWS_AS(refine_boundary_chain(ring, 0), InvalidArgument);
}

TEST_CASE("refinement preserves perimeter, coarse nodes, and composes") {
  const BoundaryMesh base = extract_boundary_chain(build_unit_square_crisscross(3));
  for (int f : {1, 2, 3, 4, 6}) {
    const BoundaryMesh r = refine_boundary_chain(base, f);
    CHECK(total_length(r) == doctest::Approx(4.0).epsilon(1e-14));
    for (int k = 0; k < base.num_nodes(); ++k) {
      CHECK(r.nodes[k * f] == doctest::Approx(base.nodes[k]));
      CHECK(r.parent_map[k * f].coarse_edge == k);
      CHECK(r.parent_map[k * f].local == 0.0);
    }
  }
  const BoundaryMesh direct = refine_boundary_chain(base, 6);
  const BoundaryMesh composed = refine_boundary_chain(refine_boundary_chain(base, 2), 3);
  REQUIRE(direct.num_nodes() == composed.num_nodes());
  for (int k = 0; k < direct.num_nodes(); ++k) {
    CHECK(direct.nodes[k] == doctest::Approx(composed.nodes[k]).epsilon(1e-14));
  }
}

TEST_CASE("mesh csv dump has both sections") {
  std::ostringstream os;
  write_mesh_csv(os, build_unit_square_crisscross(1));
  const std::string s = os.str();
  CHECK(s.find("[vertices]") == 0);
  CHECK(s.find("[triangles]") != std::string::npos);
  int lines = 0;
  for (char c : s) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 2 + 5 + 4);
}
