#ifndef DAFO_MESH_HPP
#define DAFO_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dafo {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangle used as the domain of structured meshes.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Conforming triangulation of a simply connected polygonal domain with
/// globally indexed, oriented edges.
///
/// Conventions:
///  - Triangle vertices are stored counterclockwise.
///  - Local edge i of a triangle is the edge opposite local vertex i.
///  - The global unit normal n_e of an edge points from the lower vertex
///    index to the higher one, rotated by -90 degrees.
///  - tri_edge_sign[K][i] is the sign sigma with sigma * n_e = n_K (outward).
///
/// Immutable after construction; safe for concurrent shared reads.
class Mesh {
public:
  /// Uniform n x n grid of squares, each split by the diagonal of positive
  /// slope. 2n^2 triangles, (n+1)^2 vertices.
  static Mesh structured(int n, const Rect& extent = {});

  /// Parse the "vertices N / triangles M" text format. Clockwise triangles
  /// are silently reoriented; degenerate or non-conforming input throws.
  static Mesh load(const std::string& path);
  static Mesh read(std::istream& in, const std::string& origin = "<stream>");

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  /// Global edge id of local edge i in triangle k.
  int edge_of(int k, int i) const { return tri_edges[k][i]; }
  /// Sign sigma_{K,e} of local edge i in triangle k.
  double sign_of(int k, int i) const { return tri_edge_sign[k][i]; }
  /// Local index of global edge e within triangle k (throws if absent).
  int local_edge_index(int k, int e) const;

  bool is_boundary_edge(int e) const { return edge_tris[e][1] < 0; }

  Vec2 centroid(int k) const;
  Vec2 edge_midpoint(int e) const;
  double edge_length(int e) const;

  /// Vertex coordinates of triangle k, counterclockwise.
  std::array<Vec2, 3> triangle_vertices(int k) const;

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;   // CCW vertex ids
  std::vector<double> tri_area;                // strictly positive

  std::vector<std::array<int, 2>> edges;       // sorted vertex pair (lo, hi)
  std::vector<Vec2> edge_normal;               // unit n_e
  std::vector<std::array<int, 2>> edge_tris;   // adjacent triangles, [1] = -1 on boundary

  std::vector<std::array<int, 3>> tri_edges;       // global edge ids per triangle
  std::vector<std::array<double, 3>> tri_edge_sign;

  std::vector<int> interior_edges;  // ascending edge ids
  std::vector<int> boundary_edges;  // ascending edge ids

private:
  /// Derive edges, signs and adjacency from vertices/triangles and check
  /// all topology invariants. Used by both constructors.
  void build_topology(const std::string& origin);
};

}  // namespace dafo

#endif
