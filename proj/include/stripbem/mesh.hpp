#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "stripbem/geometry.hpp"

namespace stripbem {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Triangle with counter-clockwise vertices. Local edge i joins v[i] and v[(i+1)%3];
/// `refedge` is the local index of the newest-vertex-bisection reference edge.
struct Triangle {
  std::array<std::size_t, 3> v{};
  int refedge = 0;
  int generation = 0;
};

/// Immutable conforming triangulation with edge topology.
///
/// Edges are numbered by ascending (min vertex, max vertex) so that every derived
/// quantity (boundary loops, strip edges, degrees of freedom) is deterministic.
class Mesh2D {
 public:
  Mesh2D() = default;
  /// Throws MeshError on out-of-range indices, non-positive area, an invalid
  /// reference edge, or an edge shared by more than two triangles.
  Mesh2D(std::vector<Point> vertices, std::vector<Triangle> triangles);

  /// Builds a mesh whose reference edges are the longest edges, ties broken by the
  /// smallest opposite-vertex index.
  static Mesh2D with_longest_edge_reference(std::vector<Point> vertices,
                                            const std::vector<std::array<std::size_t, 3>>& triangles);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edge_vertices_.size(); }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }

  /// Mesh edge ids of the three local edges of triangle t.
  const std::array<std::size_t, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }
  /// Sorted vertex pair of edge e.
  const std::array<std::size_t, 2>& edge_vertices(std::size_t e) const { return edge_vertices_[e]; }
  /// Adjacent triangles of edge e; the second entry is npos for boundary edges.
  const std::array<std::size_t, 2>& edge_triangles(std::size_t e) const { return edge_triangles_[e]; }
  bool is_boundary_edge(std::size_t e) const { return edge_triangles_[e][1] == npos; }
  /// Edge id joining vertices a and b, or npos.
  std::size_t find_edge(std::size_t a, std::size_t b) const;

  /// Triangles containing vertex v, ascending.
  std::span<const std::size_t> vertex_triangles(std::size_t v) const {
    return {vertex_tri_.data() + vertex_tri_offset_[v], vertex_tri_offset_[v + 1] - vertex_tri_offset_[v]};
  }

  Point corner(std::size_t t, int i) const { return vertices_[triangles_[t].v[i]]; }
  double area(std::size_t t) const;
  double diameter(std::size_t t) const;
  double edge_length(std::size_t e) const;

  /// Throws MeshError unless every boundary loop encloses a non-degenerate region,
  /// which rules out hanging nodes (they close up into zero-area loops).
  void check_conforming() const;

 private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::array<std::size_t, 3>> triangle_edges_;
  std::vector<std::array<std::size_t, 2>> edge_vertices_;
  std::vector<std::array<std::size_t, 2>> edge_triangles_;
  std::vector<std::size_t> vertex_tri_offset_;
  std::vector<std::size_t> vertex_tri_;
  std::vector<std::size_t> vertex_edge_offset_;
  std::vector<std::size_t> vertex_edge_;
};

struct Refinement {
  Mesh2D mesh;
  /// Index of the input triangle containing each output triangle.
  std::vector<std::size_t> parent;
};

/// Newest vertex bisection: bisects the reference edge of every marked triangle and
/// closes the refinement so that the result is conforming.
Refinement refine_nvb_tracked(const Mesh2D& mesh, std::span<const std::size_t> marked);
Mesh2D refine_nvb(const Mesh2D& mesh, std::span<const std::size_t> marked);

struct RedRefinement {
  Mesh2D mesh;
  /// Children of triangle t are 4 t .. 4 t + 3: the three corners, then the middle one.
  std::vector<std::size_t> parent;
  /// Halves of every coarse edge; entry 0 touches edge_vertices(e)[0].
  std::vector<std::array<std::size_t, 2>> edge_children;
};

/// Uniform refinement into four similar triangles through the edge midpoints.
/// Vertex nv + e is the midpoint of coarse edge e.
RedRefinement refine_red(const Mesh2D& mesh);

/// max_T diam(T) / |T|^{1/2}.
double shape_regularity(const Mesh2D& mesh);

/// Upper bound for shape_regularity over all NVB refinements of `mesh`, taken over
/// the finitely many similarity classes that bisection generates from each triangle.
double nvb_shape_bound(const Mesh2D& mesh);

/// Plain-text format: "mesh2d <nv> <nt>", nv lines "x y", nt lines "v0 v1 v2 refedge".
void write_mesh(std::ostream& out, const Mesh2D& mesh);
Mesh2D read_mesh(std::istream& in);

}  // namespace stripbem
