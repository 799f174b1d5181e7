#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stripbem/mesh.hpp"

namespace stripbem {

/// Boundary trace of a Mesh2D: oriented segments with the domain on their left.
///
/// Boundary vertices get a compact local numbering; segment endpoints refer to it.
class BoundaryMesh {
 public:
  struct SegmentInfo {
    std::size_t v0 = 0;  // local boundary vertex index
    std::size_t v1 = 0;
    std::size_t parent = 0;     // adjacent triangle of the volume mesh
    std::size_t mesh_edge = 0;  // edge id in the volume mesh
    double length = 0.0;        // h_F
  };
  struct Loop {
    std::size_t first = 0;  // first segment index
    std::size_t count = 0;
  };

  BoundaryMesh() = default;
  BoundaryMesh(std::vector<Point> points, std::vector<std::size_t> global_ids, std::vector<SegmentInfo> segments,
               std::vector<Loop> loops);

  std::size_t num_segments() const { return segments_.size(); }
  std::size_t num_vertices() const { return points_.size(); }
  const SegmentInfo& info(std::size_t i) const { return segments_[i]; }
  Segment segment(std::size_t i) const { return {points_[segments_[i].v0], points_[segments_[i].v1]}; }
  double length(std::size_t i) const { return segments_[i].length; }
  const Point& point(std::size_t local_vertex) const { return points_[local_vertex]; }
  std::span<const Point> points() const { return points_; }
  std::size_t global_vertex(std::size_t local_vertex) const { return global_ids_[local_vertex]; }
  std::span<const Loop> loops() const { return loops_; }
  /// Segments of the same loop ending/starting at this segment's start/end.
  std::size_t previous(std::size_t i) const { return prev_[i]; }
  std::size_t next(std::size_t i) const { return next_[i]; }
  /// The (one or two) segments incident to a boundary vertex, ascending.
  std::span<const std::size_t> vertex_segments(std::size_t local_vertex) const {
    return {vertex_segments_[local_vertex].data(), vertex_segments_[local_vertex].size()};
  }
  /// Diameter of the boundary vertex set.
  double diameter() const;

 private:
  std::vector<Point> points_;
  std::vector<std::size_t> global_ids_;
  std::vector<SegmentInfo> segments_;
  std::vector<Loop> loops_;
  std::vector<std::size_t> prev_;
  std::vector<std::size_t> next_;
  std::vector<std::vector<std::size_t>> vertex_segments_;
};

/// All edges with exactly one adjacent triangle, ordered into closed loops.
/// Throws MeshError if the boundary does not decompose into simple closed loops.
BoundaryMesh extract_boundary(const Mesh2D& mesh);

/// k-fold patch of a set of seed vertices: the triangles touching the seed, then
/// repeatedly the triangles touching the union of the previous layer.
std::vector<std::size_t> k_patch_of_vertices(const Mesh2D& mesh, std::span<const std::size_t> seed_vertices, int k);
/// k-fold patch of a set of triangles (touching the closure of their union).
std::vector<std::size_t> k_patch(const Mesh2D& mesh, std::span<const std::size_t> seed_triangles, int k);
/// k-fold patch of the boundary.
std::vector<std::size_t> k_patch_boundary(const Mesh2D& mesh, int k);

enum class VertexTag : unsigned char { outside, interior, gamma, gammac };

/// Strip of triangles along the boundary with its boundary split into the outer
/// boundary and the inner complementary boundary.
struct StripDomain {
  int depth = 0;
  std::vector<std::size_t> elements;       // ascending triangle ids
  std::vector<char> contains;              // per mesh triangle
  std::vector<std::size_t> gamma_edges;    // mesh edges on the outer boundary
  std::vector<std::size_t> gammac_edges;   // mesh edges on the inner boundary
  std::vector<VertexTag> vertex_tag;       // per mesh vertex

  bool in_strip(std::size_t t) const { return contains[t] != 0; }
};

/// Throws MeshError if an inner-boundary edge touches the outer boundary.
StripDomain strip(const Mesh2D& mesh, int k);
/// Strip made of the given triangles, tagged as above.
StripDomain strip_from_elements(const Mesh2D& mesh, std::vector<std::size_t> elements, int depth);

}  // namespace stripbem
