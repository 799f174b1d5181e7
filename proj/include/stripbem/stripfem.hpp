#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stripbem/bem.hpp"
#include "stripbem/boundary.hpp"
#include "stripbem/linalg.hpp"
#include "stripbem/quadrature.hpp"

namespace stripbem {

/// Continuous piecewise P^q functions on the boundary mesh.
/// Nodes: boundary vertices (local numbering), then for q = 2 one midpoint per segment.
class BoundaryFESpace {
 public:
  BoundaryFESpace(const BoundaryMesh& bmesh, int q);

  int degree() const { return q_; }
  std::size_t num_nodes() const { return num_nodes_; }
  /// Local nodes of a segment: start, end, and (q = 2) midpoint.
  std::array<std::size_t, 3> segment_nodes(std::size_t seg) const;
  std::size_t nodes_per_segment() const { return static_cast<std::size_t>(q_ + 1); }
  /// Segment K_z carrying the dual functional of node z.
  std::size_t facet(std::size_t node) const { return facet_[node]; }
  const BoundaryMesh& mesh() const { return *bmesh_; }

 private:
  const BoundaryMesh* bmesh_;
  int q_;
  std::size_t num_nodes_;
  std::vector<std::size_t> facet_;
};

/// Lagrange basis of degree q on [0, 1] (ordering start, end, midpoint) and its derivative.
double lagrange(int q, int k, double s);
double lagrange_derivative(int q, int k, double s);

/// Residual r = g - V phi and its arclength derivative sampled at Gauss points.
struct BoundarySamples {
  const GaussRule* rule = nullptr;
  std::size_t npts = 0;
  std::vector<double> r;   // [seg * npts + g]
  std::vector<double> dr;  // derivative along the segment direction

  double value(std::size_t seg, std::size_t g) const { return r[seg * npts + g]; }
  double derivative(std::size_t seg, std::size_t g) const { return dr[seg * npts + g]; }
};

/// Gauss points per segment used for residual sampling with strip degree q. The rule
/// is exact for degree 2q + 8, enough for the Scott-Zhang functionals, the boundary
/// load, and the oscillation integrals.
int residual_points(int q);

BoundarySamples sample_residual(const BoundaryMesh& bmesh, const DirichletData& data, const Density& phi, int npts);
/// Residual samples on the two halves of every segment: entry (2 s + h) * npts + g,
/// half 0 starting at the segment start.
BoundarySamples sample_residual_halves(const BoundaryMesh& bmesh, const DirichletData& data, const Density& phi,
                                       int npts);
/// Samples a given boundary function r(seg, s) and its derivative (for tests).
BoundarySamples sample_function(const BoundaryMesh& bmesh, const std::function<double(std::size_t, double)>& r,
                                const std::function<double(std::size_t, double)>& dr, int npts);

/// int r ds over each segment (parts = 1) or each half segment (parts = 2), from
/// samples taken with the same subdivision. With `phi` given, the contributions of
/// segments near the piece to V phi are integrated exactly instead of by the rule.
Vector residual_integrals(const BoundaryMesh& bmesh, const BoundarySamples& r, const Density* phi,
                          std::size_t parts = 1);

/// Scott-Zhang projection J r onto the boundary space. The facet of a vertex is the
/// adjacent segment with lexicographically smallest midpoint.
Vector scott_zhang_boundary(const BoundarySamples& r, const BoundaryFESpace& space);

/// Value and arclength derivative of a boundary FE function at (seg, s).
double boundary_fe_value(const BoundaryFESpace& space, std::span<const double> coeffs, std::size_t seg, double s);
double boundary_fe_derivative(const BoundaryFESpace& space, std::span<const double> coeffs, std::size_t seg,
                              double s);

enum class NodeTag : unsigned char { free, dirichlet_gamma, dirichlet_gammac };

/// Lagrange space of degree q on the strip. Nodes: strip vertices (ascending global
/// id), then (q = 2) midpoints of strip edges (ascending edge id).
class StripFESpace {
 public:
  StripFESpace(const Mesh2D& mesh, const StripDomain& strip, int q);

  int degree() const { return q_; }
  std::size_t num_nodes() const { return tags_.size(); }
  NodeTag tag(std::size_t node) const { return tags_[node]; }
  std::span<const NodeTag> tags() const { return tags_; }
  /// Node of a mesh vertex / mesh edge midpoint, or npos.
  std::size_t vertex_node(std::size_t v) const { return vertex_node_[v]; }
  std::size_t edge_node(std::size_t e) const { return q_ == 2 ? edge_node_[e] : npos; }
  /// Local nodes of a strip element: 3 vertices then (q = 2) midpoints of local edges 0, 1, 2.
  std::array<std::size_t, 6> element_nodes(std::size_t t) const;
  std::size_t nodes_per_element() const { return q_ == 1 ? 3 : 6; }
  const Mesh2D& mesh() const { return *mesh_; }
  const StripDomain& strip() const { return *strip_; }

 private:
  const Mesh2D* mesh_;
  const StripDomain* strip_;
  int q_;
  std::vector<NodeTag> tags_;
  std::vector<std::size_t> vertex_node_;
  std::vector<std::size_t> edge_node_;
};

/// Element stiffness of a P1 (3 x 3) or P2 (6 x 6) triangle with vertices p[0..2];
/// P2 ordering: vertices then midpoints of edges (p0 p1), (p1 p2), (p2 p0).
std::array<std::array<double, 6>, 6> element_stiffness(const std::array<Point, 3>& p, int q);

SparseSymMatrix assemble_stiffness_strip(const StripFESpace& space);

struct StripSolution {
  Vector w;  // nodal values on the strip space
  double relative_residual = 0.0;
};

/// Discrete harmonic extension: w = boundary data on Gamma nodes, 0 on the inner
/// boundary, harmonic at free nodes. `gamma_values` are nodal values of the boundary
/// space of the same degree.
StripSolution solve_wstar(const StripFESpace& space, const BoundaryFESpace& bspace, std::span<const double> gamma_values);

/// eta(T) = ||grad w||_{L2(T)} per mesh triangle (zero off the strip).
Vector eta_indicators(const StripFESpace& space, const StripSolution& w);

/// osc(T)^2 = sum over boundary segments F of T of h_F ||d/dt (r - J r)||^2_{L2(F)}.
Vector osc_indicators(const BoundarySamples& r, const BoundaryFESpace& space, std::span<const double> jr,
                      std::size_t num_triangles);

/// ||grad I(u* - u_l)||_{L2(Omega)}, I the P2 nodal interpolant on the uniform red
/// refinement of the mesh.
double error_surrogate(const Density& phi, const std::function<double(Point)>& exact_u, const Mesh2D& mesh);

}  // namespace stripbem
