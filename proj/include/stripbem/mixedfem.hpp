#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

#include "stripbem/boundary.hpp"
#include "stripbem/linalg.hpp"
#include "stripbem/stripfem.hpp"

namespace stripbem {

/// Lowest-order Raviart-Thomas space on the strip with zero normal flux on the
/// inner boundary. One DOF per strip edge that is not an inner-boundary edge; the
/// DOF is the normal component along the global normal, which points from the
/// lower to the higher triangle index and outward on the boundary.
class RTSpace {
 public:
  RTSpace(const Mesh2D& mesh, const StripDomain& strip);

  std::size_t num_dofs() const { return dof_edge_.size(); }
  std::size_t num_elements() const { return strip_->elements.size(); }
  /// DOF of a mesh edge, or npos for edges outside the space.
  std::size_t edge_dof(std::size_t e) const { return edge_dof_[e]; }
  std::size_t dof_edge(std::size_t d) const { return dof_edge_[d]; }
  /// Position of triangle t in strip().elements, or npos.
  std::size_t element_index(std::size_t t) const { return element_index_[t]; }
  /// Sign of the local basis of local edge i of triangle t relative to the global normal.
  double sign(std::size_t t, int i) const;
  const Mesh2D& mesh() const { return *mesh_; }
  const StripDomain& strip() const { return *strip_; }

 private:
  const Mesh2D* mesh_;
  const StripDomain* strip_;
  std::vector<std::size_t> edge_dof_;
  std::vector<std::size_t> dof_edge_;
  std::vector<std::size_t> element_index_;
};

/// Element mass matrix of the three local RT0 functions (local edge i joins v[i] and
/// v[i+1]), each with unit outward normal component on its edge.
std::array<std::array<double, 3>, 3> rt_element_mass(const std::array<Point, 3>& p);

struct MixedSystem {
  SparseSymMatrix mass;
  Eigen::SparseMatrix<double> div;  // elements x dofs, entries int_T div psi
};

MixedSystem assemble_mixed(const RTSpace& space);

/// int_F r ds for every outer-boundary edge F (unit normal trace), zero elsewhere;
/// see residual_integrals for `phi`.
Vector assemble_boundary_load(const RTSpace& space, const BoundaryMesh& bmesh, const BoundarySamples& r,
                              const Density* phi = nullptr);

struct FluxSolution {
  Vector tau;       // RT0 coefficients
  Vector pressure;  // P0 multiplier per strip element
  double norm2 = 0.0;  // tau^T M tau
};

FluxSolution solve_tau(const RTSpace& space, const MixedSystem& system, const Vector& load);

/// ||tau||_{L2} from the mass-matrix quadratic form.
double tau_lower_bound(const FluxSolution& sol);

/// Mixed problem on the uniform red refinement of the strip.
struct RefinedFlux {
  RedRefinement refinement;
  StripDomain strip;
  FluxSolution solution;
  double max_divergence = 0.0;
  double load_dot_tau = 0.0;  // <r, tau . n> on the boundary
};
/// `halves` from sample_residual_halves on `bmesh` (the boundary of `mesh`).
RefinedFlux solve_tau_refined(const Mesh2D& mesh, const StripDomain& strip, const BoundaryMesh& bmesh,
                              const BoundarySamples& halves, const Density* phi = nullptr);

/// Constant divergence of tau on every strip element.
Vector element_divergence(const RTSpace& space, const Vector& tau);

}  // namespace stripbem
