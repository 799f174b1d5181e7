#include "stripbem/mixedfem.hpp"

#include <algorithm>
#include <cmath>

#include "stripbem/error.hpp"

namespace stripbem {

RTSpace::RTSpace(const Mesh2D& mesh, const StripDomain& strip) : mesh_(&mesh), strip_(&strip) {
  edge_dof_.assign(mesh.num_edges(), npos);
  element_index_.assign(mesh.num_triangles(), npos);
  std::vector<char> used(mesh.num_edges(), 0);
  for (std::size_t i = 0; i < strip.elements.size(); ++i) {
    const std::size_t t = strip.elements[i];
    element_index_[t] = i;
    if (mesh.area(t) <= 0.0) throw MeshError("RTSpace: degenerate element");
    for (auto e : mesh.triangle_edges(t)) used[e] = 1;
  }
  for (auto e : strip.gammac_edges) used[e] = 0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!used[e]) continue;
    edge_dof_[e] = dof_edge_.size();
    dof_edge_.push_back(e);
  }
}

double RTSpace::sign(std::size_t t, int i) const {
  const std::size_t e = mesh_->triangle_edges(t)[static_cast<std::size_t>(i)];
  const auto& adj = mesh_->edge_triangles(e);
  const std::size_t other = adj[0] == t ? adj[1] : adj[0];
  return (other == npos || t < other) ? 1.0 : -1.0;
}

std::array<std::array<double, 3>, 3> rt_element_mass(const std::array<Point, 3>& p) {
  const double area = 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  // psi_i = |E_i| / (2 |T|) (x - P_i) with P_i the vertex opposite local edge i.
  std::array<Point, 3> opp;
  std::array<double, 3> c;
  for (std::size_t i = 0; i < 3; ++i) {
    opp[i] = p[(i + 2) % 3];
    c[i] = norm(p[(i + 1) % 3] - p[i]) / (2.0 * area);
  }
  const std::array<Point, 3> mids = {midpoint(p[0], p[1]), midpoint(p[1], p[2]), midpoint(p[2], p[0])};
  std::array<std::array<double, 3>, 3> m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) {
      double s = 0.0;
      for (const auto& x : mids) s += dot(x - opp[i], x - opp[j]);
      m[i][j] = m[j][i] = c[i] * c[j] * s * area / 3.0;
    }
  return m;
}

MixedSystem assemble_mixed(const RTSpace& space) {
  const Mesh2D& mesh = space.mesh();
  MixedSystem out;
  out.mass = SparseSymMatrix(space.num_dofs());
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    const std::size_t t = space.strip().elements[k];
    const std::array<Point, 3> p = {mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)};
    const auto m = rt_element_mass(p);
    const auto& te = mesh.triangle_edges(t);
    std::array<std::size_t, 3> dof;
    std::array<double, 3> sg;
    for (int i = 0; i < 3; ++i) {
      dof[static_cast<std::size_t>(i)] = space.edge_dof(te[static_cast<std::size_t>(i)]);
      sg[static_cast<std::size_t>(i)] = space.sign(t, i);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (dof[i] == npos) continue;
      for (std::size_t j = 0; j < 3; ++j)
        if (dof[j] != npos) out.mass.add(dof[i], dof[j], sg[i] * sg[j] * m[i][j]);
      trip.emplace_back(static_cast<int>(k), static_cast<int>(dof[i]), sg[i] * mesh.edge_length(te[i]));
    }
  }
  out.mass.finalize();
  out.div.resize(static_cast<Eigen::Index>(space.num_elements()), static_cast<Eigen::Index>(space.num_dofs()));
  out.div.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Vector assemble_boundary_load(const RTSpace& space, const BoundaryMesh& bmesh, const BoundarySamples& r,
                              const Density* phi) {
  Vector load(space.num_dofs(), 0.0);
  const Vector integrals = residual_integrals(bmesh, r, phi, 1);
  for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
    const std::size_t d = space.edge_dof(bmesh.info(s).mesh_edge);
    if (d == npos) throw MeshError("assemble_boundary_load: boundary edge outside the flux space");
    load[d] = integrals[s];
  }
  return load;
}

FluxSolution solve_tau(const RTSpace& space, const MixedSystem& system, const Vector& load) {
  if (load.size() != space.num_dofs()) throw NumericalError("solve_tau: load size mismatch");
  const Vector zero(space.num_elements(), 0.0);
  SaddleSolution s = saddle_solve(system.mass, system.div, load, zero);
  FluxSolution out;
  out.tau = std::move(s.primal);
  out.pressure = std::move(s.multiplier);
  const Vector mt = system.mass.multiply(out.tau);
  double n2 = 0.0;
  for (std::size_t i = 0; i < mt.size(); ++i) n2 += out.tau[i] * mt[i];
  out.norm2 = n2;
  return out;
}

RefinedFlux solve_tau_refined(const Mesh2D& mesh, const StripDomain& strip, const BoundaryMesh& bmesh,
                              const BoundarySamples& halves, const Density* phi) {
  if (halves.r.size() != 2 * bmesh.num_segments() * halves.npts)
    throw NumericalError("solve_tau_refined: expected half-segment samples");
  RefinedFlux out;
  out.refinement = refine_red(mesh);
  std::vector<std::size_t> children;
  children.reserve(4 * strip.elements.size());
  for (auto t : strip.elements)
    for (std::size_t c = 0; c < 4; ++c) children.push_back(4 * t + c);
  out.strip = strip_from_elements(out.refinement.mesh, std::move(children), strip.depth);
  const RTSpace space(out.refinement.mesh, out.strip);
  const Vector integrals = residual_integrals(bmesh, halves, phi, 2);
  Vector load(space.num_dofs(), 0.0);
  for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
    const auto& info = bmesh.info(s);
    const bool forward = bmesh.global_vertex(info.v0) == mesh.edge_vertices(info.mesh_edge)[0];
    for (std::size_t h = 0; h < 2; ++h) {
      const std::size_t child = out.refinement.edge_children[info.mesh_edge][forward ? h : 1 - h];
      const std::size_t d = space.edge_dof(child);
      if (d == npos) throw MeshError("solve_tau_refined: boundary edge outside the flux space");
      load[d] = integrals[2 * s + h];
    }
  }
  out.solution = solve_tau(space, assemble_mixed(space), load);
  for (double v : element_divergence(space, out.solution.tau)) out.max_divergence = std::max(out.max_divergence, std::abs(v));
  for (std::size_t i = 0; i < load.size(); ++i) out.load_dot_tau += load[i] * out.solution.tau[i];
  return out;
}

double tau_lower_bound(const FluxSolution& sol) { return std::sqrt(std::max(sol.norm2, 0.0)); }

Vector element_divergence(const RTSpace& space, const Vector& tau) {
  const Mesh2D& mesh = space.mesh();
  Vector div(space.num_elements(), 0.0);
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    const std::size_t t = space.strip().elements[k];
    const auto& te = mesh.triangle_edges(t);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t d = space.edge_dof(te[static_cast<std::size_t>(i)]);
      if (d != npos) s += space.sign(t, i) * mesh.edge_length(te[static_cast<std::size_t>(i)]) * tau[d];
    }
    div[k] = s / mesh.area(t);
  }
  return div;
}

}  // namespace stripbem
