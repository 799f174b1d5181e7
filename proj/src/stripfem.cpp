#include "stripbem/stripfem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stripbem/error.hpp"

namespace stripbem {

namespace {

// Lexicographic (x, y) order of segment midpoints.
bool midpoint_less(const BoundaryMesh& b, std::size_t s1, std::size_t s2) {
  const Segment a = b.segment(s1);
  const Segment c = b.segment(s2);
  const Point m1 = midpoint(a.a, a.b);
  const Point m2 = midpoint(c.a, c.b);
  if (m1.x != m2.x) return m1.x < m2.x;
  if (m1.y != m2.y) return m1.y < m2.y;
  return s1 < s2;
}

// Inverse of the reference mass matrix on [0, 1] for the Lagrange basis of degree q.
Eigen::MatrixXd reference_mass_inverse(int q) {
  const int n = q + 1;
  const GaussRule& rule = gauss_legendre(q + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t g = 0; g < rule.size(); ++g)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m(i, j) += rule.weights[g] * lagrange(q, i, rule.nodes[g]) * lagrange(q, j, rule.nodes[g]);
  return m.inverse();
}

void check_degree(int q) {
  if (q != 1 && q != 2) throw ConfigError("strip degree q must be 1 or 2, got " + std::to_string(q));
}

}  // namespace

double lagrange(int q, int k, double s) {
  if (q == 1) return k == 0 ? 1.0 - s : s;
  switch (k) {
    case 0: return (1.0 - s) * (1.0 - 2.0 * s);
    case 1: return s * (2.0 * s - 1.0);
    default: return 4.0 * s * (1.0 - s);
  }
}

double lagrange_derivative(int q, int k, double s) {
  if (q == 1) return k == 0 ? -1.0 : 1.0;
  switch (k) {
    case 0: return 4.0 * s - 3.0;
    case 1: return 4.0 * s - 1.0;
    default: return 4.0 - 8.0 * s;
  }
}

BoundaryFESpace::BoundaryFESpace(const BoundaryMesh& bmesh, int q) : bmesh_(&bmesh), q_(q) {
  check_degree(q);
  const std::size_t nv = bmesh.num_vertices();
  num_nodes_ = nv + (q == 2 ? bmesh.num_segments() : 0);
  facet_.resize(num_nodes_);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto segs = bmesh.vertex_segments(v);
    std::size_t best = segs[0];
    for (auto s : segs)
      if (midpoint_less(bmesh, s, best)) best = s;
    facet_[v] = best;
  }
  for (std::size_t s = nv; s < num_nodes_; ++s) facet_[s] = s - nv;
}

std::array<std::size_t, 3> BoundaryFESpace::segment_nodes(std::size_t seg) const {
  const auto& info = bmesh_->info(seg);
  return {info.v0, info.v1, q_ == 2 ? bmesh_->num_vertices() + seg : npos};
}

int residual_points(int q) { return q + 5; }

BoundarySamples sample_function(const BoundaryMesh& bmesh, const std::function<double(std::size_t, double)>& r,
                                const std::function<double(std::size_t, double)>& dr, int npts) {
  BoundarySamples out;
  out.rule = &gauss_legendre(npts);
  out.npts = out.rule->size();
  out.r.resize(bmesh.num_segments() * out.npts);
  out.dr.resize(out.r.size());
  for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
    const double len = bmesh.length(s);
    for (std::size_t g = 0; g < out.npts; ++g) {
      out.r[s * out.npts + g] = r(s, out.rule->nodes[g] * len);
      out.dr[s * out.npts + g] = dr(s, out.rule->nodes[g] * len);
    }
  }
  return out;
}

namespace {

BoundarySamples sample_residual_parts(const BoundaryMesh& bmesh, const DirichletData& data, const Density& phi,
                                      int npts, std::size_t parts) {
  if (!phi.mesh || phi.mesh->num_segments() != bmesh.num_segments())
    throw NumericalError("sample_residual: density lives on a different boundary mesh");
  BoundarySamples out;
  out.rule = &gauss_legendre(npts);
  out.npts = out.rule->size();
  const std::size_t ns = bmesh.num_segments();
  out.r.resize(ns * parts * out.npts);
  out.dr.resize(out.r.size());
  const SingleLayerEvaluator ev(phi);
  const long long total = static_cast<long long>(out.r.size());
#pragma omp parallel for schedule(static)
  for (long long idx = 0; idx < total; ++idx) {
    const std::size_t i = static_cast<std::size_t>(idx);
    const std::size_t piece = i / out.npts;
    const std::size_t s = piece / parts;
    const std::size_t g = i % out.npts;
    const Segment seg = bmesh.segment(s);
    const double h = seg.length() / static_cast<double>(parts);
    const double t = (static_cast<double>(piece % parts) + out.rule->nodes[g]) * h;
    const Point x = seg.at(t);
    const auto tr = ev.on_boundary(s, t);
    out.r[i] = data.g(x) - tr.value;
    out.dr[i] = data.dg(x, seg.tangent()) - tr.dt;
  }
  for (std::size_t i = 0; i < out.r.size(); ++i)
    if (!std::isfinite(out.r[i]) || !std::isfinite(out.dr[i]))
      throw NumericalError("sample_residual: non-finite residual");
  return out;
}

}  // namespace

BoundarySamples sample_residual(const BoundaryMesh& bmesh, const DirichletData& data, const Density& phi, int npts) {
  return sample_residual_parts(bmesh, data, phi, npts, 1);
}

BoundarySamples sample_residual_halves(const BoundaryMesh& bmesh, const DirichletData& data, const Density& phi,
                                       int npts) {
  return sample_residual_parts(bmesh, data, phi, npts, 2);
}

Vector residual_integrals(const BoundaryMesh& bmesh, const BoundarySamples& r, const Density* phi,
                          std::size_t parts) {
  const std::size_t ns = bmesh.num_segments();
  if (r.r.size() != ns * parts * r.npts) throw NumericalError("residual_integrals: sample layout mismatch");
  const GaussRule& rule = *r.rule;
  Vector out(ns * parts, 0.0);
  const long long total = static_cast<long long>(out.size());
#pragma omp parallel for schedule(static)
  for (long long idx = 0; idx < total; ++idx) {
    const std::size_t piece = static_cast<std::size_t>(idx);
    const std::size_t s = piece / parts;
    const Segment seg = bmesh.segment(s);
    const double h = seg.length() / static_cast<double>(parts);
    const Point dir = seg.tangent();
    const Segment sub{seg.a + (static_cast<double>(piece % parts) * h) * dir,
                      seg.a + (static_cast<double>(piece % parts + 1) * h) * dir};
    double acc = 0.0;
    for (std::size_t g = 0; g < rule.size(); ++g) acc += rule.weights[g] * r.r[piece * r.npts + g];
    acc *= h;
    if (phi) {
      // near segments along the loop
      std::vector<std::size_t> near{s};
      for (int dirn = 0; dirn < 2; ++dirn) {
        std::size_t k = s;
        for (std::size_t step = 0; step + 1 < ns; ++step) {
          k = dirn == 0 ? bmesh.next(k) : bmesh.previous(k);
          if (k == s || segment_distance(sub, bmesh.segment(k)) > 3.0 * h) break;
          near.push_back(k);
        }
      }
      std::sort(near.begin(), near.end());
      near.erase(std::unique(near.begin(), near.end()), near.end());
      const int p = phi->p;
      for (auto k : near) {
        const Segment sk = bmesh.segment(k);
        const double c0 = p == 0 ? phi->coeffs[k] : phi->coeffs[2 * k];
        const double c1 = p == 0 ? c0 : phi->coeffs[2 * k + 1];
        auto exact_on = [&](const Segment& y, double a0, double a1) {
          const auto block = segment_pair_block(sub, y, p);
          return p == 0 ? a0 * block[0][0] : a0 * (block[0][0] + block[1][0]) + a1 * (block[0][1] + block[1][1]);
        };
        double exact = 0.0;
        if (k == s && parts > 1) {
          const Point d = (1.0 / static_cast<double>(parts)) * (sk.b - sk.a);
          for (std::size_t j = 0; j < parts; ++j) {
            const double f0 = static_cast<double>(j) / static_cast<double>(parts);
            const double f1 = static_cast<double>(j + 1) / static_cast<double>(parts);
            exact += exact_on({sk.a + static_cast<double>(j) * d, sk.a + static_cast<double>(j + 1) * d},
                              c0 + f0 * (c1 - c0), c0 + f1 * (c1 - c0));
          }
        } else {
          exact = exact_on(sk, c0, c1);
        }
        double approx = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
          const LogMoments m = log_moments(sk, sub.at(rule.nodes[g] * h));
          approx += rule.weights[g] * (c0 * m.m0 + (c1 - c0) * m.m1);
        }
        approx *= -h / (2.0 * kPi);
        acc += approx - exact;
      }
    }
    out[piece] = acc;
  }
  return out;
}

Vector scott_zhang_boundary(const BoundarySamples& r, const BoundaryFESpace& space) {
  const int q = space.degree();
  const Eigen::MatrixXd minv = reference_mass_inverse(q);
  const GaussRule& rule = *r.rule;
  // Dual weights: c_z = sum_g dual(z_local, g) r(seg, g).
  Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(q + 1, static_cast<Eigen::Index>(rule.size()));
  for (int z = 0; z <= q; ++z)
    for (std::size_t g = 0; g < rule.size(); ++g) {
      double psi = 0.0;
      for (int k = 0; k <= q; ++k) psi += minv(z, k) * lagrange(q, k, rule.nodes[g]);
      dual(z, static_cast<Eigen::Index>(g)) = rule.weights[g] * psi;
    }
  Vector out(space.num_nodes(), 0.0);
  for (std::size_t z = 0; z < space.num_nodes(); ++z) {
    const std::size_t seg = space.facet(z);
    const auto nodes = space.segment_nodes(seg);
    int local = 0;
    while (nodes[static_cast<std::size_t>(local)] != z) ++local;
    double c = 0.0;
    for (std::size_t g = 0; g < rule.size(); ++g) c += dual(local, static_cast<Eigen::Index>(g)) * r.value(seg, g);
    out[z] = c;
  }
  return out;
}

double boundary_fe_value(const BoundaryFESpace& space, std::span<const double> coeffs, std::size_t seg, double s) {
  const auto nodes = space.segment_nodes(seg);
  const double u = s / space.mesh().length(seg);
  double v = 0.0;
  for (int k = 0; k <= space.degree(); ++k) v += coeffs[nodes[static_cast<std::size_t>(k)]] * lagrange(space.degree(), k, u);
  return v;
}

double boundary_fe_derivative(const BoundaryFESpace& space, std::span<const double> coeffs, std::size_t seg,
                              double s) {
  const auto nodes = space.segment_nodes(seg);
  const double len = space.mesh().length(seg);
  const double u = s / len;
  double v = 0.0;
  for (int k = 0; k <= space.degree(); ++k)
    v += coeffs[nodes[static_cast<std::size_t>(k)]] * lagrange_derivative(space.degree(), k, u);
  return v / len;
}

StripFESpace::StripFESpace(const Mesh2D& mesh, const StripDomain& strip, int q) : mesh_(&mesh), strip_(&strip), q_(q) {
  check_degree(q);
  vertex_node_.assign(mesh.num_vertices(), npos);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const VertexTag t = strip.vertex_tag[v];
    if (t == VertexTag::outside) continue;
    vertex_node_[v] = tags_.size();
    tags_.push_back(t == VertexTag::gamma    ? NodeTag::dirichlet_gamma
                    : t == VertexTag::gammac ? NodeTag::dirichlet_gammac
                                             : NodeTag::free);
  }
  if (q == 2) {
    edge_node_.assign(mesh.num_edges(), npos);
    std::vector<NodeTag> etag(mesh.num_edges(), NodeTag::free);
    for (auto e : strip.gamma_edges) etag[e] = NodeTag::dirichlet_gamma;
    for (auto e : strip.gammac_edges) etag[e] = NodeTag::dirichlet_gammac;
    std::vector<char> used(mesh.num_edges(), 0);
    for (auto t : strip.elements)
      for (auto e : mesh.triangle_edges(t)) used[e] = 1;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (!used[e]) continue;
      edge_node_[e] = tags_.size();
      tags_.push_back(etag[e]);
    }
  }
}

std::array<std::size_t, 6> StripFESpace::element_nodes(std::size_t t) const {
  std::array<std::size_t, 6> out;
  out.fill(npos);
  const auto& tri = mesh_->triangle(t);
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = vertex_node_[tri.v[static_cast<std::size_t>(i)]];
  if (q_ == 2) {
    const auto& te = mesh_->triangle_edges(t);
    for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(3 + i)] = edge_node_[te[static_cast<std::size_t>(i)]];
  }
  return out;
}

std::array<std::array<double, 6>, 6> element_stiffness(const std::array<Point, 3>& p, int q) {
  check_degree(q);
  const double area2 = cross(p[1] - p[0], p[2] - p[0]);
  const double area = 0.5 * std::abs(area2);
  // grad lambda_i = perp(p_{i+2} - p_{i+1}) / (2 |T|) with sign of orientation.
  std::array<Point, 3> gl;
  for (int i = 0; i < 3; ++i) {
    const Point d = p[static_cast<std::size_t>((i + 2) % 3)] - p[static_cast<std::size_t>((i + 1) % 3)];
    gl[static_cast<std::size_t>(i)] = (1.0 / area2) * Point{-d.y, d.x};
  }
  std::array<std::array<double, 6>, 6> k{};
  if (q == 1) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) k[i][j] = area * dot(gl[i], gl[j]);
    return k;
  }
  // grad phi = sum_a lambda_a c[a].
  std::array<std::array<Point, 3>, 6> c{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t a = 0; a < 3; ++a) c[i][a] = (a == i ? 3.0 : -1.0) * gl[i];
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = (i + 1) % 3;
    c[3 + i][i] = 4.0 * gl[j];
    c[3 + i][j] = 4.0 * gl[i];
  }
  for (std::size_t m = 0; m < 6; ++m)
    for (std::size_t n = m; n < 6; ++n) {
      double s = 0.0;
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) s += (a == b ? 2.0 : 1.0) * dot(c[m][a], c[n][b]);
      k[m][n] = k[n][m] = s * area / 12.0;
    }
  return k;
}

namespace {

std::array<Point, 3> corners(const Mesh2D& mesh, std::size_t t) {
  return {mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)};
}

}  // namespace

SparseSymMatrix assemble_stiffness_strip(const StripFESpace& space) {
  SparseSymMatrix k(space.num_nodes());
  const std::size_t nl = space.nodes_per_element();
  for (auto t : space.strip().elements) {
    const auto ke = element_stiffness(corners(space.mesh(), t), space.degree());
    const auto nodes = space.element_nodes(t);
    for (std::size_t i = 0; i < nl; ++i)
      for (std::size_t j = 0; j < nl; ++j) k.add(nodes[i], nodes[j], ke[i][j]);
  }
  k.finalize();
  return k;
}

StripSolution solve_wstar(const StripFESpace& space, const BoundaryFESpace& bspace,
                          std::span<const double> gamma_values) {
  if (space.degree() != bspace.degree()) throw ConfigError("solve_wstar: strip and boundary degrees differ");
  if (gamma_values.size() != bspace.num_nodes()) throw NumericalError("solve_wstar: boundary data size mismatch");
  const Mesh2D& mesh = space.mesh();
  const BoundaryMesh& bmesh = bspace.mesh();
  StripSolution out;
  out.w.assign(space.num_nodes(), 0.0);
  for (std::size_t lv = 0; lv < bmesh.num_vertices(); ++lv) {
    const std::size_t node = space.vertex_node(bmesh.global_vertex(lv));
    if (node == npos || space.tag(node) != NodeTag::dirichlet_gamma)
      throw MeshError("solve_wstar: boundary vertex missing from the strip");
    out.w[node] = gamma_values[lv];
  }
  if (space.degree() == 2)
    for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
      const std::size_t node = space.edge_node(bmesh.info(s).mesh_edge);
      if (node == npos) throw MeshError("solve_wstar: boundary edge missing from the strip");
      out.w[node] = gamma_values[bmesh.num_vertices() + s];
    }

  std::vector<std::size_t> free_index(space.num_nodes(), npos);
  std::size_t nf = 0;
  for (std::size_t i = 0; i < space.num_nodes(); ++i)
    if (space.tag(i) == NodeTag::free) free_index[i] = nf++;
  if (nf == 0) return out;

  SparseSymMatrix kff(nf);
  Vector rhs(nf, 0.0);
  const std::size_t nl = space.nodes_per_element();
  for (auto t : space.strip().elements) {
    const auto ke = element_stiffness(corners(mesh, t), space.degree());
    const auto nodes = space.element_nodes(t);
    for (std::size_t i = 0; i < nl; ++i) {
      const std::size_t fi = free_index[nodes[i]];
      if (fi == npos) continue;
      for (std::size_t j = 0; j < nl; ++j) {
        const std::size_t fj = free_index[nodes[j]];
        if (fj == npos)
          rhs[fi] -= ke[i][j] * out.w[nodes[j]];
        else
          kff.add(fi, fj, ke[i][j]);
      }
    }
  }
  kff.finalize();
  const Vector wf = sparse_spd_solve(kff, rhs);
  const Vector kw = kff.multiply(wf);
  double num = 0.0;
  for (std::size_t i = 0; i < nf; ++i) num += (kw[i] - rhs[i]) * (kw[i] - rhs[i]);
  const double den = norm2(rhs);
  out.relative_residual = den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
  for (std::size_t i = 0; i < space.num_nodes(); ++i)
    if (free_index[i] != npos) out.w[i] = wf[free_index[i]];
  return out;
}

Vector eta_indicators(const StripFESpace& space, const StripSolution& w) {
  const Mesh2D& mesh = space.mesh();
  Vector eta(mesh.num_triangles(), 0.0);
  const std::size_t nl = space.nodes_per_element();
  for (auto t : space.strip().elements) {
    const auto ke = element_stiffness(corners(mesh, t), space.degree());
    const auto nodes = space.element_nodes(t);
    double e2 = 0.0;
    for (std::size_t i = 0; i < nl; ++i)
      for (std::size_t j = 0; j < nl; ++j) e2 += w.w[nodes[i]] * ke[i][j] * w.w[nodes[j]];
    eta[t] = std::sqrt(std::max(e2, 0.0));
  }
  return eta;
}

Vector osc_indicators(const BoundarySamples& r, const BoundaryFESpace& space, std::span<const double> jr,
                      std::size_t num_triangles) {
  const BoundaryMesh& bmesh = space.mesh();
  const GaussRule& rule = *r.rule;
  Vector osc2(num_triangles, 0.0);
  for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
    const double len = bmesh.length(s);
    double acc = 0.0;
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double d = r.derivative(s, g) - boundary_fe_derivative(space, jr, s, rule.nodes[g] * len);
      acc += rule.weights[g] * d * d;
    }
    osc2[bmesh.info(s).parent] += len * len * acc;
  }
  for (auto& v : osc2) v = std::sqrt(v);
  return osc2;
}

double error_surrogate(const Density& phi, const std::function<double(Point)>& exact_u, const Mesh2D& mesh) {
  const BoundaryMesh& bmesh = *phi.mesh;
  const std::size_t nv = mesh.num_vertices();
  const std::size_t ne = mesh.num_edges();
  const std::size_t nt = mesh.num_triangles();
  const std::size_t nodes = nv + 3 * ne + 3 * nt;
  // Density segment carrying each boundary edge of `mesh` (which may refine the density mesh).
  std::vector<std::size_t> edge_segment(ne, npos);
  for (std::size_t e = 0; e < ne; ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const Point m = midpoint(mesh.vertex(mesh.edge_vertices(e)[0]), mesh.vertex(mesh.edge_vertices(e)[1]));
    for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
      const Segment sg = bmesh.segment(s);
      const double len = sg.length();
      const double t = dot(m - sg.a, sg.tangent());
      if (t > 0.0 && t < len && std::abs(cross(sg.tangent(), m - sg.a)) <= 1e-12 * len) {
        edge_segment[e] = s;
        break;
      }
    }
    if (edge_segment[e] == npos) throw MeshError("error_surrogate: mesh boundary does not match the density mesh");
  }

  // Lattice points (a, b, c) / 4 of every triangle.
  std::vector<Point> pos(nodes);
  for (std::size_t v = 0; v < nv; ++v) pos[v] = mesh.vertex(v);
  for (std::size_t e = 0; e < ne; ++e) {
    const Point a = mesh.vertex(mesh.edge_vertices(e)[0]);
    const Point b = mesh.vertex(mesh.edge_vertices(e)[1]);
    for (int i = 0; i < 3; ++i) pos[nv + 3 * e + static_cast<std::size_t>(i)] = a + (0.25 * (i + 1)) * (b - a);
  }
  static constexpr int kInterior[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  for (std::size_t t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i) {
      Point x{};
      for (int a = 0; a < 3; ++a) x = x + (0.25 * kInterior[i][a]) * mesh.corner(t, a);
      pos[nv + 3 * ne + 3 * t + static_cast<std::size_t>(i)] = x;
    }

  const SingleLayerEvaluator ev(phi);
  Vector ul(nodes, 0.0);
  const long long total = static_cast<long long>(nodes);
#pragma omp parallel for schedule(dynamic, 256)
  for (long long idx = 0; idx < total; ++idx) {
    const std::size_t i = static_cast<std::size_t>(idx);
    std::size_t seg = npos;
    if (i >= nv && i < nv + 3 * ne) seg = edge_segment[(i - nv) / 3];
    if (seg == npos) {
      ul[i] = ev.potential(pos[i]);
    } else {
      const Segment sg = bmesh.segment(seg);
      const double t = dot(pos[i] - sg.a, sg.tangent());
      const double len = sg.length();
      // lattice points may coincide with density vertices, where the potential is continuous
      ul[i] = (t > 1e-12 * len && t < len * (1.0 - 1e-12)) ? ev.on_boundary(seg, t).value : ev.potential(pos[i]);
    }
  }
  Vector err(nodes);
  for (std::size_t i = 0; i < nodes; ++i) err[i] = exact_u(pos[i]) - ul[i];

  auto lattice_node = [&](std::size_t t, std::array<int, 3> l) -> std::size_t {
    const auto& tri = mesh.triangle(t);
    for (std::size_t a = 0; a < 3; ++a)
      if (l[a] == 4) return tri.v[a];
    for (std::size_t z = 0; z < 3; ++z) {
      if (l[z] != 0) continue;
      // zero at vertex z: the edge joins the other two
      const std::size_t i0 = (z + 1) % 3;
      const std::size_t e = mesh.triangle_edges(t)[i0];
      const std::size_t first = mesh.edge_vertices(e)[0];
      const std::size_t la = tri.v[i0] == first ? i0 : (i0 + 1) % 3;
      return nv + 3 * e + static_cast<std::size_t>(3 - l[la]);
    }
    for (std::size_t i = 0; i < 3; ++i)
      if (l[0] == kInterior[i][0] && l[1] == kInterior[i][1]) return nv + 3 * ne + 3 * t + i;
    return npos;
  };

  static constexpr int kChildren[4][3][3] = {{{4, 0, 0}, {2, 2, 0}, {2, 0, 2}},
                                             {{0, 4, 0}, {0, 2, 2}, {2, 2, 0}},
                                             {{0, 0, 4}, {2, 0, 2}, {0, 2, 2}},
                                             {{2, 2, 0}, {0, 2, 2}, {2, 0, 2}}};
  double total2 = 0.0;
  for (std::size_t t = 0; t < nt; ++t)
    for (const auto& child : kChildren) {
      std::array<std::array<int, 3>, 6> lat;
      for (std::size_t i = 0; i < 3; ++i) lat[i] = {child[i][0], child[i][1], child[i][2]};
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& a = lat[i];
        const auto& b = lat[(i + 1) % 3];
        lat[3 + i] = {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
      }
      std::array<Point, 3> p;
      for (std::size_t i = 0; i < 3; ++i) p[i] = pos[lattice_node(t, lat[i])];
      const auto ke = element_stiffness(p, 2);
      std::array<double, 6> e;
      for (std::size_t i = 0; i < 6; ++i) e[i] = err[lattice_node(t, lat[i])];
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) total2 += e[i] * ke[i][j] * e[j];
    }
  if (!std::isfinite(total2)) throw NumericalError("error_surrogate: non-finite value");
  return std::sqrt(std::max(total2, 0.0));
}

}  // namespace stripbem
