#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "stripbem/mixedfem.hpp"
#include "stripbem/problems.hpp"

using namespace stripbem;

namespace {

struct StripFixture {
  Mesh2D mesh;
  BoundaryMesh bmesh;
  StripDomain s;
  StripFixture(Mesh2D m, int k) : mesh(std::move(m)), bmesh(extract_boundary(mesh)), s(strip(mesh, k)) {}
};

BoundarySamples residual_of_example(const ExampleProblem& ex, const Mesh2D& mesh, int p, int q) {
  auto b = std::make_shared<const BoundaryMesh>(extract_boundary(mesh));
  const GalerkinSolution sol = solve_galerkin(b, ex.data, p);
  return sample_residual(*b, ex.data, sol.density, residual_points(q));
}

double max_abs(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// RT0 function of local edge i on a triangle, unit outward normal component on that edge.
Point rt_basis(const std::array<Point, 3>& p, int i, Point x) {
  const double area = 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  const Point e = p[static_cast<std::size_t>((i + 1) % 3)] - p[static_cast<std::size_t>(i)];
  return (norm(e) / (2 * area)) * (x - p[static_cast<std::size_t>((i + 2) % 3)]);
}

}  // namespace

TEST_CASE("rt0 element: unit normal trace, divergence, mass against quadrature") {
  const std::array<Point, 3> p = {Point{0.1, 0.0}, Point{0.9, 0.2}, Point{0.3, 0.7}};
  const double area = signed_area(p[0], p[1], p[2]);
  REQUIRE(area > 0);
  for (int i = 0; i < 3; ++i) {
    const Point a = p[static_cast<std::size_t>(i)];
    const Point b = p[static_cast<std::size_t>((i + 1) % 3)];
    const Point n = Segment{a, b}.outward_normal();
    for (double t : {0.0, 0.3, 1.0}) CHECK(dot(rt_basis(p, i, a + t * (b - a)), n) == doctest::Approx(1.0));
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const Point c = p[static_cast<std::size_t>(j)];
      const Point d = p[static_cast<std::size_t>((j + 1) % 3)];
      CHECK(std::abs(dot(rt_basis(p, i, midpoint(c, d)), Segment{c, d}.outward_normal())) < 1e-14);
    }
  }
  const auto m = rt_element_mass(p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double ref = oracle::integrate_triangle(
          [&](Point x) { return dot(rt_basis(p, i, x), rt_basis(p, j, x)); }, p[0], p[1], p[2]);
      CHECK(std::abs(m[i][j] - ref) < 1e-13);
    }
}

TEST_CASE("div block reproduces |e| / |T| on a single reference triangle") {
  const Mesh2D mesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{{0, 1, 2}, 0, 0}});
  const StripDomain s = strip(mesh, 1);
  const RTSpace space(mesh, s);
  REQUIRE(space.num_dofs() == 3);
  const MixedSystem sys = assemble_mixed(space);
  for (std::size_t d = 0; d < 3; ++d) {
    Vector unit(3, 0.0);
    unit[d] = 1.0;
    const double len = mesh.edge_length(space.dof_edge(d));
    CHECK(element_divergence(space, unit)[0] == doctest::Approx(len / 0.5));
    CHECK(sys.div.coeff(0, static_cast<Eigen::Index>(d)) == doctest::Approx(len));
  }
}

TEST_CASE("mass matrix SPD; constant fields are divergence free") {
  const ExampleProblem ex = build_example(ExampleId::zshape_singular);
  for (int k : {1, 3}) {
    const StripFixture f(ex.initial_mesh, k);
    const RTSpace space(f.mesh, f.s);
    const MixedSystem sys = assemble_mixed(space);
    CHECK(sys.mass.is_symmetric());
    const Eigen::MatrixXd dense(sys.mass.matrix());
    CHECK(Eigen::LLT<Eigen::MatrixXd>(dense).info() == Eigen::Success);
    CHECK(dense.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() > 0.0);

    // Interpolate c into the space by global normal components; inner edges drop out,
    // so only elements away from the inner boundary see zero divergence.
    const Point c{0.7, -1.3};
    Vector tau(space.num_dofs());
    for (std::size_t d = 0; d < space.num_dofs(); ++d) {
      const std::size_t e = space.dof_edge(d);
      const auto& adj = f.mesh.edge_triangles(e);
      std::size_t t = adj[0];
      if (adj[1] != npos && adj[1] < t) t = adj[1];
      int local = 0;
      while (f.mesh.triangle_edges(t)[static_cast<std::size_t>(local)] != e) ++local;
      const Point a = f.mesh.corner(t, local);
      const Point b = f.mesh.corner(t, (local + 1) % 3);
      // normal outward from the lower-index triangle
      tau[d] = dot(c, Segment{a, b}.outward_normal());
    }
    const Vector div = element_divergence(space, tau);
    for (std::size_t i = 0; i < space.num_elements(); ++i) {
      const std::size_t t = f.s.elements[i];
      bool touches_inner = false;
      for (auto e : f.mesh.triangle_edges(t))
        for (auto g : f.s.gammac_edges) touches_inner |= e == g;
      if (!touches_inner) CHECK(std::abs(div[i]) < 1e-12);
    }
  }
}

TEST_CASE("boundary load") {
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const StripFixture f(ex.initial_mesh, 3);
  const RTSpace space(f.mesh, f.s);
  const std::size_t ns = f.bmesh.num_segments();
  const BoundarySamples zero = sample_function(
      f.bmesh, [](std::size_t, double) { return 0.0; }, [](std::size_t, double) { return 0.0; }, 6);
  CHECK(max_abs(assemble_boundary_load(space, f.bmesh, zero)) == 0.0);
  const BoundarySamples one = sample_function(
      f.bmesh, [](std::size_t, double) { return 1.0; }, [](std::size_t, double) { return 0.0; }, 6);
  const Vector l1 = assemble_boundary_load(space, f.bmesh, one);
  std::size_t nonzero = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    CHECK(l1[space.edge_dof(f.bmesh.info(s).mesh_edge)] == doctest::Approx(f.bmesh.length(s)).epsilon(1e-14));
  }
  for (double v : l1) nonzero += v != 0.0;
  CHECK(nonzero == ns);

  // r of Example 1 against an independent integral of the sampled pointwise residual
  auto b = std::make_shared<const BoundaryMesh>(f.bmesh);
  const GalerkinSolution sol = solve_galerkin(b, ex.data, 0);
  const BoundarySamples r = sample_residual(*b, ex.data, sol.density, residual_points(1));
  const Vector load = assemble_boundary_load(space, f.bmesh, r, &sol.density);
  const SingleLayerEvaluator ev(sol.density);
  for (std::size_t s : {0u, 5u, 17u, 40u}) {
    const Segment sg = b->segment(s);
    const double ref = oracle::integrate(
        [&](double t) { return ex.data.g(sg.at(t)) - ev.on_boundary(s, t).value; }, 0.0, sg.length());
    CHECK(std::abs(load[space.edge_dof(b->info(s).mesh_edge)] - ref) < 1e-10 * (1.0 + std::abs(ref)));
  }
}

TEST_CASE("solve_tau: invariants, zero load, homogeneity") {
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const StripFixture f(ex.initial_mesh, 3);
  const RTSpace space(f.mesh, f.s);
  const MixedSystem sys = assemble_mixed(space);
  const BoundarySamples r = residual_of_example(ex, f.mesh, 0, 1);
  const Vector load = assemble_boundary_load(space, f.bmesh, r);
  const FluxSolution sol = solve_tau(space, sys, load);
  CHECK(max_abs(element_divergence(space, sol.tau)) <= 1e-10);
  const double rhs = std::inner_product(load.begin(), load.end(), sol.tau.begin(), 0.0);
  CHECK(std::abs(sol.norm2 - rhs) <= 1e-8 * sol.norm2);
  CHECK(tau_lower_bound(sol) > 0.0);
  for (auto e : f.s.gammac_edges) CHECK(space.edge_dof(e) == npos);

  const FluxSolution z = solve_tau(space, sys, Vector(space.num_dofs(), 0.0));
  CHECK(max_abs(z.tau) == 0.0);
  CHECK(tau_lower_bound(z) == 0.0);

  Vector twice = load;
  for (auto& v : twice) v *= 2.0;
  CHECK(tau_lower_bound(solve_tau(space, sys, twice)) == doctest::Approx(2.0 * tau_lower_bound(sol)).epsilon(1e-10));
}

TEST_CASE("solve_tau: two-element domain against a dense hand-assembled system") {
  // Square (0, 1/2)^2 split along its diagonal; the strip is the whole domain.
  const Mesh2D mesh = square_grid_mesh({0, 0}, 0.5, 1);
  const StripDomain s = strip(mesh, 1);
  REQUIRE(s.gammac_edges.empty());
  REQUIRE(s.elements.size() == 2);
  const BoundaryMesh b = extract_boundary(mesh);
  auto rfun = [](Point x) { return std::cos(3 * x.x) + x.y * x.y; };
  const BoundarySamples r = sample_function(
      b, [&](std::size_t seg, double t) { return rfun(b.segment(seg).at(t)); },
      [](std::size_t, double) { return 0.0; }, 6);
  const RTSpace space(mesh, s);
  const FluxSolution sol = solve_tau(space, assemble_mixed(space), assemble_boundary_load(space, b, r));

  // Hand assembly: 5 edges, the diagonal shared. Unknowns: outward fluxes of the four
  // boundary edges, diagonal flux oriented from the lower triangle, two pressures.
  const Point p00{0, 0}, p10{0.5, 0}, p11{0.5, 0.5}, p01{0, 0.5};
  struct Tri {
    std::array<Point, 3> v;
  };
  // lower-right and upper-left halves with counter-clockwise corners
  const Tri lower{{p00, p10, p11}};
  const Tri upper{{p00, p11, p01}};
  auto flux_field = [](const Tri& t, Point a, Point bb, Point x) {
    // unit outward normal component on edge (a, bb), zero on the others
    Point opp{};
    for (const Point& v : t.v)
      if (!(v == a) && !(v == bb)) opp = v;
    const double area = std::abs(signed_area(t.v[0], t.v[1], t.v[2]));
    return (norm(bb - a) / (2 * area)) * (x - opp);
  };
  // dofs: 0 bottom, 1 right, 2 top, 3 left, 4 diagonal (normal out of `lower`)
  struct Local {
    int dof;
    Point a, b;
    double sign;
  };
  const std::vector<Local> lo = {{0, p00, p10, 1}, {1, p10, p11, 1}, {4, p11, p00, 1}};
  const std::vector<Local> up = {{4, p00, p11, -1}, {2, p11, p01, 1}, {3, p01, p00, 1}};
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(7, 7);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(7);
  int elem = 0;
  for (const auto& [tri, locs] : {std::pair{lower, lo}, std::pair{upper, up}}) {
    const double area = std::abs(signed_area(tri.v[0], tri.v[1], tri.v[2]));
    for (const auto& li : locs) {
      for (const auto& lj : locs)
        kkt(li.dof, lj.dof) += li.sign * lj.sign *
                               oracle::integrate_triangle(
                                   [&](Point x) {
                                     return dot(flux_field(tri, li.a, li.b, x), flux_field(tri, lj.a, lj.b, x));
                                   },
                                   tri.v[0], tri.v[1], tri.v[2]);
      const double divint = li.sign * norm(li.b - li.a);  // int_T div = flux through the edge
      kkt(li.dof, 5 + elem) += divint;
      kkt(5 + elem, li.dof) += divint;
    }
    (void)area;
    ++elem;
  }
  const std::array<std::pair<Point, Point>, 4> outer = {std::pair{p00, p10}, {p10, p11}, {p11, p01}, {p01, p00}};
  for (int d = 0; d < 4; ++d) {
    const auto [a, bb] = outer[static_cast<std::size_t>(d)];
    rhs(d) = oracle::integrate([&](double t) { return rfun(a + t * (bb - a)); }, 0.0, 1.0) * norm(bb - a);
  }
  const Eigen::VectorXd x = kkt.fullPivLu().solve(rhs);
  double ref2 = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) ref2 += x(i) * kkt(i, j) * x(j);
  CHECK(sol.norm2 == doctest::Approx(ref2).epsilon(1e-10));
  // individual boundary fluxes
  for (int d = 0; d < 4; ++d) {
    const auto [a, bb] = outer[static_cast<std::size_t>(d)];
    const std::size_t e = mesh.find_edge(static_cast<std::size_t>(std::find(mesh.vertices().begin(), mesh.vertices().end(), a) - mesh.vertices().begin()),
                                         static_cast<std::size_t>(std::find(mesh.vertices().begin(), mesh.vertices().end(), bb) - mesh.vertices().begin()));
    CHECK(sol.tau[space.edge_dof(e)] == doctest::Approx(x(d)).epsilon(1e-10));
  }
}

TEST_CASE("tau does not decrease with the strip depth") {
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const Mesh2D& mesh = ex.initial_mesh;
  const BoundaryMesh b = extract_boundary(mesh);
  const BoundarySamples r = residual_of_example(ex, mesh, 0, 1);
  double prev = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const StripDomain s = strip(mesh, k);
    const RTSpace space(mesh, s);
    const double tau = tau_lower_bound(solve_tau(space, assemble_mixed(space), assemble_boundary_load(space, b, r)));
    CHECK(tau >= prev * (1.0 - 1e-8));
    prev = tau;
  }
}

TEST_CASE("coarse load vanishes for Galerkin densities") {
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const StripFixture f(ex.initial_mesh, 3);
  const RTSpace space(f.mesh, f.s);
  auto b = std::make_shared<const BoundaryMesh>(f.bmesh);
  for (int p = 0; p <= 1; ++p) {
    const GalerkinSolution sol = solve_galerkin(b, ex.data, p);
    const BoundarySamples r = sample_residual(*b, ex.data, sol.density, residual_points(1));
    const Vector load = assemble_boundary_load(space, f.bmesh, r, &sol.density);
    const BoundarySamples rh = sample_residual_halves(*b, ex.data, sol.density, residual_points(1));
    const Vector halves = residual_integrals(*b, rh, &sol.density, 2);
    double hmax = 0.0;
    for (std::size_t s = 0; s < b->num_segments(); ++s) {
      hmax = std::max(hmax, std::abs(halves[2 * s]));
      CHECK(std::abs(halves[2 * s] + halves[2 * s + 1] - load[space.edge_dof(b->info(s).mesh_edge)]) < 1e-13);
    }
    CHECK(max_abs(load) <= 1e-8 * hmax);
  }
}

TEST_CASE("refined strip flux: invariants and bounds") {
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const Mesh2D& mesh = ex.initial_mesh;
  auto b = std::make_shared<const BoundaryMesh>(extract_boundary(mesh));
  for (int p = 0; p <= 1; ++p) {
    const GalerkinSolution sol = solve_galerkin(b, ex.data, p);
    const double err = error_surrogate(sol.density, ex.exact_u, mesh);
    const BoundarySamples r = sample_residual(*b, ex.data, sol.density, residual_points(1));
    const BoundarySamples rh = sample_residual_halves(*b, ex.data, sol.density, residual_points(1));
    double prev = 0.0;
    for (int k : {1, 2, 3}) {
      const StripDomain s = strip(mesh, k);
      const RTSpace coarse(mesh, s);
      const double tc = tau_lower_bound(
          solve_tau(coarse, assemble_mixed(coarse), assemble_boundary_load(coarse, *b, r, &sol.density)));
      const RefinedFlux fine = solve_tau_refined(mesh, s, *b, rh, &sol.density);
      const double tf = tau_lower_bound(fine.solution);
      MESSAGE("p=" << p << " k=" << k << " tau coarse " << tc << " refined " << tf << " surrogate " << err);
      CHECK(fine.max_divergence <= 1e-10);
      CHECK(std::abs(fine.solution.norm2 - fine.load_dot_tau) <= 1e-8 * fine.solution.norm2);
      CHECK(tf >= tc);
      if (p == 0) CHECK(tf > 0.1 * err);
      CHECK(tf <= 1.05 * err);
      CHECK(tf >= prev * (1.0 - 1e-8));
      CHECK(fine.strip.elements.size() == 4 * s.elements.size());
      prev = tf;
    }
  }
}
