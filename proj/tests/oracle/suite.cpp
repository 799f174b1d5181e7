#include "suite.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "oracle.hpp"
#include "stripbem/bem.hpp"
#include "stripbem/error.hpp"
#include "stripbem/mixedfem.hpp"
#include "stripbem/problems.hpp"
#include "stripbem/stripfem.hpp"

namespace stripbem::oracle {

namespace {

CheckResult check(std::string name, double value, double limit) {
  return {std::move(name), value, limit, std::isfinite(value) && value <= limit};
}

double segment_integrals_error() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<std::pair<Segment, Segment>> cases = {
      {{{0, 0}, {0.1, 0}}, {{0.1, 0}, {0.1, 0.1}}},
      {{{0, 0}, {0.1, 0}}, {{0.1, 0}, {0.25, 0}}},
      {{{0, 0}, {0.1, 0}}, {{0.15, 0}, {0.3, 0}}},
      {{{0, 0}, {0.1, 0}}, {{0.0, 0.05}, {0.1, 0.05}}},
      {{{0, 0}, {0.1, 0}}, {{0.1, 0}, {0.0, 0.1}}},
      {{{0, 0}, {0.1, 0}}, {{0.1, 0}, {0.2, 0.003}}},
      {{{0.2, -0.1}, {0.05, 0.13}}, {{0.2, -0.1}, {0.05, 0.13}}},
  };
  for (int k = 0; k < 4; ++k) {
    const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)}, d{u(rng), u(rng)};
    cases.push_back({{a, b}, {b, c}});
    cases.push_back({{a, b}, {c, d}});
  }
  double err = 0.0;
  for (int p = 0; p <= 1; ++p)
    for (const auto& [sx, sy] : cases) {
      const auto blk = segment_pair_block(sx, sy, p);
      for (int j = 0; j <= p; ++j)
        for (int i = 0; i <= p; ++i) err = std::max(err, std::abs(blk[j][i] - pair_integral(sx, sy, i, j, p)));
    }
  for (const auto& [sx, sy] : cases) {
    for (double t : {0.0, 0.3, 0.5, 1.0}) {
      const Point x = sx.a + t * (sx.b - sx.a);
      const auto m = log_moments(sy, x);
      const double ref0 = log_potential(sy, x, 0, 0);
      const double ref1 = log_potential(sy, x, 1, 1);
      err = std::max({err, std::abs(m.m0 - ref0), std::abs(m.m1 - ref1)});
    }
  }
  return err;
}

std::shared_ptr<const BoundaryMesh> single_segment(Point a, Point b) {
  BoundaryMesh::SegmentInfo info{0, 1, 0, 0, norm(b - a)};
  return std::make_shared<const BoundaryMesh>(std::vector<Point>{a, b}, std::vector<std::size_t>{0, 1},
                                              std::vector<BoundaryMesh::SegmentInfo>{info},
                                              std::vector<BoundaryMesh::Loop>{{0, 1}});
}

struct VStats {
  double asymmetry = 0.0;
  double min_pivot = 1.0;
};

VStats v_stats() {
  VStats st;
  for (int p = 0; p <= 1; ++p)
    for (const auto& mesh : {square_grid_mesh({0, 0}, 0.5, 16), zshape_grid_mesh({0, 0}, 32)}) {
      const DenseSymMatrix v = assemble_V(extract_boundary(mesh), p);
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) st.asymmetry = std::max(st.asymmetry, std::abs(v(i, j) - v(j, i)));
      const CholeskyResult r = cholesky_solve_ex(v, Vector(v.size(), 1.0));
      st.min_pivot = std::min(st.min_pivot, r.min_pivot);
    }
  return st;
}

double galerkin_residual() {
  double worst = 0.0;
  for (auto id : {ExampleId::square_smooth, ExampleId::zshape_constant, ExampleId::zshape_singular}) {
    const ExampleProblem ex = build_example(id);
    const auto b = std::make_shared<const BoundaryMesh>(extract_boundary(ex.initial_mesh));
    for (int p = 0; p <= 1; ++p) {
      const GalerkinSolution sol = solve_galerkin(b, ex.data, p);
      const Vector vx = sol.V.multiply(sol.density.coeffs);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < vx.size(); ++i) {
        num += (vx[i] - sol.rhs[i]) * (vx[i] - sol.rhs[i]);
        den += sol.rhs[i] * sol.rhs[i];
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return worst;
}

struct FluxStats {
  double divergence = 0.0;
  double identity = 0.0;
};

FluxStats flux_stats() {
  FluxStats st;
  const ExampleProblem ex = build_example(ExampleId::square_smooth);
  const Mesh2D& mesh = ex.initial_mesh;
  const auto b = std::make_shared<const BoundaryMesh>(extract_boundary(mesh));
  for (int p = 0; p <= 1; ++p) {
    const GalerkinSolution sol = solve_galerkin(b, ex.data, p);
    // a perturbed density keeps the coarse load away from zero
    Density off = sol.density;
    for (std::size_t i = 0; i < off.coeffs.size(); ++i) off.coeffs[i] *= 1.0 + 0.1 * std::sin(double(i));
    for (int k : {1, 3}) {
      const StripDomain s = strip(mesh, k);
      const RTSpace space(mesh, s);
      const MixedSystem sys = assemble_mixed(space);
      const BoundarySamples r = sample_residual(*b, ex.data, off, residual_points(1));
      const Vector load = assemble_boundary_load(space, *b, r, &off);
      const FluxSolution f = solve_tau(space, sys, load);
      const Vector div = element_divergence(space, f.tau);
      for (double d : div) st.divergence = std::max(st.divergence, std::abs(d));
      double lt = 0.0;
      for (std::size_t i = 0; i < load.size(); ++i) lt += load[i] * f.tau[i];
      st.identity = std::max(st.identity, std::abs(f.norm2 - lt) / f.norm2);

      const BoundarySamples rh = sample_residual_halves(*b, ex.data, sol.density, residual_points(1));
      const RefinedFlux fine = solve_tau_refined(mesh, s, *b, rh, &sol.density);
      st.divergence = std::max(st.divergence, fine.max_divergence);
      st.identity = std::max(st.identity, std::abs(fine.solution.norm2 - fine.load_dot_tau) / fine.solution.norm2);
    }
  }
  return st;
}

double scott_zhang_idempotence() {
  const ExampleProblem ex = build_example(ExampleId::zshape_singular);
  const BoundaryMesh b = extract_boundary(ex.initial_mesh);
  double worst = 0.0;
  for (int q = 1; q <= 2; ++q) {
    const BoundaryFESpace space(b, q);
    const int npts = residual_points(q);
    const BoundarySamples r = sample_function(
        b, [&](std::size_t s, double t) { return ex.data.g(b.segment(s).at(t)); },
        [&](std::size_t s, double t) { return ex.data.dg(b.segment(s).at(t), b.segment(s).tangent()); }, npts);
    const Vector j1 = scott_zhang_boundary(r, space);
    const BoundarySamples again = sample_function(
        b, [&](std::size_t s, double t) { return boundary_fe_value(space, j1, s, t); },
        [&](std::size_t s, double t) { return boundary_fe_derivative(space, j1, s, t); }, npts);
    const Vector j2 = scott_zhang_boundary(again, space);
    for (std::size_t i = 0; i < j1.size(); ++i) worst = std::max(worst, std::abs(j1[i] - j2[i]));
  }
  return worst;
}

// largest shape_regularity / bound over the rounds; infinity on a conformity failure
double nvb_fuzz() {
  double worst = 0.0;
  for (auto id : {ExampleId::square_smooth, ExampleId::zshape_constant}) {
    Mesh2D m = build_example(id).initial_mesh;
    const double bound = nvb_shape_bound(m);
    std::mt19937 rng(99);
    std::bernoulli_distribution pick(0.2);
    for (int round = 0; round < 10; ++round) {
      std::vector<std::size_t> marked;
      for (std::size_t t = 0; t < m.num_triangles(); ++t)
        if (pick(rng)) marked.push_back(t);
      m = refine_nvb(m, marked);
      try {
        m.check_conforming();
      } catch (const MeshError&) {
        return INFINITY;
      }
      worst = std::max(worst, shape_regularity(m) / bound);
    }
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_suite() {
  std::vector<CheckResult> out;
  const auto guarded = [&](const std::string& name, double limit, auto&& fn) {
    try {
      out.push_back(check(name, fn(), limit));
    } catch (const std::exception&) {
      out.push_back({name, INFINITY, limit, false});
    }
  };
  guarded("segment integrals vs adaptive quadrature", 1e-10, segment_integrals_error);
  guarded("coincident segment L=1 equals 3/(4 pi)", 1e-12, [] {
    const Segment s{{0.0, 0.0}, {1.0, 0.0}};
    return std::abs(segment_pair_integral(s, s, 0, 0, 0) - 3.0 / (4.0 * kPi));
  });
  guarded("tangential self term at s=1/4, L=1", 1e-10, [] {
    const Density one{0, single_segment({0, 0}, {1, 0}), {1.0}};
    return std::abs(eval_V_tangential_derivative(one, 0, 0.25) - (-std::log(1.0 / 3.0) / (2 * kPi)));
  });
  const VStats vs = v_stats();
  out.push_back(check("V symmetric", vs.asymmetry, 0.0));
  out.push_back({"V Cholesky pivots positive", vs.min_pivot, 0.0, vs.min_pivot > 0.0});
  guarded("Galerkin relative residual", 1e-10, galerkin_residual);
  FluxStats fs{INFINITY, INFINITY};
  try {
    fs = flux_stats();
  } catch (const std::exception&) {
  }
  out.push_back(check("flux divergence elementwise", fs.divergence, 1e-10));
  out.push_back(check("flux energy identity (relative)", fs.identity, 1e-8));
  guarded("Scott-Zhang idempotence", 1e-12, scott_zhang_idempotence);
  guarded("NVB conformity fuzz, shape / bound", 1.0 + 1e-12, nvb_fuzz);
  return out;
}

}  // namespace stripbem::oracle
