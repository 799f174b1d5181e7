#include "stripbem/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "stripbem/error.hpp"
#include "stripbem/mixedfem.hpp"
#include "stripbem/stripfem.hpp"

namespace stripbem {

void MarkingConfig::validate() const {
  if (strategy == MarkingStrategy::doerfler && !(theta > 0.0 && theta <= 1.0))
    throw ConfigError("theta must lie in (0, 1], got " + std::to_string(theta));
  if (strategy == MarkingStrategy::maximum && !(c >= 1.0))
    throw ConfigError("maximum marking needs c >= 1, got " + std::to_string(c));
}

void AdaptiveOptions::validate() const {
  if (p != 0 && p != 1) throw ConfigError("p must be 0 or 1");
  if (q != 1 && q != 2) throw ConfigError("q must be 1 or 2");
  if (k < 1) throw ConfigError("k must be at least 1");
  marking.validate();
}

namespace {

void check_indicators(std::span<const double> mu2) {
  for (double v : mu2)
    if (!(v >= 0.0) || !std::isfinite(v)) throw NumericalError("marking: indicators must be finite and nonnegative");
}

}  // namespace

std::vector<std::size_t> mark_doerfler(std::span<const double> mu2, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  check_indicators(mu2);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < mu2.size(); ++i)
    if (mu2[i] > 0.0) order.push_back(i);
  if (order.empty()) return {};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu2[a] > mu2[b]; });
  double total = 0.0;
  for (auto i : order) total += mu2[i];
  const double target = theta * total;
  std::vector<std::size_t> marked;
  double acc = 0.0;
  for (auto i : order) {
    marked.push_back(i);
    acc += mu2[i];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

std::vector<std::size_t> mark_maximum(std::span<const double> mu2, double c) {
  if (!(c >= 1.0)) throw ConfigError("maximum marking needs c >= 1");
  check_indicators(mu2);
  const double mx = mu2.empty() ? 0.0 : *std::max_element(mu2.begin(), mu2.end());
  std::vector<std::size_t> marked;
  if (mx <= 0.0) return marked;
  for (std::size_t i = 0; i < mu2.size(); ++i)
    if (mu2[i] >= mx / c) marked.push_back(i);
  return marked;
}

std::vector<std::size_t> mark(std::span<const double> mu2, const MarkingConfig& cfg) {
  return cfg.strategy == MarkingStrategy::doerfler ? mark_doerfler(mu2, cfg.theta) : mark_maximum(mu2, cfg.c);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double global(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

AdaptiveResult run_adaptive(const ExampleProblem& problem, const AdaptiveOptions& options,
                            const StepObserver& observer) {
  options.validate();
  AdaptiveResult result;
  Mesh2D mesh = problem.initial_mesh;
  try {
    for (std::size_t ell = 0; ell < options.max_steps; ++ell) {
      StepReport rep;
      rep.ell = ell;
      rep.n_mesh = mesh.num_triangles();

      auto t0 = Clock::now();
      auto bmesh = std::make_shared<const BoundaryMesh>(extract_boundary(mesh));
      rep.n_gamma = bmesh->num_segments();
      const GalerkinSolution bem = solve_galerkin(bmesh, problem.data, options.p);
      const BoundarySamples r = sample_residual(*bmesh, problem.data, bem.density, residual_points(options.q));
      rep.t_bem_s = seconds_since(t0);

      t0 = Clock::now();
      const StripDomain s = strip(mesh, options.k);
      rep.n_omega = s.elements.size();
      const BoundaryFESpace bspace(*bmesh, options.q);
      const Vector jr = scott_zhang_boundary(r, bspace);
      const StripFESpace space(mesh, s, options.q);
      const StripSolution w = solve_wstar(space, bspace, jr);
      const Vector eta = eta_indicators(space, w);
      const Vector osc = osc_indicators(r, bspace, jr, mesh.num_triangles());
      rep.eta = global(eta);
      rep.osc = global(osc);
      rep.t_fem_s = seconds_since(t0);

      t0 = Clock::now();
      if (options.tau) {
        if (options.tau_mesh == TauMesh::strip) {
          const RTSpace rt(mesh, s);
          const Vector load = assemble_boundary_load(rt, *bmesh, r, &bem.density);
          rep.tau = tau_lower_bound(solve_tau(rt, assemble_mixed(rt), load));
        } else {
          const BoundarySamples halves =
              sample_residual_halves(*bmesh, problem.data, bem.density, residual_points(options.q));
          rep.tau = tau_lower_bound(solve_tau_refined(mesh, s, *bmesh, halves, &bem.density).solution);
        }
      }
      if (options.surrogate) rep.err_surrogate = error_surrogate(bem.density, problem.exact_u, mesh);
      rep.t_mixed_s = seconds_since(t0);

      const bool last = rep.n_gamma >= options.budget_ngamma || ell + 1 == options.max_steps;
      std::vector<std::size_t> marked;
      if (!last) {
        Vector mu2(mesh.num_triangles(), 0.0);
        for (auto t : s.elements) mu2[t] = eta[t] * eta[t] + osc[t] * osc[t];
        marked = mark(mu2, options.marking);
      }
      rep.n_marked = marked.size();
      result.steps.push_back(rep);
      if (observer) observer(StepState{mesh, bem, s, eta, osc, marked, result.steps.back()});
      if (last) break;
      if (marked.empty()) {
        result.converged = true;
        break;
      }
      mesh = refine_nvb(mesh, marked);
    }
  } catch (...) {
    result.failure = std::current_exception();
  }
  return result;
}

}  // namespace stripbem
