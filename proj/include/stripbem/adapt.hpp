#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <vector>

#include "stripbem/bem.hpp"
#include "stripbem/boundary.hpp"
#include "stripbem/problems.hpp"

namespace stripbem {

enum class MarkingStrategy { doerfler, maximum };

struct MarkingConfig {
  MarkingStrategy strategy = MarkingStrategy::doerfler;
  double theta = 0.5;  // Doerfler parameter in (0, 1]
  double c = 1.0;      // maximum strategy: M(t) = c t, c >= 1

  /// Throws ConfigError for out-of-range parameters.
  void validate() const;
};

/// Smallest set carrying a theta-fraction of sum(mu2): descending mu2, ties by
/// ascending index. Returned ascending. Empty if all indicators vanish.
std::vector<std::size_t> mark_doerfler(std::span<const double> mu2, double theta);
/// All T with mu2(T) >= max mu2 / c. Empty if all indicators vanish.
std::vector<std::size_t> mark_maximum(std::span<const double> mu2, double c);
std::vector<std::size_t> mark(std::span<const double> mu2, const MarkingConfig& cfg);

/// Which mesh the mixed problem for tau is solved on.
enum class TauMesh { strip, refined_strip };

struct AdaptiveOptions {
  int p = 0;
  int q = 1;
  int k = 3;
  MarkingConfig marking;
  std::size_t budget_ngamma = 3000;
  bool tau = true;
  bool surrogate = true;
  TauMesh tau_mesh = TauMesh::strip;
  std::size_t max_steps = 200;

  /// Throws ConfigError unless p in {0, 1}, q in {1, 2}, k >= 1.
  void validate() const;
};

struct StepReport {
  std::size_t ell = 0;
  std::size_t n_gamma = 0;
  std::size_t n_omega = 0;
  std::size_t n_mesh = 0;
  double eta = 0.0;
  double osc = 0.0;
  double tau = 0.0;            // zero unless enabled
  double err_surrogate = 0.0;  // zero unless enabled
  std::size_t n_marked = 0;
  double t_bem_s = 0.0;
  double t_fem_s = 0.0;
  double t_mixed_s = 0.0;
};

/// Everything computed in one step, passed to the observer before refinement.
struct StepState {
  const Mesh2D& mesh;
  const GalerkinSolution& bem;
  const StripDomain& strip;
  std::span<const double> eta;  // per triangle
  std::span<const double> osc;  // per triangle
  std::span<const std::size_t> marked;
  const StepReport& report;
};
using StepObserver = std::function<void(const StepState&)>;

struct AdaptiveResult {
  std::vector<StepReport> steps;
  bool converged = false;          // marking returned the empty set
  std::exception_ptr failure;      // set if a step threw; steps holds the completed ones
};

/// Algorithm loop: BEM solve, strip and w* solve, indicators, marking inside the
/// strip, NVB refinement; stops once #boundary segments >= budget, on empty marking,
/// or after max_steps.
AdaptiveResult run_adaptive(const ExampleProblem& problem, const AdaptiveOptions& options,
                            const StepObserver& observer = {});

}  // namespace stripbem
