#pragma once

#include <vector>

namespace stripbem {

/// Gauss-Legendre rule mapped to the unit interval [0, 1]; weights sum to one.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [0, 1]. Rules are computed once and cached.
const GaussRule& gauss_legendre(int n);

/// Smallest Gauss-Legendre rule that integrates polynomials of the given degree exactly.
const GaussRule& gauss_legendre_exact_for(int degree);

}  // namespace stripbem
