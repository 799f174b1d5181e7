#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "stripbem/boundary.hpp"
#include "stripbem/geometry.hpp"
#include "stripbem/linalg.hpp"

namespace stripbem {

inline constexpr double kPi = 3.14159265358979323846;

/// Fundamental solution -ln|x| / (2 pi). Throws NumericalError at x = 0.
double kernel_G(Point x);

/// Discontinuous piecewise polynomial boundary density of degree p in {0, 1}.
///
/// p = 0: one value per segment. p = 1: values at the start and end of each
/// segment (basis 1 - t/L and t/L in arclength t), stored at 2 i and 2 i + 1.
struct Density {
  int p = 0;
  std::shared_ptr<const BoundaryMesh> mesh;
  std::vector<double> coeffs;

  std::size_t dofs_per_segment() const { return static_cast<std::size_t>(p + 1); }
  /// Density value on segment `seg` at arclength s.
  double value(std::size_t seg, double s) const;
};

/// Dirichlet data and its arclength derivative along a unit tangent.
struct DirichletData {
  std::function<double(Point)> g;
  std::function<double(Point, Point)> dg;
};

/// Integrals of ln|x - y(t)| against 1 and t/L over y(t) = a + t (b - a) / L.
struct LogMoments {
  double m0 = 0.0;
  double m1 = 0.0;
};
LogMoments log_moments(const Segment& seg, Point x);

/// Block of double integrals  int_{sx} int_{sy} G(x - y) psi_i(y) psi_j(x) dy dx,
/// indexed [j][i]; only [0][0] is used for p = 0. Throws MeshError for overlapping
/// but non-identical collinear segments.
std::array<std::array<double, 2>, 2> segment_pair_block(const Segment& sx, const Segment& sy, int p);
double segment_pair_integral(const Segment& s1, const Segment& s2, int i, int j, int p);

/// Galerkin single-layer matrix. Throws ConfigError unless diam(Omega) < 1.
DenseSymMatrix assemble_V(const BoundaryMesh& bmesh, int p);

/// Points per segment used by assemble_rhs.
inline constexpr int kRhsPoints = 8;
Vector assemble_rhs(const BoundaryMesh& bmesh, const DirichletData& data, int p);

struct GalerkinSolution {
  Density density;
  DenseSymMatrix V;
  Vector rhs;
  double relative_residual = 0.0;
};
GalerkinSolution solve_galerkin(std::shared_ptr<const BoundaryMesh> bmesh, const DirichletData& data, int p);

/// Evaluates the single-layer potential of a density and its boundary trace.
/// Logarithms at boundary vertices are shared between adjacent segments.
class SingleLayerEvaluator {
 public:
  explicit SingleLayerEvaluator(const Density& phi);

  double potential(Point x) const;
  Point gradient(Point x) const;

  struct Trace {
    double value = 0.0;
    double dt = 0.0;  // derivative along the segment direction
  };
  /// V phi and its arclength derivative at arclength s in the interior of segment `seg`.
  Trace on_boundary(std::size_t seg, double s) const;

  /// Batched potential; parallel over points.
  void potentials(std::span<const Point> xs, std::span<double> out) const;

 private:
  struct Seg {
    std::size_t v0, v1;
    Point e;
    double length;
    double c0, c1;  // density at start/end (equal for p = 0)
  };
  template <bool Gradient>
  void accumulate(Point x, std::size_t self, double self_s, double& value, Point& grad) const;

  const BoundaryMesh* mesh_;
  int p_;
  std::vector<Seg> segs_;
};

double eval_potential(const Density& phi, Point x);
Point eval_potential_gradient(const Density& phi, Point x);
double eval_V_on_boundary(const Density& phi, std::size_t seg, double s);
double eval_V_tangential_derivative(const Density& phi, std::size_t seg, double s);

/// sqrt(psi^T V psi). Throws NumericalError if the quadratic form is negative.
double energy_norm(std::span<const double> psi, const DenseSymMatrix& V);
double energy_norm(std::span<const double> psi, const BoundaryMesh& bmesh, int p);

}  // namespace stripbem
