#include "stripbem/problems.hpp"

#include <cmath>
#include <string>

#include "stripbem/error.hpp"

namespace stripbem {
namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kPhiMax = 7.0 * kPi / 4.0;

double zshape_phi(Point x) {
  double phi = std::atan2(x.y, x.x) + 0.5 * kPi;
  if (phi < 0.0) phi += kTwoPi;
  if (phi > kPhiMax) phi = phi > 0.5 * (kPhiMax + kTwoPi) ? 0.0 : kPhiMax;
  return phi;
}

Mesh2D compact(const std::vector<Point>& vertices, const std::vector<std::array<std::size_t, 3>>& tris) {
  std::vector<std::size_t> map(vertices.size(), npos);
  std::vector<Point> used;
  std::vector<std::array<std::size_t, 3>> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    std::array<std::size_t, 3> nt{};
    for (int i = 0; i < 3; ++i) {
      if (map[t[i]] == npos) {
        map[t[i]] = used.size();
        used.push_back(vertices[t[i]]);
      }
      nt[i] = map[t[i]];
    }
    out.push_back(nt);
  }
  return Mesh2D::with_longest_edge_reference(std::move(used), out);
}

void grid(Point lower_left, double side, int n, std::vector<Point>& vertices,
          std::vector<std::array<std::size_t, 3>>& tris, const std::function<bool(int, int, bool)>& keep) {
  const double h = side / n;
  const auto id = [n](int i, int j) { return static_cast<std::size_t>(j) * (n + 1) + i; };
  vertices.clear();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.push_back({lower_left.x + i * h, lower_left.y + j * h});
  tris.clear();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (keep(i, j, true)) tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      if (keep(i, j, false)) tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
}

}  // namespace

std::string_view to_string(ExampleId id) {
  switch (id) {
    case ExampleId::square_smooth:
      return "square-smooth";
    case ExampleId::zshape_constant:
      return "zshape-constant";
    case ExampleId::zshape_singular:
      return "zshape-singular";
  }
  return "unknown";
}

ExampleId parse_example_id(std::string_view name) {
  for (auto id : {ExampleId::square_smooth, ExampleId::zshape_constant, ExampleId::zshape_singular})
    if (to_string(id) == name) return id;
  throw ConfigError("unknown example '" + std::string(name) + "'");
}

Mesh2D square_grid_mesh(Point lower_left, double side, int n) {
  std::vector<Point> v;
  std::vector<std::array<std::size_t, 3>> t;
  grid(lower_left, side, n, v, t, [](int, int, bool) { return true; });
  return Mesh2D::with_longest_edge_reference(std::move(v), t);
}

Mesh2D zshape_grid_mesh(Point center, int n) {
  if (n % 2 != 0) throw ConfigError("zshape_grid_mesh: n must be even");
  const int half = n / 2;
  std::vector<Point> v;
  std::vector<std::array<std::size_t, 3>> t;
  // Wedge in cell indices: i < half, j <= i; on the diagonal only the lower-right half.
  grid(center - Point{0.25, 0.25}, 0.5, n, v, t, [half](int i, int j, bool lower_right) {
    if (i >= half || j >= half) return true;
    if (j < i) return false;
    if (j == i) return !lower_right;
    return true;
  });
  return compact(v, t);
}

double zshape_singular_u(Point x) {
  const double r = norm(x);
  if (r == 0.0) return 0.0;
  return std::pow(r, 4.0 / 7.0) * std::cos(4.0 * zshape_phi(x) / 7.0);
}

Point zshape_singular_gradient(Point x) {
  const double r = norm(x);
  if (r == 0.0) throw NumericalError("gradient of the singular solution at the reentrant corner");
  const double phi = zshape_phi(x);
  const double theta = std::atan2(x.y, x.x);
  const Point er{std::cos(theta), std::sin(theta)};
  const Point ephi{-std::sin(theta), std::cos(theta)};
  const double s = 4.0 / 7.0 * std::pow(r, -3.0 / 7.0);
  return s * std::cos(4.0 * phi / 7.0) * er - s * std::sin(4.0 * phi / 7.0) * ephi;
}

ExampleProblem build_example(ExampleId id) {
  ExampleProblem ex;
  ex.id = id;
  ex.name = std::string(to_string(id));
  switch (id) {
    case ExampleId::square_smooth: {
      ex.polygon = {{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
      ex.initial_mesh = square_grid_mesh({0.0, 0.0}, 0.5, 16);
      ex.exact_u = [](Point x) { return std::sinh(kTwoPi * x.x) * std::cos(kTwoPi * x.y); };
      ex.exact_gradient = [](Point x) {
        return Point{kTwoPi * std::cosh(kTwoPi * x.x) * std::cos(kTwoPi * x.y),
                     -kTwoPi * std::sinh(kTwoPi * x.x) * std::sin(kTwoPi * x.y)};
      };
      break;
    }
    case ExampleId::zshape_constant: {
      const Point c{0.25, 0.25};
      ex.polygon = {c, c + Point{0.0, -0.25}, c + Point{0.25, -0.25}, c + Point{0.25, 0.25}, c + Point{-0.25, 0.25},
                    c + Point{-0.25, -0.25}};
      ex.initial_mesh = zshape_grid_mesh(c, 32);
      ex.exact_u = [](Point) { return 1.0; };
      ex.exact_gradient = [](Point) { return Point{0.0, 0.0}; };
      break;
    }
    case ExampleId::zshape_singular: {
      ex.polygon = {{0.0, 0.0}, {0.0, -0.25}, {0.25, -0.25}, {0.25, 0.25}, {-0.25, 0.25}, {-0.25, -0.25}};
      ex.initial_mesh = zshape_grid_mesh({0.0, 0.0}, 32);
      ex.exact_u = zshape_singular_u;
      ex.exact_gradient = zshape_singular_gradient;
      ex.reentrant_corner = Point{0.0, 0.0};
      break;
    }
  }
  auto u = ex.exact_u;
  auto grad = ex.exact_gradient;
  ex.data.g = u;
  ex.data.dg = [grad](Point x, Point t) { return dot(grad(x), t); };
  return ex;
}

ExampleProblem build_example(std::string_view name) { return build_example(parse_example_id(name)); }

}  // namespace stripbem
