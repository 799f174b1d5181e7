#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stripbem/bem.hpp"
#include "stripbem/mesh.hpp"

namespace stripbem {

enum class ExampleId { square_smooth, zshape_constant, zshape_singular };

std::string_view to_string(ExampleId id);
/// Throws ConfigError for an unknown name.
ExampleId parse_example_id(std::string_view name);

struct ExampleProblem {
  ExampleId id{};
  std::string name;
  std::vector<Point> polygon;  // counter-clockwise
  Mesh2D initial_mesh;
  DirichletData data;
  std::function<double(Point)> exact_u;
  std::function<Point(Point)> exact_gradient;
  std::optional<Point> reentrant_corner;
};

ExampleProblem build_example(ExampleId id);
ExampleProblem build_example(std::string_view name);

/// Square [x0, x0 + side] x [y0, y0 + side] as an n x n grid, each cell split along
/// its diagonal from the lower-left to the upper-right corner.
Mesh2D square_grid_mesh(Point lower_left, double side, int n);

/// Z-shape: the square [c - 1/4, c + 1/4]^2 around `center` minus the triangle with
/// corners center, center + (-1/4, -1/4), center + (0, -1/4). Built from the n x n
/// grid of square_grid_mesh by removing the triangles inside the wedge.
Mesh2D zshape_grid_mesh(Point center, int n);

/// r^(4/7) cos(4 phi / 7) with phi in [0, 7 pi / 4] measured counter-clockwise from
/// the ray (0, -1) through the origin.
double zshape_singular_u(Point x);
Point zshape_singular_gradient(Point x);

}  // namespace stripbem
