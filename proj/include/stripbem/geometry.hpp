#pragma once

#include <cmath>

namespace stripbem {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
constexpr Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
/// Counter-clockwise rotation by 90 degrees.
constexpr Point perp(Point a) { return {-a.y, a.x}; }

/// Straight boundary segment from `a` to `b`, parametrised by arclength.
struct Segment {
  Point a;
  Point b;

  double length() const { return norm(b - a); }
  Point tangent() const { return (1.0 / length()) * (b - a); }
  /// Outward normal for a counter-clockwise traversed outer boundary.
  Point outward_normal() const {
    const Point t = tangent();
    return {t.y, -t.x};
  }
  Point at(double s) const { return a + (s / length()) * (b - a); }
};

/// Distance between two closed segments.
double segment_distance(const Segment& s1, const Segment& s2);

/// Signed area of the triangle (a, b, c); positive for counter-clockwise order.
constexpr double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

}  // namespace stripbem
