#include "stripbem/mesh.hpp"

#include <algorithm>
#include <map>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "stripbem/error.hpp"

namespace stripbem {

double segment_distance(const Segment& s1, const Segment& s2) {
  auto point_to_segment = [](Point p, const Segment& s) {
    const Point d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (s.a + t * d));
  };
  // Proper intersection means distance zero.
  const double o1 = cross(s1.b - s1.a, s2.a - s1.a);
  const double o2 = cross(s1.b - s1.a, s2.b - s1.a);
  const double o3 = cross(s2.b - s2.a, s1.a - s2.a);
  const double o4 = cross(s2.b - s2.a, s1.b - s2.a);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return 0.0;
  return std::min({point_to_segment(s1.a, s2), point_to_segment(s1.b, s2), point_to_segment(s2.a, s1),
                   point_to_segment(s2.b, s1)});
}

Mesh2D::Mesh2D(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (auto v : tri.v) {
      if (v >= vertices_.size()) throw MeshError("triangle " + std::to_string(t) + " references a missing vertex");
    }
    if (tri.refedge < 0 || tri.refedge > 2) throw MeshError("triangle " + std::to_string(t) + ": invalid reference edge");
    if (!(area(t) > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
  }
  build_topology();
}

Mesh2D Mesh2D::with_longest_edge_reference(std::vector<Point> vertices,
                                           const std::vector<std::array<std::size_t, 3>>& triangles) {
  std::vector<Triangle> tris;
  tris.reserve(triangles.size());
  for (const auto& v : triangles) {
    Triangle t;
    t.v = v;
    int best = -1;
    double best_len = -1.0;
    std::size_t best_opp = npos;
    for (int i = 0; i < 3; ++i) {
      if (v[i] >= vertices.size() || v[(i + 1) % 3] >= vertices.size())
        throw MeshError("triangle references a missing vertex");
      const double len = norm(vertices[v[(i + 1) % 3]] - vertices[v[i]]);
      const std::size_t opp = v[(i + 2) % 3];
      // Equal lengths up to rounding count as a tie.
      const bool longer = len > best_len * (1.0 + 1e-12);
      const bool tie = !longer && len >= best_len * (1.0 - 1e-12);
      if (best < 0 || longer || (tie && opp < best_opp)) {
        best = i;
        best_len = len;
        best_opp = opp;
      }
    }
    t.refedge = best;
    tris.push_back(t);
  }
  return Mesh2D(std::move(vertices), std::move(tris));
}

void Mesh2D::build_topology() {
  const std::size_t nt = triangles_.size();
  struct Half {
    std::size_t a, b, tri;
    int local;
  };
  std::vector<Half> halves;
  halves.reserve(3 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    for (int i = 0; i < 3; ++i) {
      std::size_t a = triangles_[t].v[i];
      std::size_t b = triangles_[t].v[(i + 1) % 3];
      if (a == b) throw MeshError("degenerate triangle " + std::to_string(t));
      if (a > b) std::swap(a, b);
      halves.push_back({a, b, t, i});
    }
  }
  std::sort(halves.begin(), halves.end(), [](const Half& x, const Half& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.tri < y.tri;
  });
  triangle_edges_.assign(nt, {npos, npos, npos});
  edge_vertices_.clear();
  edge_triangles_.clear();
  for (std::size_t i = 0; i < halves.size();) {
    std::size_t j = i;
    while (j < halves.size() && halves[j].a == halves[i].a && halves[j].b == halves[i].b) ++j;
    if (j - i > 2) {
      throw MeshError("edge (" + std::to_string(halves[i].a) + "," + std::to_string(halves[i].b) +
                      ") is shared by more than two triangles");
    }
    const std::size_t e = edge_vertices_.size();
    edge_vertices_.push_back({halves[i].a, halves[i].b});
    std::array<std::size_t, 2> adj{halves[i].tri, npos};
    if (j - i == 2) {
      adj[1] = halves[i + 1].tri;
      if (adj[0] == adj[1]) throw MeshError("triangle uses an edge twice");
    }
    edge_triangles_.push_back(adj);
    for (std::size_t k = i; k < j; ++k) triangle_edges_[halves[k].tri][halves[k].local] = e;
    i = j;
  }

  const std::size_t nv = vertices_.size();
  vertex_tri_offset_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (auto v : tri.v) ++vertex_tri_offset_[v + 1];
  for (std::size_t v = 0; v < nv; ++v) vertex_tri_offset_[v + 1] += vertex_tri_offset_[v];
  vertex_tri_.assign(vertex_tri_offset_[nv], 0);
  {
    std::vector<std::size_t> fill(vertex_tri_offset_.begin(), vertex_tri_offset_.end() - 1);
    for (std::size_t t = 0; t < nt; ++t)
      for (auto v : triangles_[t].v) vertex_tri_[fill[v]++] = t;
  }

  vertex_edge_offset_.assign(nv + 1, 0);
  for (const auto& ev : edge_vertices_) {
    ++vertex_edge_offset_[ev[0] + 1];
    ++vertex_edge_offset_[ev[1] + 1];
  }
  for (std::size_t v = 0; v < nv; ++v) vertex_edge_offset_[v + 1] += vertex_edge_offset_[v];
  vertex_edge_.assign(vertex_edge_offset_[nv], 0);
  {
    std::vector<std::size_t> fill(vertex_edge_offset_.begin(), vertex_edge_offset_.end() - 1);
    for (std::size_t e = 0; e < edge_vertices_.size(); ++e) {
      vertex_edge_[fill[edge_vertices_[e][0]]++] = e;
      vertex_edge_[fill[edge_vertices_[e][1]]++] = e;
    }
  }
}

std::size_t Mesh2D::find_edge(std::size_t a, std::size_t b) const {
  if (a >= vertices_.size() || b >= vertices_.size()) return npos;
  if (a > b) std::swap(a, b);
  for (std::size_t k = vertex_edge_offset_[a]; k < vertex_edge_offset_[a + 1]; ++k) {
    const std::size_t e = vertex_edge_[k];
    if (edge_vertices_[e][0] == a && edge_vertices_[e][1] == b) return e;
  }
  return npos;
}

double Mesh2D::area(std::size_t t) const {
  const auto& v = triangles_[t].v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double Mesh2D::diameter(std::size_t t) const {
  const auto& v = triangles_[t].v;
  return std::max({norm(vertices_[v[1]] - vertices_[v[0]]), norm(vertices_[v[2]] - vertices_[v[1]]),
                   norm(vertices_[v[0]] - vertices_[v[2]])});
}

double Mesh2D::edge_length(std::size_t e) const {
  return norm(vertices_[edge_vertices_[e][1]] - vertices_[edge_vertices_[e][0]]);
}

void Mesh2D::check_conforming() const {
  // Boundary edges oriented as in their triangle; follow them into loops.
  std::unordered_map<std::size_t, std::vector<std::size_t>> outgoing;
  std::vector<std::pair<std::size_t, std::size_t>> directed;
  for (std::size_t e = 0; e < num_edges(); ++e) {
    if (!is_boundary_edge(e)) continue;
    const std::size_t t = edge_triangles_[e][0];
    const auto& te = triangle_edges_[t];
    const int local = static_cast<int>(std::find(te.begin(), te.end(), e) - te.begin());
    const std::size_t a = triangles_[t].v[local];
    const std::size_t b = triangles_[t].v[(local + 1) % 3];
    outgoing[a].push_back(directed.size());
    directed.emplace_back(a, b);
  }
  double total_area = 0.0;
  for (std::size_t t = 0; t < num_triangles(); ++t) total_area += area(t);
  std::vector<char> used(directed.size(), 0);
  for (std::size_t start = 0; start < directed.size(); ++start) {
    if (used[start]) continue;
    double loop_area = 0.0;
    std::size_t cur = start;
    for (;;) {
      used[cur] = 1;
      const Point p = vertices_[directed[cur].first];
      const Point q = vertices_[directed[cur].second];
      loop_area += 0.5 * cross(p, q);
      const auto& next = outgoing[directed[cur].second];
      std::size_t nxt = npos;
      for (auto c : next)
        if (!used[c]) {
          nxt = c;
          break;
        }
      if (nxt == npos) break;
      cur = nxt;
    }
    if (directed[cur].second != directed[start].first) throw MeshError("boundary edges do not form closed loops");
    if (std::abs(loop_area) <= 1e-12 * total_area) throw MeshError("mesh has a hanging node (degenerate boundary loop)");
  }

  // A hanging node is a boundary vertex in the relative interior of a boundary edge.
  if (directed.empty()) return;
  std::vector<std::size_t> bverts;
  double hmax = 0.0;
  double xmin = vertices_[directed[0].first].x, ymin = vertices_[directed[0].first].y;
  for (const auto& [a, b] : directed) {
    bverts.push_back(a);
    hmax = std::max(hmax, norm(vertices_[b] - vertices_[a]));
    xmin = std::min(xmin, vertices_[a].x);
    ymin = std::min(ymin, vertices_[a].y);
  }
  std::sort(bverts.begin(), bverts.end());
  bverts.erase(std::unique(bverts.begin(), bverts.end()), bverts.end());
  const auto cell = [&](Point p) {
    return std::pair<long long, long long>{static_cast<long long>(std::floor((p.x - xmin) / hmax)),
                                           static_cast<long long>(std::floor((p.y - ymin) / hmax))};
  };
  std::map<std::pair<long long, long long>, std::vector<std::size_t>> buckets;
  for (auto v : bverts) buckets[cell(vertices_[v])].push_back(v);
  for (const auto& [a, b] : directed) {
    const Point pa = vertices_[a];
    const Point pb = vertices_[b];
    const double len = norm(pb - pa);
    const auto [ca_x, ca_y] = cell(pa);
    const auto [cb_x, cb_y] = cell(pb);
    for (long long cx = std::min(ca_x, cb_x); cx <= std::max(ca_x, cb_x); ++cx)
      for (long long cy = std::min(ca_y, cb_y); cy <= std::max(ca_y, cb_y); ++cy) {
        const auto it = buckets.find({cx, cy});
        if (it == buckets.end()) continue;
        for (auto v : it->second) {
          if (v == a || v == b) continue;
          const Point p = vertices_[v];
          const double t = dot(p - pa, pb - pa) / (len * len);
          if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
          if (std::abs(cross(pb - pa, p - pa)) <= 1e-12 * len * len)
            throw MeshError("mesh has a hanging node at vertex " + std::to_string(v));
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Newest vertex bisection

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

struct Bisector {
  const std::unordered_map<std::uint64_t, std::size_t>& midpoint;
  std::vector<Triangle>& out;
  std::vector<std::size_t>& parent;

  // Triangle (p0, p1, p2) with reference edge (p0, p1).
  void run(std::size_t p0, std::size_t p1, std::size_t p2, int generation, std::size_t from) {
    const auto it = midpoint.find(edge_key(p0, p1));
    if (it == midpoint.end()) {
      out.push_back(Triangle{{p0, p1, p2}, 0, generation});
      parent.push_back(from);
      return;
    }
    const std::size_t m = it->second;
    // Children keep orientation; their reference edges are opposite the new vertex.
    run(p2, p0, m, generation + 1, from);
    run(p1, p2, m, generation + 1, from);
  }
};

}  // namespace

Refinement refine_nvb_tracked(const Mesh2D& mesh, std::span<const std::size_t> marked) {
  const std::size_t nt = mesh.num_triangles();
  for (auto t : marked)
    if (t >= nt) throw MeshError("marked triangle index " + std::to_string(t) + " out of range");
  mesh.check_conforming();

  auto ref_edge = [&](std::size_t t) { return mesh.triangle_edges(t)[mesh.triangle(t).refedge]; };

  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::vector<std::size_t> work;
  auto mark_edge = [&](std::size_t e) {
    if (edge_marked[e]) return;
    edge_marked[e] = 1;
    for (auto t : mesh.edge_triangles(e))
      if (t != npos) work.push_back(t);
  };
  for (auto t : marked) mark_edge(ref_edge(t));
  // Closure: a triangle with any marked edge must have its reference edge marked.
  while (!work.empty()) {
    const std::size_t t = work.back();
    work.pop_back();
    mark_edge(ref_edge(t));
  }

  std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
  std::unordered_map<std::uint64_t, std::size_t> midpoint;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!edge_marked[e]) continue;
    const auto& ev = mesh.edge_vertices(e);
    midpoint.emplace(edge_key(ev[0], ev[1]), vertices.size());
    vertices.push_back(stripbem::midpoint(mesh.vertex(ev[0]), mesh.vertex(ev[1])));
  }

  Refinement result;
  std::vector<Triangle> tris;
  tris.reserve(nt + 4 * marked.size());
  Bisector bisect{midpoint, tris, result.parent};
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    const int r = tri.refedge;
    const std::size_t p0 = tri.v[r];
    const std::size_t p1 = tri.v[(r + 1) % 3];
    const std::size_t p2 = tri.v[(r + 2) % 3];
    if (!edge_marked[ref_edge(t)]) {
      tris.push_back(tri);
      result.parent.push_back(t);
      continue;
    }
    bisect.run(p0, p1, p2, tri.generation, t);
  }
  result.mesh = Mesh2D(std::move(vertices), std::move(tris));
  return result;
}

Mesh2D refine_nvb(const Mesh2D& mesh, std::span<const std::size_t> marked) {
  return refine_nvb_tracked(mesh, marked).mesh;
}

double shape_regularity(const Mesh2D& mesh) {
  double kappa = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    kappa = std::max(kappa, mesh.diameter(t) / std::sqrt(mesh.area(t)));
  return kappa;
}

double nvb_shape_bound(const Mesh2D& mesh) {
  // Bisection of one triangle produces at most four similarity classes, all of
  // which occur within the first few generations; five levels cover them.
  double kappa = 0.0;
  struct Tri {
    Point p0, p1, p2;  // reference edge (p0, p1)
  };
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const int r = tri.refedge;
    std::vector<Tri> level{{mesh.corner(t, r), mesh.corner(t, (r + 1) % 3), mesh.corner(t, (r + 2) % 3)}};
    for (int depth = 0; depth <= 5; ++depth) {
      std::vector<Tri> next;
      for (const auto& c : level) {
        const double area = signed_area(c.p0, c.p1, c.p2);
        const double diam = std::max({norm(c.p1 - c.p0), norm(c.p2 - c.p1), norm(c.p0 - c.p2)});
        kappa = std::max(kappa, diam / std::sqrt(area));
        const Point m = midpoint(c.p0, c.p1);
        next.push_back({c.p2, c.p0, m});
        next.push_back({c.p1, c.p2, m});
      }
      level = std::move(next);
    }
  }
  return kappa;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out << "mesh2d " << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  for (const auto& p : mesh.vertices()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  for (const auto& t : mesh.triangles())
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.refedge << '\n';
}

Mesh2D read_mesh(std::istream& in) {
  std::string tag;
  std::size_t nv = 0;
  std::size_t nt = 0;
  if (!(in >> tag >> nv >> nt) || tag != "mesh2d") throw MeshError("read_mesh: missing 'mesh2d <nv> <nt>' header");
  std::vector<Point> vertices(nv);
  for (auto& p : vertices)
    if (!(in >> p.x >> p.y)) throw MeshError("read_mesh: truncated vertex list");
  std::vector<Triangle> tris(nt);
  for (auto& t : tris)
    if (!(in >> t.v[0] >> t.v[1] >> t.v[2] >> t.refedge)) throw MeshError("read_mesh: truncated triangle list");
  return Mesh2D(std::move(vertices), std::move(tris));
}

}  // namespace stripbem

namespace stripbem {

RedRefinement refine_red(const Mesh2D& mesh) {
  const std::size_t nv = mesh.num_vertices();
  std::vector<Point> verts(mesh.vertices().begin(), mesh.vertices().end());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ev = mesh.edge_vertices(e);
    verts.push_back(midpoint(mesh.vertex(ev[0]), mesh.vertex(ev[1])));
  }
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.num_triangles());
  RedRefinement out;
  out.parent.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangle(t).v;
    const auto& te = mesh.triangle_edges(t);
    const std::size_t m0 = nv + te[0], m1 = nv + te[1], m2 = nv + te[2];
    const int g = mesh.triangle(t).generation + 2;
    tris.push_back({{v[0], m0, m2}, 1, g});
    tris.push_back({{m0, v[1], m1}, 2, g});
    tris.push_back({{m2, m1, v[2]}, 0, g});
    tris.push_back({{m0, m1, m2}, 0, g});
    for (int c = 0; c < 4; ++c) out.parent.push_back(t);
  }
  out.mesh = Mesh2D(std::move(verts), std::move(tris));
  out.edge_children.resize(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ev = mesh.edge_vertices(e);
    out.edge_children[e] = {out.mesh.find_edge(ev[0], nv + e), out.mesh.find_edge(nv + e, ev[1])};
  }
  return out;
}

}  // namespace stripbem
