#include "stripbem/boundary.hpp"

#include <algorithm>
#include <string>

#include "stripbem/error.hpp"

namespace stripbem {

BoundaryMesh::BoundaryMesh(std::vector<Point> points, std::vector<std::size_t> global_ids,
                           std::vector<SegmentInfo> segments, std::vector<Loop> loops)
    : points_(std::move(points)),
      global_ids_(std::move(global_ids)),
      segments_(std::move(segments)),
      loops_(std::move(loops)) {
  const std::size_t n = segments_.size();
  prev_.assign(n, npos);
  next_.assign(n, npos);
  for (const auto& loop : loops_) {
    for (std::size_t k = 0; k < loop.count; ++k) {
      const std::size_t i = loop.first + k;
      next_[i] = loop.first + (k + 1) % loop.count;
      prev_[i] = loop.first + (k + loop.count - 1) % loop.count;
    }
  }
  vertex_segments_.assign(points_.size(), {});
  for (std::size_t i = 0; i < n; ++i) {
    vertex_segments_[segments_[i].v0].push_back(i);
    vertex_segments_[segments_[i].v1].push_back(i);
  }
  for (auto& v : vertex_segments_) std::sort(v.begin(), v.end());
}

double BoundaryMesh::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j) d = std::max(d, norm(points_[j] - points_[i]));
  return d;
}

BoundaryMesh extract_boundary(const Mesh2D& mesh) {
  struct Directed {
    std::size_t a, b, tri, edge;
  };
  std::vector<Directed> directed;
  std::vector<std::size_t> outgoing(mesh.num_vertices(), npos);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const std::size_t t = mesh.edge_triangles(e)[0];
    const auto& te = mesh.triangle_edges(t);
    const int local = static_cast<int>(std::find(te.begin(), te.end(), e) - te.begin());
    const std::size_t a = mesh.triangle(t).v[local];
    const std::size_t b = mesh.triangle(t).v[(local + 1) % 3];
    if (outgoing[a] != npos) throw MeshError("boundary is not a union of simple loops at vertex " + std::to_string(a));
    outgoing[a] = directed.size();
    directed.push_back({a, b, t, e});
  }

  std::vector<Point> points;
  std::vector<std::size_t> global_ids;
  std::vector<std::size_t> local_of(mesh.num_vertices(), npos);
  auto local = [&](std::size_t g) {
    if (local_of[g] == npos) {
      local_of[g] = points.size();
      points.push_back(mesh.vertex(g));
      global_ids.push_back(g);
    }
    return local_of[g];
  };

  std::vector<BoundaryMesh::SegmentInfo> segments;
  std::vector<BoundaryMesh::Loop> loops;
  std::vector<char> used(directed.size(), 0);
  for (std::size_t start = 0; start < directed.size(); ++start) {
    if (used[start]) continue;
    BoundaryMesh::Loop loop{segments.size(), 0};
    std::size_t cur = start;
    while (!used[cur]) {
      used[cur] = 1;
      const auto& d = directed[cur];
      BoundaryMesh::SegmentInfo info;
      info.v0 = local(d.a);
      info.v1 = local(d.b);
      info.parent = d.tri;
      info.mesh_edge = d.edge;
      info.length = norm(mesh.vertex(d.b) - mesh.vertex(d.a));
      segments.push_back(info);
      ++loop.count;
      cur = outgoing[d.b];
      if (cur == npos) throw MeshError("boundary loop is not closed");
    }
    if (cur != start) throw MeshError("boundary loop is not closed");
    loops.push_back(loop);
  }
  return BoundaryMesh(std::move(points), std::move(global_ids), std::move(segments), std::move(loops));
}

std::vector<std::size_t> k_patch_of_vertices(const Mesh2D& mesh, std::span<const std::size_t> seed_vertices, int k) {
  if (k < 1) throw ConfigError("k_patch: k must be at least 1");
  if (seed_vertices.empty()) throw ConfigError("k_patch: empty seed");
  std::vector<char> vertex_in(mesh.num_vertices(), 0);
  std::vector<char> tri_in(mesh.num_triangles(), 0);
  std::vector<std::size_t> frontier(seed_vertices.begin(), seed_vertices.end());
  for (auto v : frontier) vertex_in[v] = 1;
  for (int layer = 0; layer < k; ++layer) {
    std::vector<std::size_t> next;
    for (auto v : frontier) {
      for (auto t : mesh.vertex_triangles(v)) {
        if (tri_in[t]) continue;
        tri_in[t] = 1;
        for (auto w : mesh.triangle(t).v) {
          if (!vertex_in[w]) {
            vertex_in[w] = 1;
            next.push_back(w);
          }
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    if (tri_in[t]) out.push_back(t);
  return out;
}

std::vector<std::size_t> k_patch(const Mesh2D& mesh, std::span<const std::size_t> seed_triangles, int k) {
  std::vector<std::size_t> verts;
  for (auto t : seed_triangles) {
    if (t >= mesh.num_triangles()) throw MeshError("k_patch: seed triangle out of range");
    for (auto v : mesh.triangle(t).v) verts.push_back(v);
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  return k_patch_of_vertices(mesh, verts, k);
}

namespace {

std::vector<std::size_t> boundary_vertices(const Mesh2D& mesh) {
  std::vector<std::size_t> verts;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    verts.push_back(mesh.edge_vertices(e)[0]);
    verts.push_back(mesh.edge_vertices(e)[1]);
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  return verts;
}

}  // namespace

std::vector<std::size_t> k_patch_boundary(const Mesh2D& mesh, int k) {
  return k_patch_of_vertices(mesh, boundary_vertices(mesh), k);
}

StripDomain strip(const Mesh2D& mesh, int k) { return strip_from_elements(mesh, k_patch_boundary(mesh, k), k); }

StripDomain strip_from_elements(const Mesh2D& mesh, std::vector<std::size_t> elements, int depth) {
  StripDomain s;
  s.depth = depth;
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  s.elements = std::move(elements);
  s.contains.assign(mesh.num_triangles(), 0);
  for (auto t : s.elements) s.contains[t] = 1;

  s.vertex_tag.assign(mesh.num_vertices(), VertexTag::outside);
  for (auto t : s.elements)
    for (auto v : mesh.triangle(t).v) s.vertex_tag[v] = VertexTag::interior;

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& adj = mesh.edge_triangles(e);
    if (adj[1] == npos) {
      if (s.contains[adj[0]]) s.gamma_edges.push_back(e);
      continue;
    }
    if (s.contains[adj[0]] != s.contains[adj[1]]) s.gammac_edges.push_back(e);
  }
  for (auto e : s.gamma_edges)
    for (auto v : mesh.edge_vertices(e)) s.vertex_tag[v] = VertexTag::gamma;
  for (auto e : s.gammac_edges) {
    for (auto v : mesh.edge_vertices(e)) {
      if (s.vertex_tag[v] == VertexTag::gamma)
        throw MeshError("degenerate strip: inner boundary edge " + std::to_string(e) + " touches the outer boundary");
      s.vertex_tag[v] = VertexTag::gammac;
    }
  }
  return s;
}

}  // namespace stripbem
