#include "stripbem/bem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "stripbem/error.hpp"
#include "stripbem/quadrature.hpp"

namespace stripbem {
namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

using Block = std::array<std::array<double, 2>, 2>;

// w * ln r with r^2 = r2, and the 0 * log 0 = 0 convention.
inline double w_log(double w, double log_r, double r2) { return r2 == 0.0 ? 0.0 : w * log_r; }
inline double r2_log(double r2, double log_r) { return r2 == 0.0 ? 0.0 : r2 * log_r; }

LogMoments log_moments_near(const Segment& seg, Point x) {
  const Point d0 = seg.a - x;
  const Point d1 = seg.b - x;
  const double len = seg.length();
  const Point e = (1.0 / len) * (seg.b - seg.a);
  const double w0 = dot(d0, e);
  const double w1 = dot(d1, e);
  const double eta = cross(d0, e);
  const double theta = std::atan2(cross(d0, d1), dot(d0, d1));
  const double r0 = dot(d0, d0);
  const double r1 = dot(d1, d1);
  const double l0 = r0 > 0.0 ? 0.5 * std::log(r0) : 0.0;
  const double l1 = r1 > 0.0 ? 0.5 * std::log(r1) : 0.0;
  const double k0 = w_log(w1, l1, r1) - w_log(w0, l0, r0) - len + eta * theta;
  const double k1 = 0.5 * (r2_log(r1, l1) - r2_log(r0, l0)) - 0.25 * (w1 * w1 - w0 * w0);
  return {k0, (k1 - w0 * k0) / len};
}

// Even and odd parts of the multipole series about the midpoint, z = x - mid,
// e the unit direction; requires |z| >= 2 L.
void multipole_sums(std::complex<double> z, std::complex<double> e, double len, double* even, double& odd) {
  const std::complex<double> q = e * (0.5 * len) / z;
  double ev = 0.0;
  odd = 0.0;
  std::complex<double> qk = q;
  for (int k = 1; k <= 27; ++k) {
    if (k % 2 == 0) {
      ev += qk.real() / (k * (k + 1.0));
    } else {
      odd += qk.real() / (k * (k + 2.0));
    }
    qk *= q;
  }
  if (even) *even = ev;
}

LogMoments log_moments_far(const Segment& seg, Point x) {
  const double len = seg.length();
  const Point mid = midpoint(seg.a, seg.b);
  const std::complex<double> z(x.x - mid.x, x.y - mid.y);
  const std::complex<double> eps((seg.b.x - seg.a.x) / len, (seg.b.y - seg.a.y) / len);
  double even = 0.0, odd = 0.0;
  multipole_sums(z, eps, len, &even, odd);
  const double m0 = len * std::log(std::abs(z)) - len * even;
  const double dip = -0.5 * len * odd;
  return {m0, 0.5 * m0 + dip};
}

// F_k(u) = Re[(u + i h)^k / k! (log(u + i h) - H_k)], with F_k' = F_{k-1}.
double antideriv_f(int k, double u, double h) {
  static constexpr double harmonic[] = {0.0, 1.0, 1.5, 11.0 / 6.0, 25.0 / 12.0, 137.0 / 60.0, 49.0 / 20.0};
  static constexpr double factorial[] = {1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0};
  if (h == 0.0) {
    if (u == 0.0) return 0.0;
    return std::pow(u, k) / factorial[k] * (std::log(std::abs(u)) - harmonic[k]);
  }
  const std::complex<double> zeta(u, h);
  std::complex<double> zk(1.0, 0.0);
  for (int i = 0; i < k; ++i) zk *= zeta;
  return (zk * (std::log(zeta) - harmonic[k])).real() / factorial[k];
}

// Normalised moments N[a][b] = int int ln|x - y| s^a t^b with s, t in [0, 1] mapped to
// the two segments, converted to the nodal basis block [j][i].
Block block_from_moments(const double n[2][2], int p) {
  Block out{};
  if (p == 0) {
    out[0][0] = n[0][0];
    return out;
  }
  out[1][1] = n[1][1];
  out[1][0] = n[1][0] - n[1][1];
  out[0][1] = n[0][1] - n[1][1];
  out[0][0] = n[0][0] - n[1][0] - n[0][1] + n[1][1];
  return out;
}

bool same_point(Point a, Point b, double tol) { return norm(a - b) <= tol; }

Block parallel_block(const Segment& sx, const Segment& sy, int p) {
  const Point a = sx.b - sx.a;
  const Point b = sy.b - sy.a;
  const double lx = norm(a);
  const double ly = norm(b);
  const Point e = (1.0 / lx) * a;
  const double sigma = dot(a, b) >= 0.0 ? 1.0 : -1.0;
  const Point diff = sx.a - sy.a;
  const double kappa = dot(diff, e);
  const double h = cross(e, diff);

  const double scale = std::max(lx, ly);
  if (std::abs(h) <= 1e-12 * scale) {
    const double ylo = std::min(0.0, sigma * ly);
    const double yhi = std::max(0.0, sigma * ly);
    const double overlap = std::min(kappa + lx, yhi) - std::max(kappa, ylo);
    if (overlap > 1e-12 * scale) {
      const double tol = 1e-12 * scale;
      const bool identical = (same_point(sx.a, sy.a, tol) && same_point(sx.b, sy.b, tol)) ||
                             (same_point(sx.a, sy.b, tol) && same_point(sx.b, sy.a, tol));
      if (!identical) throw MeshError("overlapping boundary segments");
    }
  }

  const double ca = kappa - sigma * ly;
  const double cb = kappa;
  auto outer = [&](int i, int m, double c) {
    if (i == 0) return antideriv_f(m + 1, c + lx, h) - antideriv_f(m + 1, c, h);
    return lx * antideriv_f(m + 1, c + lx, h) - antideriv_f(m + 2, c + lx, h) + antideriv_f(m + 2, c, h);
  };
  double n[2][2] = {};
  const int imax = p == 0 ? 0 : 1;
  for (int i = 0; i <= imax; ++i) {
    const double sx_scale = i == 0 ? 1.0 : lx;
    n[i][0] = -sigma * (outer(i, 1, ca) - outer(i, 1, cb)) / sx_scale;
    if (p == 1) n[i][1] = (-sigma * ly * outer(i, 1, ca) - (outer(i, 2, ca) - outer(i, 2, cb))) / (sx_scale * ly);
  }
  return block_from_moments(n, p);
}

// Polynomial in z = (z1, z2) of degree <= 2: [1, z1, z2, z1^2, z1 z2, z2^2].
using Poly2 = std::array<double, 6>;

Poly2 affine_product(double a0, Point a, double b0, Point b) {
  return {a0 * b0, a0 * b.x + b0 * a.x, a0 * b.y + b0 * a.y, a.x * b.x, a.x * b.y + a.y * b.x, a.y * b.y};
}

// int w^k ln(w^2 + c^2) dw, c != 0.
double antideriv_a(int k, double w, double c) {
  const double l = std::log(w * w + c * c);
  switch (k) {
    case 0:
      return w * l - 2.0 * w + 2.0 * c * std::atan(w / c);
    case 1:
      return 0.5 * ((w * w + c * c) * l - w * w);
    default:
      return w * w * w / 3.0 * l - 2.0 * w * w * w / 9.0 + 2.0 / 3.0 * c * c * w - 2.0 / 3.0 * c * c * c * std::atan(w / c);
  }
}

// int_P ln|z| Q(z) dz over a counter-clockwise convex polygon, via
// Q_m ln|z| = div(z Q_m (ln|z| / (m + 2) - 1 / (m + 2)^2)) for homogeneous parts Q_m.
double polygon_log_integral(std::span<const Point> poly, const Poly2& q) {
  double total = 0.0;
  const std::size_t nv = poly.size();
  for (std::size_t k = 0; k < nv; ++k) {
    const Point pa = poly[k];
    const Point pb = poly[(k + 1) % nv];
    const double len = norm(pb - pa);
    if (len == 0.0) continue;
    const Point e = (1.0 / len) * (pb - pa);
    const Point nu{e.y, -e.x};
    const double c = 0.5 * (dot(pa, nu) + dot(pb, nu));
    if (c == 0.0) continue;
    const double wa = dot(pa, e);
    const double wb = dot(pb, e);
    const double ia[3] = {antideriv_a(0, wb, c) - antideriv_a(0, wa, c), antideriv_a(1, wb, c) - antideriv_a(1, wa, c),
                          antideriv_a(2, wb, c) - antideriv_a(2, wa, c)};
    const double ip[3] = {wb - wa, 0.5 * (wb * wb - wa * wa), (wb * wb * wb - wa * wa * wa) / 3.0};
    // Homogeneous parts restricted to the edge, as polynomials in w.
    double qm[3][3] = {};
    qm[0][0] = q[0];
    qm[1][0] = c * (q[1] * nu.x + q[2] * nu.y);
    qm[1][1] = q[1] * e.x + q[2] * e.y;
    qm[2][0] = c * c * (q[3] * nu.x * nu.x + q[4] * nu.x * nu.y + q[5] * nu.y * nu.y);
    qm[2][1] = c * (2.0 * q[3] * nu.x * e.x + q[4] * (nu.x * e.y + nu.y * e.x) + 2.0 * q[5] * nu.y * e.y);
    qm[2][2] = q[3] * e.x * e.x + q[4] * e.x * e.y + q[5] * e.y * e.y;
    double edge = 0.0;
    for (int m = 0; m <= 2; ++m) {
      const double f1 = 0.5 / (m + 2.0);
      const double f2 = 1.0 / ((m + 2.0) * (m + 2.0));
      for (int kk = 0; kk <= m; ++kk) {
        if (qm[m][kk] != 0.0) edge += qm[m][kk] * (f1 * ia[kk] - f2 * ip[kk]);
      }
    }
    total += c * edge;
  }
  return total;
}

Block parallelogram_block(const Segment& sx, const Segment& sy, int p) {
  const Point a = sx.b - sx.a;
  const Point b = sy.b - sy.a;
  const double det = -cross(a, b);
  const Point z00 = sx.a - sy.a;
  std::array<Point, 4> poly{z00, sx.b - sy.a, sx.b - sy.b, sx.a - sy.b};
  if (det < 0.0) std::reverse(poly.begin(), poly.end());
  const Point alpha{-b.y / det, b.x / det};
  const Point beta{-a.y / det, a.x / det};
  const double alpha0 = -dot(alpha, z00);
  const double beta0 = -dot(beta, z00);
  const double factor = norm(a) * norm(b) / std::abs(det);

  Block out{};
  if (p == 0) {
    out[0][0] = factor * polygon_log_integral(poly, Poly2{1.0, 0, 0, 0, 0, 0});
    return out;
  }
  const double s0[2] = {1.0 - alpha0, alpha0};
  const Point s1[2] = {-1.0 * alpha, alpha};
  const double t0[2] = {1.0 - beta0, beta0};
  const Point t1[2] = {-1.0 * beta, beta};
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      out[j][i] = factor * polygon_log_integral(poly, affine_product(s0[j], s1[j], t0[i], t1[i]));
  return out;
}

// Outer Gauss quadrature on the shorter segment, inner moments analytic.
Block outer_quadrature_block(const Segment& sx, const Segment& sy, int p, const GaussRule& rule) {
  Block out{};
  const bool outer_x = sx.length() <= sy.length();
  const Segment& so = outer_x ? sx : sy;
  const Segment& si = outer_x ? sy : sx;
  const double lo = so.length();
  for (std::size_t g = 0; g < rule.size(); ++g) {
    const double s = rule.nodes[g];
    const Point x = so.a + s * (so.b - so.a);
    const LogMoments m = log_moments(si, x);
    const double w = rule.weights[g] * lo;
    if (p == 0) {
      out[0][0] += w * m.m0;
      continue;
    }
    const double po[2] = {1.0 - s, s};
    const double mi[2] = {m.m0 - m.m1, m.m1};
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        if (outer_x) {
          out[j][i] += w * po[j] * mi[i];
        } else {
          out[j][i] += w * po[i] * mi[j];
        }
      }
  }
  return out;
}

Block adaptive_outer_block(const Segment& sx, const Segment& sy, int p) {
  const GaussRule& rule = gauss_legendre(10);
  const double scale = sx.length() * sy.length() * (1.0 + std::abs(std::log(sx.length() + sy.length())));
  const double tol = 1e-16 * scale;
  const Point dx = sx.b - sx.a;
  auto piece = [&](double lo, double hi) {
    const Segment sub{sx.a + lo * dx, sx.a + hi * dx};
    const double len = sub.length();
    Block b{};
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double s = rule.nodes[g];
      const LogMoments m = log_moments(sy, sub.a + s * (sub.b - sub.a));
      const double w = rule.weights[g] * len;
      const double sg = lo + s * (hi - lo);
      const double po[2] = {p == 0 ? 1.0 : 1.0 - sg, sg};
      const double mi[2] = {p == 0 ? m.m0 : m.m0 - m.m1, m.m1};
      for (int j = 0; j <= p; ++j)
        for (int i = 0; i <= p; ++i) b[j][i] += w * po[j] * mi[i];
    }
    return b;
  };
  auto diff = [](const Block& u, const Block& v) {
    double d = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) d = std::max(d, std::abs(u[j][i] - v[j][i]));
    return d;
  };
  auto add = [](Block u, const Block& v) {
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) u[j][i] += v[j][i];
    return u;
  };
  auto recurse = [&](auto&& self, double lo, double hi, const Block& whole, int depth) -> Block {
    const double mid = 0.5 * (lo + hi);
    const Block left = piece(lo, mid);
    const Block right = piece(mid, hi);
    const Block both = add(left, right);
    if (depth >= 45 || diff(both, whole) <= tol) return both;
    return add(self(self, lo, mid, left, depth + 1), self(self, mid, hi, right, depth + 1));
  };
  return recurse(recurse, 0.0, 1.0, piece(0.0, 1.0), 0);
}

}  // namespace

double kernel_G(Point x) {
  const double r = norm(x);
  if (r == 0.0) throw NumericalError("kernel_G: singular at the origin");
  return -kInv2Pi * std::log(r);
}

double Density::value(std::size_t seg, double s) const {
  if (p == 0) return coeffs[seg];
  const double t = s / mesh->length(seg);
  return coeffs[2 * seg] * (1.0 - t) + coeffs[2 * seg + 1] * t;
}

LogMoments log_moments(const Segment& seg, Point x) {
  const double len = seg.length();
  if (norm(x - midpoint(seg.a, seg.b)) >= 2.0 * len) return log_moments_far(seg, x);
  return log_moments_near(seg, x);
}

std::array<std::array<double, 2>, 2> segment_pair_block(const Segment& sx, const Segment& sy, int p) {
  if (p != 0 && p != 1) throw ConfigError("density degree must be 0 or 1");
  const double lx = sx.length();
  const double ly = sy.length();
  const double dist = segment_distance(sx, sy);
  const double lshort = std::min(lx, ly);
  Block raw;
  if (dist >= 2.0 * lshort) {
    raw = outer_quadrature_block(sx, sy, p, gauss_legendre(9));
  } else if (dist >= lshort) {
    raw = outer_quadrature_block(sx, sy, p, gauss_legendre(16));
  } else {
    const double sine = cross(sx.b - sx.a, sy.b - sy.a) / (lx * ly);
    if (std::abs(sine) <= 1e-10) {
      raw = parallel_block(sx, sy, p);
    } else if (std::abs(sine) < 0.05) {
      raw = adaptive_outer_block(sx, sy, p);
    } else {
      raw = parallelogram_block(sx, sy, p);
    }
  }
  for (auto& row : raw)
    for (auto& v : row) v *= -kInv2Pi;
  return raw;
}

double segment_pair_integral(const Segment& s1, const Segment& s2, int i, int j, int p) {
  if (i < 0 || j < 0 || i > p || j > p) throw ConfigError("basis index out of range");
  return segment_pair_block(s1, s2, p)[j][i];
}

DenseSymMatrix assemble_V(const BoundaryMesh& bmesh, int p) {
  if (p != 0 && p != 1) throw ConfigError("density degree must be 0 or 1");
  const double diam = bmesh.diameter();
  if (!(diam < 1.0))
    throw ConfigError("diam(Omega) = " + std::to_string(diam) + " >= 1; rescale the geometry");
  const std::size_t ns = bmesh.num_segments();
  const std::size_t nd = static_cast<std::size_t>(p + 1);
  DenseSymMatrix v(ns * nd);
  const long long nsl = static_cast<long long>(ns);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long ix = 0; ix < nsl; ++ix) {
    const std::size_t x = static_cast<std::size_t>(ix);
    const Segment sx = bmesh.segment(x);
    for (std::size_t y = x; y < ns; ++y) {
      const Block b = segment_pair_block(sx, bmesh.segment(y), p);
      for (std::size_t j = 0; j < nd; ++j)
        for (std::size_t i = 0; i < nd; ++i) {
          if (x == y && i < j) continue;
          const double val = x == y ? 0.5 * (b[j][i] + b[i][j]) : b[j][i];
          v.set(x * nd + j, y * nd + i, val);
        }
    }
  }
  return v;
}

Vector assemble_rhs(const BoundaryMesh& bmesh, const DirichletData& data, int p) {
  if (p != 0 && p != 1) throw ConfigError("density degree must be 0 or 1");
  const GaussRule& rule = gauss_legendre(kRhsPoints);
  const std::size_t nd = static_cast<std::size_t>(p + 1);
  Vector rhs(bmesh.num_segments() * nd, 0.0);
  for (std::size_t s = 0; s < bmesh.num_segments(); ++s) {
    const Segment seg = bmesh.segment(s);
    const double len = bmesh.length(s);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double t = rule.nodes[g];
      const double val = rule.weights[g] * len * data.g(seg.a + t * (seg.b - seg.a));
      if (p == 0) {
        rhs[s] += val;
      } else {
        rhs[2 * s] += (1.0 - t) * val;
        rhs[2 * s + 1] += t * val;
      }
    }
  }
  return rhs;
}

GalerkinSolution solve_galerkin(std::shared_ptr<const BoundaryMesh> bmesh, const DirichletData& data, int p) {
  GalerkinSolution out;
  out.V = assemble_V(*bmesh, p);
  out.rhs = assemble_rhs(*bmesh, data, p);
  CholeskyResult chol = cholesky_solve_ex(out.V, out.rhs);
  out.relative_residual = chol.relative_residual;
  out.density.p = p;
  out.density.mesh = std::move(bmesh);
  out.density.coeffs = std::move(chol.x);
  return out;
}

SingleLayerEvaluator::SingleLayerEvaluator(const Density& phi) : mesh_(phi.mesh.get()), p_(phi.p) {
  if (!mesh_) throw NumericalError("density without boundary mesh");
  if (phi.coeffs.size() != mesh_->num_segments() * phi.dofs_per_segment())
    throw NumericalError("density coefficient count does not match its mesh");
  segs_.reserve(mesh_->num_segments());
  for (std::size_t s = 0; s < mesh_->num_segments(); ++s) {
    const auto& info = mesh_->info(s);
    const Segment seg = mesh_->segment(s);
    const double c0 = p_ == 0 ? phi.coeffs[s] : phi.coeffs[2 * s];
    const double c1 = p_ == 0 ? c0 : phi.coeffs[2 * s + 1];
    segs_.push_back({info.v0, info.v1, seg.tangent(), info.length, c0, c1});
  }
}

template <bool Gradient>
void SingleLayerEvaluator::accumulate(Point x, std::size_t self, double self_s, double& value, Point& grad) const {
  thread_local std::vector<Point> diff;
  thread_local std::vector<double> r2;
  thread_local std::vector<double> lr;
  const auto pts = mesh_->points();
  const std::size_t nv = pts.size();
  diff.resize(nv);
  r2.resize(nv);
  lr.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    diff[v] = pts[v] - x;
    r2[v] = dot(diff[v], diff[v]);
    lr[v] = r2[v] > 0.0 ? 0.5 * std::log(r2[v]) : 0.0;
  }
  double val = 0.0;
  Point g{};
  for (std::size_t k = 0; k < segs_.size(); ++k) {
    const Seg& sg = segs_[k];
    const double len = sg.length;
    double w0, w1, eta, theta, r0, r1, l0, l1;
    if (k == self) {
      w0 = -self_s;
      w1 = len - self_s;
      eta = 0.0;
      theta = 0.0;
      r0 = w0 * w0;
      r1 = w1 * w1;
      l0 = std::log(self_s);
      l1 = std::log(len - self_s);
    } else {
      const Point d0 = diff[sg.v0];
      const Point d1 = diff[sg.v1];
      w0 = dot(d0, sg.e);
      w1 = dot(d1, sg.e);
      eta = cross(d0, sg.e);
      theta = std::atan2(cross(d0, d1), dot(d0, d1));
      r0 = r2[sg.v0];
      r1 = r2[sg.v1];
      l0 = lr[sg.v0];
      l1 = lr[sg.v1];
    }
    const double slope = sg.c1 - sg.c0;
    const double k0 = w_log(w1, l1, r1) - w_log(w0, l0, r0) - len + eta * theta;
    val += sg.c0 * k0;
    if (p_ == 1 && slope != 0.0) {
      // the closed form cancels badly for short segments far away
      const Point zm = -1.0 * (diff[sg.v0] + (0.5 * len) * sg.e);
      if (k != self && dot(zm, zm) >= 4.0 * len * len) {
        double odd = 0.0;
        multipole_sums({zm.x, zm.y}, {sg.e.x, sg.e.y}, len, nullptr, odd);
        val += slope * (0.5 * k0 - 0.5 * len * odd);
      } else {
        const double k1 = 0.5 * (r2_log(r1, l1) - r2_log(r0, l0)) - 0.25 * (w1 * w1 - w0 * w0);
        val += slope * (k1 - w0 * k0) / len;
      }
    }
    if constexpr (Gradient) {
      const Point n = perp(sg.e);
      const double dl = l1 - l0;
      double gw = -dl * sg.c0;
      double gn = theta * sg.c0;
      if (p_ == 1 && slope != 0.0) {
        gw += slope * (-len + eta * theta + w0 * dl) / len;
        gn += slope * (eta * dl - w0 * theta) / len;
      }
      g = g + gw * sg.e + gn * n;
    }
  }
  value = -kInv2Pi * val;
  if constexpr (Gradient) grad = -kInv2Pi * g;
}

double SingleLayerEvaluator::potential(Point x) const {
  double v = 0.0;
  Point g{};
  accumulate<false>(x, npos, 0.0, v, g);
  return v;
}

Point SingleLayerEvaluator::gradient(Point x) const {
  double v = 0.0;
  Point g{};
  accumulate<true>(x, npos, 0.0, v, g);
  return g;
}

SingleLayerEvaluator::Trace SingleLayerEvaluator::on_boundary(std::size_t seg, double s) const {
  const Seg& sg = segs_.at(seg);
  if (!(s > 0.0 && s < sg.length)) throw NumericalError("boundary evaluation at a segment endpoint");
  const Point x = mesh_->point(sg.v0) + (s / sg.length) * (mesh_->point(sg.v1) - mesh_->point(sg.v0));
  double v = 0.0;
  Point g{};
  accumulate<true>(x, seg, s, v, g);
  return {v, dot(g, sg.e)};
}

void SingleLayerEvaluator::potentials(std::span<const Point> xs, std::span<double> out) const {
  const long long n = static_cast<long long>(xs.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = potential(xs[static_cast<std::size_t>(i)]);
}

double eval_potential(const Density& phi, Point x) { return SingleLayerEvaluator(phi).potential(x); }

Point eval_potential_gradient(const Density& phi, Point x) { return SingleLayerEvaluator(phi).gradient(x); }

double eval_V_on_boundary(const Density& phi, std::size_t seg, double s) {
  return SingleLayerEvaluator(phi).on_boundary(seg, s).value;
}

double eval_V_tangential_derivative(const Density& phi, std::size_t seg, double s) {
  return SingleLayerEvaluator(phi).on_boundary(seg, s).dt;
}

double energy_norm(std::span<const double> psi, const DenseSymMatrix& V) {
  if (psi.size() != V.size()) throw NumericalError("energy_norm: dimension mismatch");
  const double q = V.bilinear(psi, psi);
  if (q >= 0.0) return std::sqrt(q);
  double mag = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) mag += std::abs(V(i, j) * psi[i] * psi[j]);
  if (q < -1e-12 * mag) throw NumericalError("energy_norm: negative quadratic form");
  return 0.0;
}

double energy_norm(std::span<const double> psi, const BoundaryMesh& bmesh, int p) {
  return energy_norm(psi, assemble_V(bmesh, p));
}

}  // namespace stripbem
