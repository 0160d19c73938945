#include "nlphase/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "nlphase/util.hpp"

namespace nlphase {

namespace {

constexpr double kPi = std::numbers::pi;

bool inside(double sdist) { return sdist >= 0.0; }

double boundary_tol(const Domain& omega) {
  return 1e-9 * (1.0 + omega.diameter());
}

// --- 1D ---------------------------------------------------------------------

void extract_1d(const GeometricSet& E, const Domain& omega,
                InterfaceMesh& mesh) {
  const int n = omega.cells[0];
  const double h = omega.spacing(0);
  const double lo = omega.lo[0], hi = omega.hi[0];
  auto f = [&](double x) { return E.signed_distance({x, 0, 0}, 1); };
  const double tolb = 1e-12 * (1.0 + omega.diameter());

  double fprev = f(lo);
  for (int i = 0; i < n; ++i) {
    const double xa = lo + i * h, xb = lo + (i + 1) * h;
    const double fnext = f(xb);
    if (inside(fprev) != inside(fnext)) {
      double a = xa, b = xb;
      bool ia = inside(fprev);
      for (int it = 0; it < 100 && b - a > 0.0; ++it) {
        const double m = 0.5 * (a + b);
        if (inside(f(m)) == ia)
          a = m;
        else
          b = m;
        if (b - a < 1e-16 * (1.0 + std::abs(a))) break;
      }
      const double p = 0.5 * (a + b);
      Facet fac;
      fac.center = {p, 0, 0};
      fac.measure = 1.0;  // counting measure
      fac.normal = {ia ? 1.0 : -1.0, 0, 0};
      fac.boundary = (std::abs(p - lo) <= tolb || std::abs(p - hi) <= tolb);
      mesh.facets.push_back(fac);
    }
    fprev = fnext;
  }
  // Container endpoints lying on the set boundary contribute H^0 = 1 each.
  for (const double p : {lo, hi}) {
    if (std::abs(f(p)) <= tolb) {
      const double slope = f(p + 1e-6) - f(p - 1e-6);
      Facet fac;
      fac.center = {p, 0, 0};
      fac.measure = 1.0;
      fac.normal = {slope > 0 ? -1.0 : 1.0, 0, 0};
      fac.boundary = true;
      mesh.facets.push_back(fac);
    }
  }
}

// --- 2D marching squares ----------------------------------------------------

struct Seg {
  double ax, ay, bx, by;
};

// Edge ids: 0 bottom, 1 right, 2 top, 3 left.
void cell_segments(const double fc[4], double x0, double y0, double h,
                   double fcenter, std::vector<Seg>& out) {
  // fc: f00 (BL), f10 (BR), f11 (TR), f01 (TL)
  const bool b0 = inside(fc[0]), b1 = inside(fc[1]), b2 = inside(fc[2]),
             b3 = inside(fc[3]);
  const int code = (b0 ? 1 : 0) | (b1 ? 2 : 0) | (b2 ? 4 : 0) | (b3 ? 8 : 0);
  if (code == 0 || code == 15) return;

  auto cross = [&](double fa, double fb) {
    return (fa == fb) ? 0.5 : fa / (fa - fb);
  };
  // Crossing points on the four edges.
  const double bx = x0 + h * cross(fc[0], fc[1]), bym = y0;       // bottom
  const double rx = x0 + h, ry = y0 + h * cross(fc[1], fc[2]);    // right
  const double tx = x0 + h * cross(fc[3], fc[2]), ty = y0 + h;    // top
  const double lx = x0, ly = y0 + h * cross(fc[0], fc[3]);        // left

  auto emit = [&](int ea, int eb) {
    double pax = 0, pay = 0, pbx = 0, pby = 0;
    auto pick = [&](int e, double& px, double& py) {
      switch (e) {
        case 0: px = bx; py = bym; break;
        case 1: px = rx; py = ry; break;
        case 2: px = tx; py = ty; break;
        default: px = lx; py = ly; break;
      }
    };
    pick(ea, pax, pay);
    pick(eb, pbx, pby);
    out.push_back({pax, pay, pbx, pby});
  };

  switch (code) {
    case 1: emit(3, 0); break;
    case 2: emit(0, 1); break;
    case 3: emit(3, 1); break;
    case 4: emit(2, 1); break;
    case 5:
      if (inside(fcenter)) {
        emit(3, 2);
        emit(0, 1);
      } else {
        emit(3, 0);
        emit(2, 1);
      }
      break;
    case 6: emit(0, 2); break;
    case 7: emit(3, 2); break;
    case 8: emit(3, 2); break;
    case 9: emit(0, 2); break;
    case 10:
      if (inside(fcenter)) {
        emit(3, 0);
        emit(2, 1);
      } else {
        emit(3, 2);
        emit(0, 1);
      }
      break;
    case 11: emit(2, 1); break;
    case 12: emit(3, 1); break;
    case 13: emit(0, 1); break;
    case 14: emit(3, 0); break;
    default: break;
  }
}

// Clip segment to the closed disk |x - c| <= r; false when nothing remains.
bool clip_to_ball(Seg& s, const Vec3& c, double r) {
  const double dx = s.bx - s.ax, dy = s.by - s.ay;
  const double ex = s.ax - c[0], ey = s.ay - c[1];
  const double A = dx * dx + dy * dy;
  if (A == 0) return false;
  const double B = 2.0 * (dx * ex + dy * ey);
  const double C = ex * ex + ey * ey - r * r;
  const double disc = B * B - 4 * A * C;
  if (disc <= 0) return false;  // tangent or outside: nothing of length
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-B - sq) / (2 * A));
  const double t1 = std::min(1.0, (-B + sq) / (2 * A));
  if (t1 <= t0) return false;
  const double nax = s.ax + t0 * dx, nay = s.ay + t0 * dy;
  const double nbx = s.ax + t1 * dx, nby = s.ay + t1 * dy;
  s = {nax, nay, nbx, nby};
  return true;
}

double dist_to_box_boundary(const Vec3& p, const Domain& omega) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a)
    d = std::min({d, p[a] - omega.lo[a], omega.hi[a] - p[a]});
  return d;
}

// Exact overlap of the set boundary with the face plane {x_axis = c} over
// the transverse interval [blo, bhi]; nullopt requests the sampled fallback.
std::optional<double> face_overlap_exact(const GeometricSet& E, int axis,
                                         double c, double blo, double bhi,
                                         double tol, bool& warn) {
  using Kind = GeometricSet::Kind;
  switch (E.kind()) {
    case Kind::Empty:
    case Kind::Full:
      return 0.0;
    case Kind::Complement:
      return face_overlap_exact(E.child(0), axis, c, blo, bhi, tol, warn);
    case Kind::HalfSpace: {
      const Vec3& n = E.normal();
      const int other = 1 - axis;
      if (std::abs(std::abs(n[axis]) - 1.0) < 1e-12 &&
          std::abs(n[other]) < 1e-12) {
        const double plane = n[axis] > 0 ? E.offset() : -E.offset();
        if (std::abs(plane - c) <= tol) {
          warn = true;  // boundary runs along the container face
          return bhi - blo;
        }
      }
      return 0.0;  // transversal: at most a point
    }
    case Kind::Box: {
      const Vec3& l = E.box_lo();
      const Vec3& h = E.box_hi();
      const int other = 1 - axis;
      if (std::abs(c - l[axis]) <= tol || std::abs(c - h[axis]) <= tol) {
        const double ov =
            std::min(bhi, h[other]) - std::max(blo, l[other]);
        if (ov > tol) {
          warn = true;
          return ov;
        }
      }
      return 0.0;
    }
    case Kind::Ball: {
      const double d = std::abs(c - E.center()[axis]);
      if (std::abs(d - E.radius()) <= tol) warn = true;  // tangent touch
      return 0.0;  // a line meets a circle in measure zero
    }
    default:
      return std::nullopt;
  }
}

void boundary_part_box_2d(const GeometricSet& E, const Domain& omega,
                          InterfaceMesh& mesh) {
  const double tol = boundary_tol(omega);
  struct Face {
    int axis;
    double c;
    double out;  // outward normal sign along axis
  };
  const Face faces[4] = {{0, omega.lo[0], -1},
                         {0, omega.hi[0], +1},
                         {1, omega.lo[1], -1},
                         {1, omega.hi[1], +1}};
  for (const Face& fa : faces) {
    const int other = 1 - fa.axis;
    const double blo = omega.lo[other], bhi = omega.hi[other];
    bool warn = false;
    double measure = 0.0;
    double mid = 0.5 * (blo + bhi);
    const auto exact = face_overlap_exact(E, fa.axis, fa.c, blo, bhi, tol, warn);
    if (exact) {
      measure = *exact;
    } else {
      // Dense sampling along the face; flagged lower-accuracy fallback.
      const int M = 4096;
      long cnt = 0;
      double centroid = 0.0;
      for (int k = 0; k < M; ++k) {
        Vec3 p{0, 0, 0};
        p[fa.axis] = fa.c;
        p[other] = blo + (k + 0.5) * (bhi - blo) / M;
        if (std::abs(E.signed_distance(p, 2)) <= tol) {
          ++cnt;
          centroid += p[other];
        }
      }
      measure = (bhi - blo) * double(cnt) / M;
      if (cnt > 0) {
        mid = centroid / double(cnt);
        warn = true;
      }
    }
    if (warn) mesh.tangential_warning = true;
    if (measure > tol) {
      Facet f;
      f.center[fa.axis] = fa.c;
      f.center[other] = mid;
      f.measure = measure;
      f.normal[fa.axis] = fa.out;
      f.boundary = true;
      mesh.facets.push_back(f);
    }
  }
}

void boundary_part_ball_2d(const GeometricSet& E, const Domain& omega,
                           InterfaceMesh& mesh) {
  const double tol = boundary_tol(omega);
  const Vec3& c = omega.ball_center;
  const double r = omega.ball_radius;
  const int M = 8192;
  long cnt = 0;
  double cx = 0, cy = 0;
  for (int k = 0; k < M; ++k) {
    const double th = 2.0 * kPi * (k + 0.5) / M;
    const Vec3 p{c[0] + r * std::cos(th), c[1] + r * std::sin(th), 0};
    if (std::abs(E.signed_distance(p, 2)) <= tol) {
      ++cnt;
      cx += p[0];
      cy += p[1];
    }
  }
  if (cnt > 0) {
    mesh.tangential_warning = true;
    const double measure = 2.0 * kPi * r * double(cnt) / M;
    if (measure > tol) {
      Facet f;
      f.center = {cx / cnt, cy / cnt, 0};
      const double nx = f.center[0] - c[0], ny = f.center[1] - c[1];
      const double nn = std::hypot(nx, ny);
      f.normal = {nn > 0 ? nx / nn : 1.0, nn > 0 ? ny / nn : 0.0, 0};
      f.measure = measure;
      f.boundary = true;
      mesh.facets.push_back(f);
    }
  }
}

void extract_2d(const GeometricSet& E, const Domain& omega,
                InterfaceMesh& mesh) {
  const int nx = omega.cells[0], ny = omega.cells[1];
  const double hx = omega.spacing(0), hy = omega.spacing(1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw InvalidArgument("extract_interface: square cells required in 2D");
  const double h = hx;
  const double x0 = omega.lo[0], y0 = omega.lo[1];
  auto f = [&](double x, double y) { return E.signed_distance({x, y, 0}, 2); };

  std::vector<double> node(static_cast<size_t>(nx + 1) *
                           static_cast<size_t>(ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      node[static_cast<size_t>(j) * (nx + 1) + i] = f(x0 + i * h, y0 + j * h);

  const double tolb = boundary_tol(omega);
  std::vector<Seg> segs;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double fc[4] = {
          node[static_cast<size_t>(j) * (nx + 1) + i],
          node[static_cast<size_t>(j) * (nx + 1) + i + 1],
          node[static_cast<size_t>(j + 1) * (nx + 1) + i + 1],
          node[static_cast<size_t>(j + 1) * (nx + 1) + i]};
      const int code = (inside(fc[0]) ? 1 : 0) | (inside(fc[1]) ? 2 : 0) |
                       (inside(fc[2]) ? 4 : 0) | (inside(fc[3]) ? 8 : 0);
      double fcen = 0.0;
      if (code == 5 || code == 10)
        fcen = f(x0 + (i + 0.5) * h, y0 + (j + 0.5) * h);
      cell_segments(fc, x0 + i * h, y0 + j * h, h, fcen, segs);
    }

  for (Seg s : segs) {
    if (omega.is_ball && !clip_to_ball(s, omega.ball_center, omega.ball_radius))
      continue;
    const double dx = s.bx - s.ax, dy = s.by - s.ay;
    const double len = std::hypot(dx, dy);
    if (len < 1e-12 * h) continue;
    Facet fac;
    fac.center = {0.5 * (s.ax + s.bx), 0.5 * (s.ay + s.by), 0};
    fac.measure = len;
    if (!omega.is_ball && dist_to_box_boundary(fac.center, omega) <= tolb)
      continue;  // runs along the container face: handled as boundary trace
    // Unit normal oriented out of the set (signed distance decreasing).
    double nxv = dy / len, nyv = -dx / len;
    const double d = 0.25 * h;
    const double fp = f(fac.center[0] + d * nxv, fac.center[1] + d * nyv);
    const double fm = f(fac.center[0] - d * nxv, fac.center[1] - d * nyv);
    if (fp > fm) {
      nxv = -nxv;
      nyv = -nyv;
    }
    fac.normal = {nxv, nyv, 0};
    fac.boundary = false;
    mesh.facets.push_back(fac);
  }

  if (omega.is_ball)
    boundary_part_ball_2d(E, omega, mesh);
  else
    boundary_part_box_2d(E, omega, mesh);
}

}  // namespace

double InterfaceMesh::total_measure(bool boundary_part) const {
  double t = 0.0;
  for (const Facet& f : facets)
    if (f.boundary == boundary_part) t += f.measure;
  return t;
}

InterfaceMesh extract_interface(const GeometricSet& E, const Domain& omega) {
  omega.validate();
  InterfaceMesh mesh;
  mesh.dim = omega.dim;
  if (omega.dim == 1)
    extract_1d(E, omega, mesh);
  else if (omega.dim == 2)
    extract_2d(E, omega, mesh);
  else
    throw InvalidArgument("extract_interface: 3D meshing is not supported");
  return mesh;
}

double classical_perimeter(const GeometricSet& E, const Domain& omega,
                           PerimeterWhere where, bool* tangential_warning) {
  const InterfaceMesh mesh = extract_interface(E, omega);
  if (tangential_warning) *tangential_warning = mesh.tangential_warning;
  return mesh.total_measure(where == PerimeterWhere::Boundary);
}

Vec3 VoxelRegion::cell_center(long flat) const {
  const long nx = dom.cells[0];
  const long ny = dom.dim >= 2 ? dom.cells[1] : 1;
  const long i = flat % nx;
  const long j = (flat / nx) % ny;
  const long k = flat / (nx * ny);
  Vec3 p{0, 0, 0};
  p[0] = dom.center(0, static_cast<int>(i));
  if (dom.dim >= 2) p[1] = dom.center(1, static_cast<int>(j));
  if (dom.dim >= 3) p[2] = dom.center(2, static_cast<int>(k));
  return p;
}

VoxelRegion level_set_region(const ScalarField& u, double theta) {
  u.dom.validate();
  if (!(theta > 0.0 && theta < 1.0))
    throw InvalidArgument("level_set_region: theta must lie in (0,1)");
  if (u.v.size() != static_cast<size_t>(u.dom.num_cells()))
    throw InvalidArgument("level_set_region: field size mismatch");
  VoxelRegion r;
  r.dom = u.dom;
  for (long t = 0; t < u.dom.num_cells(); ++t) {
    if (std::abs(u.v[static_cast<size_t>(t)]) < theta) {
      if (u.dom.is_ball) {
        VoxelRegion probe;
        probe.dom = u.dom;
        if (!u.dom.contains_point(probe.cell_center(t))) continue;
      }
      r.cells.push_back(t);
    }
  }
  return r;
}

double hausdorff_distance(const VoxelRegion& A, const InterfaceMesh& B) {
  if (A.empty()) return 0.0;
  if (B.empty()) return std::numeric_limits<double>::infinity();
  double sup = 0.0;
  for (long flat : A.cells) {
    const Vec3 p = A.cell_center(flat);
    double dmin = std::numeric_limits<double>::infinity();
    for (const Facet& f : B.facets) {
      double d;
      if (B.dim == 1) {
        d = std::abs(p[0] - f.center[0]);
      } else {
        // Segment endpoints reconstructed from center, normal, measure.
        const double tx = -f.normal[1], ty = f.normal[0];
        const double hx = 0.5 * f.measure;
        const double ax = f.center[0] - hx * tx, ay = f.center[1] - hx * ty;
        const double bx = f.center[0] + hx * tx, by = f.center[1] + hx * ty;
        const double dx = bx - ax, dy = by - ay;
        const double L2 = dx * dx + dy * dy;
        double t = L2 > 0 ? ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        d = std::hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy));
      }
      dmin = std::min(dmin, d);
    }
    sup = std::max(sup, dmin);
  }
  return sup;
}

double density_fraction(const ScalarField& u, double theta2, const Vec3& center,
                        double R) {
  u.dom.validate();
  if (!(R > 0)) throw InvalidArgument("density_fraction: R must be positive");
  if (u.v.size() != static_cast<size_t>(u.dom.num_cells()))
    throw InvalidArgument("density_fraction: field size mismatch");
  const Domain& d = u.dom;
  const double tol = 1e-12 * (1.0 + d.diameter());
  if (d.is_ball) {
    double off = 0.0;
    for (int a = 0; a < d.dim; ++a) {
      const double e = center[a] - d.ball_center[a];
      off += e * e;
    }
    if (std::sqrt(off) + R > d.ball_radius + tol)
      throw InvalidArgument("density_fraction: ball exits the sampled region");
  } else {
    for (int a = 0; a < d.dim; ++a)
      if (center[a] - R < d.lo[a] - tol || center[a] + R > d.hi[a] + tol)
        throw InvalidArgument("density_fraction: ball exits the sampled region");
  }
  long nin = 0, nabove = 0;
  VoxelRegion probe;
  probe.dom = d;
  for (long t = 0; t < d.num_cells(); ++t) {
    const Vec3 p = probe.cell_center(t);
    double r2 = 0.0;
    for (int a = 0; a < d.dim; ++a) {
      const double e = p[a] - center[a];
      r2 += e * e;
    }
    if (r2 <= R * R) {
      ++nin;
      if (u.v[static_cast<size_t>(t)] > theta2) ++nabove;
    }
  }
  if (nin == 0)
    throw InvalidArgument("density_fraction: ball contains no cell centers");
  return double(nabove) / double(nin);
}

void write_mesh_csv(const InterfaceMesh& mesh, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"x", "y", "z", "measure", "tag"});
  for (const Facet& f : mesh.facets)
    rows.push_back({fmt_full(f.center[0]), fmt_full(f.center[1]),
                    fmt_full(f.center[2]), fmt_full(f.measure),
                    f.boundary ? "boundary" : "interior"});
  write_csv(path, rows);
}

}  // namespace nlphase
