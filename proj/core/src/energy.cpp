#include "nlphase/energy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "nlphase/geometry.hpp"

namespace nlphase {

namespace {

constexpr double kHalfTol = 1e-14;  // half-order classification tolerance

void require_range(bool ok, const char* msg) {
  if (!ok) throw InvalidArgument(msg);
}

void require_eps_unit(double eps, const char* op) {
  if (!(eps > 0.0 && eps < 1.0))
    throw InvalidArgument(std::string(op) + ": eps must lie in (0, 1)");
}

void require_s_field(double s, const char* op) {
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgument(std::string(op) + ": s must lie in (0, 1)");
}

void require_s_set(double s, const char* op) {
  if (!(s > 0.0 && s < 0.5 - kHalfTol))
    throw InvalidArgument(std::string(op) + ": s must lie in (0, 1/2)");
}

void require_sigma(double sigma, const char* op) {
  if (!(sigma >= -1.0 && sigma <= 1.0))
    throw InvalidArgument(std::string(op) + ": sigma must lie in [-1, 1]");
}

void require_grid_field(const ScalarField& u, const char* op,
                        int min_cells = 1) {
  u.dom.validate();
  u.dom.require_box(op);
  if (u.dom.dim > 2)
    throw InvalidArgument(std::string(op) + ": 1D and 2D fields only");
  for (int a = 0; a < u.dom.dim; ++a)
    if (u.dom.cells[static_cast<size_t>(a)] < min_cells)
      throw InvalidArgument(std::string(op) +
                            ": needs at least two cells per axis");
  if (static_cast<long>(u.v.size()) != u.dom.num_cells())
    throw InvalidArgument(std::string(op) + ": field size mismatch");
}

// --- local (gradient) kinetic term -----------------------------------------
// Centered differences at interior cells, one-sided at the first and last
// cell of every grid line.

double grad_sq_line(const double* u, long stride, int n, double h) {
  double acc = 0.0;
  const double d0 = (u[stride] - u[0]) / h;
  acc += d0 * d0;
  for (int i = 1; i + 1 < n; ++i) {
    const double d = (u[(i + 1) * stride] - u[(i - 1) * stride]) / (2.0 * h);
    acc += d * d;
  }
  const double dn = (u[(n - 1) * stride] - u[(n - 2) * stride]) / h;
  acc += dn * dn;
  return acc;
}

void add_grad_sq_line(const double* u, long stride, int n, double h, double cv,
                      double* g) {
  const double d0 = (u[stride] - u[0]) / h;
  g[0] -= 2.0 * cv * d0 / h;
  g[stride] += 2.0 * cv * d0 / h;
  for (int i = 1; i + 1 < n; ++i) {
    const double d = (u[(i + 1) * stride] - u[(i - 1) * stride]) / (2.0 * h);
    g[(i + 1) * stride] += cv * d / h;
    g[(i - 1) * stride] -= cv * d / h;
  }
  const double dn = (u[(n - 1) * stride] - u[(n - 2) * stride]) / h;
  g[(n - 1) * stride] += 2.0 * cv * dn / h;
  g[(n - 2) * stride] -= 2.0 * cv * dn / h;
}

// Sum of |grad u|^2 times cell volume over the grid.
double grad_norm_sq_sum(const ScalarField& u) {
  const Domain& d = u.dom;
  if (d.dim == 1)
    return grad_sq_line(u.v.data(), 1, d.cells[0], d.spacing(0)) *
           d.cell_volume();
  const int nx = d.cells[0], ny = d.cells[1];
  const double hx = d.spacing(0), hy = d.spacing(1);
  double acc = 0.0;
  for (int j = 0; j < ny; ++j)
    acc += grad_sq_line(u.v.data() + static_cast<long>(j) * nx, 1, nx, hx);
  for (int i = 0; i < nx; ++i)
    acc += grad_sq_line(u.v.data() + i, nx, ny, hy);
  return acc * d.cell_volume();
}

void add_grad_norm_sq_grad(const ScalarField& u, double coeff, double* g) {
  const Domain& d = u.dom;
  const double cv = coeff * d.cell_volume();
  if (d.dim == 1) {
    add_grad_sq_line(u.v.data(), 1, d.cells[0], d.spacing(0), cv, g);
    return;
  }
  const int nx = d.cells[0], ny = d.cells[1];
  const double hx = d.spacing(0), hy = d.spacing(1);
  for (int j = 0; j < ny; ++j)
    add_grad_sq_line(u.v.data() + static_cast<long>(j) * nx, 1, nx, hx, cv,
                     g + static_cast<long>(j) * nx);
  for (int i = 0; i < nx; ++i)
    add_grad_sq_line(u.v.data() + i, nx, ny, hy, cv, g + i);
}

// --- potential term --------------------------------------------------------

double potential_sum(const ScalarField& u, const DoubleWell& well) {
  double acc = 0.0;
  for (double t : u.v) acc += well.value(t);
  return acc * u.dom.cell_volume();
}

void add_potential_grad(const ScalarField& u, const DoubleWell& well,
                        double coeff, double* g) {
  const double cv = coeff * u.dom.cell_volume();
  for (size_t i = 0; i < u.v.size(); ++i) g[i] += cv * well.derivative(u.v[i]);
}

// --- boundary well on the trace --------------------------------------------
// 1D: the two end cells, facet measure 1 each. 2D: one term per boundary
// face of every boundary cell (corner cells contribute on both their faces).

double boundary_well_sum(const ScalarField& u, const DoubleWell& V) {
  const Domain& d = u.dom;
  if (d.dim == 1) {
    const int n = d.cells[0];
    return V.value(u.v[0]) + V.value(u.v[static_cast<size_t>(n - 1)]);
  }
  const int nx = d.cells[0], ny = d.cells[1];
  const double hx = d.spacing(0), hy = d.spacing(1);
  double acc = 0.0;
  for (int i = 0; i < nx; ++i)
    acc += hx * (V.value(u.at(i, 0)) + V.value(u.at(i, ny - 1)));
  for (int j = 0; j < ny; ++j)
    acc += hy * (V.value(u.at(0, j)) + V.value(u.at(nx - 1, j)));
  return acc;
}

void add_boundary_well_grad(const ScalarField& u, const DoubleWell& V,
                            double coeff, double* g) {
  const Domain& d = u.dom;
  if (d.dim == 1) {
    const int n = d.cells[0];
    g[0] += coeff * V.derivative(u.v[0]);
    g[n - 1] += coeff * V.derivative(u.v[static_cast<size_t>(n - 1)]);
    return;
  }
  const int nx = d.cells[0], ny = d.cells[1];
  const double hx = d.spacing(0), hy = d.spacing(1);
  for (int i = 0; i < nx; ++i) {
    g[i] += coeff * hx * V.derivative(u.at(i, 0));
    g[static_cast<long>(ny - 1) * nx + i] +=
        coeff * hx * V.derivative(u.at(i, ny - 1));
  }
  for (int j = 0; j < ny; ++j) {
    g[static_cast<long>(j) * nx] += coeff * hy * V.derivative(u.at(0, j));
    g[static_cast<long>(j) * nx + nx - 1] +=
        coeff * hy * V.derivative(u.at(nx - 1, j));
  }
}

// --- prepared kernel state -------------------------------------------------

struct Prepared {
  std::unique_ptr<Kernel1D> k1;
  std::unique_ptr<Kernel2D> k2;
  std::optional<Kernel1D::ExteriorData> e1;
  std::optional<Kernel2D::ExteriorData> e2;

  void build(const ScalarField& u, double s, double margin, bool need_ext) {
    const double m = KernelSpec{s, margin}.resolved_margin(u.dom);
    if (u.dom.dim == 1) {
      k1 = std::make_unique<Kernel1D>(u.dom, s, m);
      if (need_ext) e1 = k1->materialize(u);
    } else if (u.dom.dim == 2) {
      k2 = std::make_unique<Kernel2D>(u.dom, s, m, need_ext);
      if (need_ext) e2 = k2->materialize(u);
    } else {
      throw InvalidArgument("nonlocal energies: 1D and 2D fields only");
    }
  }
  double kint(const ScalarField& u) const {
    return k1 ? k1->K_int(u.v.data()) : k2->K_int(u.v.data());
  }
  double kext(const ScalarField& u) const {
    return k1 ? k1->K_ext(u.v.data(), *e1) : k2->K_ext(u.v.data(), *e2);
  }
  void grad_int(const ScalarField& u, double c, double* g) const {
    if (k1)
      k1->add_grad_K_int(u.v.data(), c, g);
    else
      k2->add_grad_K_int(u.v.data(), c, g);
  }
  void grad_ext(const ScalarField& u, double c, double* g) const {
    if (k1)
      k1->add_grad_K_ext(u.v.data(), *e1, c, g);
    else
      k2->add_grad_K_ext(u.v.data(), *e2, c, g);
  }
};

// Index of cell (i, j) in the counter-clockwise boundary loop produced by
// boundary_trace; the cell must lie on the boundary.
long loop_index(int i, int j, int nx, int ny) {
  if (j == 0) return i;
  if (i == nx - 1) return static_cast<long>(nx) - 1 + j;
  if (j == ny - 1) return static_cast<long>(nx) + ny - 2 + (nx - 1 - i);
  return 2L * nx + ny - 3 + (ny - 1 - j);  // i == 0
}

bool near_letter(double t, const DoubleWell& well) {
  return std::abs(t - well.zero1()) <= 1e-12 ||
         std::abs(t - well.zero2()) <= 1e-12;
}

// Throws unless the set keeps clear of the exterior of the box (probed on a
// margin lattice and a far ring).
void require_inside_box(const GeometricSet& E, const Domain& omega,
                        double margin, const char* op) {
  const char* msg_tail = ": the set must lie inside the container";
  const double far = omega.diameter() + 1.0;
  if (omega.dim == 1) {
    const double a0 = omega.lo[0], b0 = omega.hi[0];
    const int npts = 64;
    const double hp = std::max(margin, 1e-3) / npts;
    for (int j = 0; j < npts; ++j) {
      if (E.contains({a0 - (j + 0.5) * hp, 0, 0}, 1) ||
          E.contains({b0 + (j + 0.5) * hp, 0, 0}, 1))
        throw InvalidArgument(std::string(op) + msg_tail);
    }
    for (double r : {far, 5.0 * far}) {
      if (E.contains({a0 - margin - r, 0, 0}, 1) ||
          E.contains({b0 + margin + r, 0, 0}, 1))
        throw InvalidArgument(std::string(op) + msg_tail);
    }
    return;
  }
  const double hx = omega.spacing(0), hy = omega.spacing(1);
  const int nx = omega.cells[0], ny = omega.cells[1];
  const int mqx = std::max(1, static_cast<int>(std::ceil(margin / hx)));
  const int mqy = std::max(1, static_cast<int>(std::ceil(margin / hy)));
  long total = static_cast<long>(nx + 2L * mqx) * (ny + 2L * mqy) -
               static_cast<long>(nx) * ny;
  int step = 1;
  while (total / (static_cast<long>(step) * step) > 1000000L) step *= 2;
  for (int j = -mqy; j < ny + mqy; j += step) {
    for (int i = -mqx; i < nx + mqx; i += step) {
      if (i >= 0 && i < nx && j >= 0 && j < ny) continue;
      const Vec3 x{omega.lo[0] + (i + 0.5) * hx, omega.lo[1] + (j + 0.5) * hy,
                   0};
      if (E.contains(x, 2))
        throw InvalidArgument(std::string(op) + msg_tail);
    }
  }
  const Vec3 c{0.5 * (omega.lo[0] + omega.hi[0]),
               0.5 * (omega.lo[1] + omega.hi[1]), 0};
  for (double r : {margin + far, margin + 5.0 * far}) {
    for (int m = 0; m < 16; ++m) {
      const double th = 2.0 * M_PI * m / 16.0;
      const Vec3 x{c[0] + r * std::cos(th), c[1] + r * std::sin(th), 0};
      if (E.contains(x, 2))
        throw InvalidArgument(std::string(op) + msg_tail);
    }
  }
}

EnergyBreakdown abs_parts(const ScalarField& v, double eps, double k, double s,
                          const DoubleWell& well, LambdaSchedule schedule) {
  require_grid_field(v, "abs_1d");
  if (v.dom.dim != 1)
    throw InvalidArgument("abs_1d: 1D fields only");
  require_eps_unit(eps, "abs_1d");
  require_s_field(s, "abs_1d");
  require_range(k > 0.0, "abs_1d: k must be positive");
  Kernel1D kb(v.dom, s, 0.0);
  const double kin = std::pow(eps, 2.0 * s) * kb.K_int(v.v.data());
  const double pot = lambda_value(schedule, eps, k) * potential_sum(v, well);
  return make_breakdown(kin, pot, 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Small shared pieces
// ---------------------------------------------------------------------------

std::string energy_tag_name(EnergyTag tag) {
  switch (tag) {
    case EnergyTag::MM: return "mm";
    case EnergyTag::F_INT: return "f_int";
    case EnergyTag::F_EXT: return "f_ext";
    case EnergyTag::F_FULL: return "f_full";
    case EnergyTag::J_RAW: return "j_raw";
    case EnergyTag::CAPILLARY_LOCAL: return "capillary_local";
    case EnergyTag::CAPILLARY_FRAC: return "capillary_frac";
    case EnergyTag::J_EPS_S: return "j_eps_s";
    case EnergyTag::BOUNDARY_MODICA: return "boundary_modica";
    case EnergyTag::ABS_1D: return "abs_1d";
    case EnergyTag::PHI_LINE: return "phi_line";
    case EnergyTag::G_SHARP: return "g_sharp";
  }
  throw InvalidArgument("energy_tag_name: unknown tag");
}

DoubleWell make_well(WellKind kind) {
  return kind == WellKind::Quartic ? DoubleWell::quartic()
                                   : DoubleWell::zero_one();
}

double lambda_value(LambdaSchedule schedule, double eps, double k) {
  require_eps_unit(eps, "lambda schedule");
  require_range(k > 0.0, "lambda schedule: k must be positive");
  switch (schedule) {
    case LambdaSchedule::ExpK:
      return std::exp(k / eps);
    case LambdaSchedule::InvEpsLog:
      return 1.0 / (eps * std::abs(std::log(eps)));
  }
  throw InvalidArgument("lambda schedule: unknown schedule");
}

EnergyBreakdown make_breakdown(double kinetic, double potential,
                               double boundary) {
  EnergyBreakdown b;
  b.kinetic = kinetic;
  b.potential = potential;
  b.boundary = boundary;
  b.total = kinetic + potential + boundary;
  return b;
}

RegimeWeights regime_weights(double s, double eps) {
  require_s_field(s, "regime weights");
  require_eps_unit(eps, "regime weights");
  RegimeWeights w;
  if (s < 0.5 - kHalfTol) {
    w.kinetic = 1.0;
    w.potential_full = std::pow(eps, -2.0 * s);
  } else if (s <= 0.5 + kHalfTol) {
    const double L = -std::log(eps);
    w.kinetic = 1.0 / L;
    w.potential_full = 1.0 / (eps * L);
  } else {
    w.kinetic = std::pow(eps, 2.0 * s - 1.0);
    w.potential_full = 1.0 / eps;
  }
  return w;
}

void EnergySpec::validate() const {
  require_sigma(sigma, "energy spec");
  require_range(k > 0.0, "energy spec: k must be positive");
  require_range(c >= 0.0, "energy spec: c must be nonnegative");
  switch (tag) {
    case EnergyTag::MM:
      require_range(eps > 0.0, "energy spec: eps must be positive");
      break;
    case EnergyTag::F_INT:
    case EnergyTag::F_EXT:
    case EnergyTag::F_FULL:
      require_eps_unit(eps, "energy spec");
      require_s_field(s, "energy spec");
      break;
    case EnergyTag::J_RAW:
      require_s_field(s, "energy spec");
      break;
    case EnergyTag::J_EPS_S:
      require_eps_unit(eps, "energy spec");
      require_s_set(s, "energy spec");
      break;
    case EnergyTag::BOUNDARY_MODICA:
    case EnergyTag::ABS_1D:
      require_eps_unit(eps, "energy spec");
      break;
    case EnergyTag::CAPILLARY_FRAC:
      require_s_set(s, "energy spec");
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------
// Field functionals
// ---------------------------------------------------------------------------

EnergyBreakdown modica_mortola(const ScalarField& u, double eps,
                               const DoubleWell& well) {
  require_grid_field(u, "modica_mortola", 2);
  require_range(eps > 0.0, "modica_mortola: eps must be positive");
  const double kin = eps * grad_norm_sq_sum(u);
  const double pot = potential_sum(u, well) / eps;
  return make_breakdown(kin, pot, 0.0);
}

EnergyBreakdown scaled_nonlocal(const ScalarField& u, double eps, double s,
                                KernelPart part, const DoubleWell& well,
                                double margin) {
  require_grid_field(u, "scaled_nonlocal");
  require_eps_unit(eps, "scaled_nonlocal");
  require_s_field(s, "scaled_nonlocal");
  const RegimeWeights rw = regime_weights(s, eps);
  Prepared pk;
  pk.build(u, s, margin, part != KernelPart::Interior);
  const double psum = potential_sum(u, well);
  switch (part) {
    case KernelPart::Interior:
      return make_breakdown(rw.kinetic * pk.kint(u),
                            0.5 * rw.potential_full * psum, 0.0);
    case KernelPart::Exterior:
      return make_breakdown(rw.kinetic * pk.kext(u),
                            0.5 * rw.potential_full * psum, 0.0);
    case KernelPart::Full:
      return make_breakdown(rw.kinetic * (pk.kint(u) + pk.kext(u)),
                            rw.potential_full * psum, 0.0);
  }
  throw InvalidArgument("scaled_nonlocal: unknown part");
}

EnergyBreakdown j_raw(const ScalarField& u, double s, const DoubleWell& well,
                      double margin) {
  require_grid_field(u, "j_raw");
  require_s_field(s, "j_raw");
  Prepared pk;
  pk.build(u, s, margin, true);
  return make_breakdown(pk.kint(u) + pk.kext(u), potential_sum(u, well), 0.0);
}

EnergyBreakdown j_eps_s(const ScalarField& u, double eps, double s,
                        double sigma, const DoubleWell& well, double margin) {
  require_grid_field(u, "j_eps_s");
  require_eps_unit(eps, "j_eps_s");
  require_s_set(s, "j_eps_s");
  require_sigma(sigma, "j_eps_s");
  Prepared pk;
  pk.build(u, s, margin, sigma != 0.0);
  const double kin = pk.kint(u) + (sigma != 0.0 ? sigma * pk.kext(u) : 0.0);
  const double pot = std::pow(eps, -2.0 * s) * potential_sum(u, well);
  return make_breakdown(kin, pot, 0.0);
}

EnergyBreakdown boundary_modica(const ScalarField& u, double eps,
                                const DoubleWell& V, double lambda,
                                const DoubleWell& well) {
  require_grid_field(u, "boundary_modica", 2);
  require_range(eps > 0.0, "boundary_modica: eps must be positive");
  require_range(lambda >= 0.0, "boundary_modica: lambda must be nonnegative");
  const double kin = eps * grad_norm_sq_sum(u);
  const double pot = potential_sum(u, well) / eps;
  const double bnd = lambda * boundary_well_sum(u, V);
  return make_breakdown(kin, pot, bnd);
}

EnergyBreakdown abs_1d(const ScalarField& v, double eps, double k, double s,
                       const DoubleWell& well) {
  return abs_parts(v, eps, k, s, well, LambdaSchedule::ExpK);
}

double abs_1d_limit(const ScalarField& v, double k) {
  require_grid_field(v, "abs_1d_limit");
  if (v.dom.dim != 1)
    throw InvalidArgument("abs_1d_limit: 1D fields only");
  require_range(k > 0.0, "abs_1d_limit: k must be positive");
  for (double t : v.v)
    if (std::abs(std::abs(t) - 1.0) > 1e-12)
      throw InvalidArgument("abs_1d_limit: field must take values -1 or +1");
  long jumps = 0;
  for (size_t i = 0; i + 1 < v.v.size(); ++i)
    if ((v.v[i] > 0.0) != (v.v[i + 1] > 0.0)) ++jumps;
  return 8.0 * k * static_cast<double>(jumps);
}

// ---------------------------------------------------------------------------
// Set functionals
// ---------------------------------------------------------------------------

double capillarity(const GeometricSet& E, const Domain& omega, double sigma,
                   CapillaryKind kind, double s, double margin) {
  omega.validate();
  require_sigma(sigma, "capillarity");
  if (kind == CapillaryKind::Local) {
    const double per_in =
        classical_perimeter(E, omega, PerimeterWhere::Interior);
    const double per_bd =
        classical_perimeter(E, omega, PerimeterWhere::Boundary);
    return per_in + sigma * per_bd;
  }
  omega.require_box("capillarity");
  if (omega.dim > 2)
    throw InvalidArgument("capillarity: 1D and 2D only");
  require_s_set(s, "capillarity");
  const double m = KernelSpec{s, margin}.resolved_margin(omega);
  require_inside_box(E, omega, m, "capillarity");
  const double per_in =
      frac_perimeter(E, omega, s, KernelPart::Interior, margin);
  double wet = 0.0;
  if (omega.dim == 1) {
    const double a0 = omega.lo[0], b0 = omega.hi[0];
    const double h = omega.spacing(0);
    const int n = omega.cells[0];
    for (int i = 0; i < n; ++i) {
      if (!E.contains({omega.center(0, i), 0, 0}, 1)) continue;
      const double a = a0 + i * h, b = a + h;
      wet += ray_mass_1d(a, b, a0, s, -1) + ray_mass_1d(a, b, b0, s, +1);
    }
  } else {
    Kernel2D kb(omega, s, m, true);
    const auto& mt = kb.mass_complement_total();
    const int nx = omega.cells[0], ny = omega.cells[1];
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Vec3 x{omega.center(0, i), omega.center(1, j), 0};
        if (E.contains(x, 2))
          wet += mt[static_cast<size_t>(j) * static_cast<size_t>(nx) +
                    static_cast<size_t>(i)];
      }
    }
  }
  return per_in + sigma * wet;
}

std::vector<double> boundary_trace(const ScalarField& u) {
  require_grid_field(u, "boundary_trace", 2);
  if (u.dom.dim != 2)
    throw InvalidArgument("boundary_trace: 2D fields only");
  const int nx = u.dom.cells[0], ny = u.dom.cells[1];
  std::vector<double> t;
  t.reserve(static_cast<size_t>(2L * nx + 2L * ny - 4));
  for (int i = 0; i < nx; ++i) t.push_back(u.at(i, 0));
  for (int j = 1; j < ny; ++j) t.push_back(u.at(nx - 1, j));
  for (int i = nx - 2; i >= 0; --i) t.push_back(u.at(i, ny - 1));
  for (int j = ny - 2; j >= 1; --j) t.push_back(u.at(0, j));
  return t;
}

double phi_line_tension(const ScalarField& u, const std::vector<double>& v,
                        double sigma, double c, const DoubleWell& well) {
  require_grid_field(u, "phi_line_tension", 2);
  if (u.dom.dim != 2)
    throw InvalidArgument("phi_line_tension: 2D fields only");
  require_sigma(sigma, "phi_line_tension");
  require_range(c >= 0.0, "phi_line_tension: c must be nonnegative");
  const int nx = u.dom.cells[0], ny = u.dom.cells[1];
  const double hx = u.dom.spacing(0), hy = u.dom.spacing(1);
  for (double t : u.v)
    if (!near_letter(t, well))
      throw InvalidArgument(
          "phi_line_tension: mismatched value alphabets (field)");
  const size_t M = static_cast<size_t>(2L * nx + 2L * ny - 4);
  if (v.size() != M)
    throw InvalidArgument(
        "phi_line_tension: trace length must match the boundary loop");
  for (double t : v)
    if (!near_letter(t, well))
      throw InvalidArgument(
          "phi_line_tension: mismatched value alphabets (trace)");
  const double mid = 0.5 * (well.zero1() + well.zero2());
  auto letter = [&](double t) { return t > mid; };

  double jump = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      if (letter(u.at(i, j)) != letter(u.at(i + 1, j))) jump += hy;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (letter(u.at(i, j)) != letter(u.at(i, j + 1))) jump += hx;

  double mismatch = 0.0;
  auto face = [&](int i, int j, double meas) {
    const double tv = v[static_cast<size_t>(loop_index(i, j, nx, ny))];
    mismatch += meas * std::abs(well.primitive(u.at(i, j)) -
                                well.primitive(tv));
  };
  for (int i = 0; i < nx; ++i) {
    face(i, 0, hx);
    face(i, ny - 1, hx);
  }
  for (int j = 0; j < ny; ++j) {
    face(0, j, hy);
    face(nx - 1, j, hy);
  }

  long vjumps = 0;
  for (size_t m = 0; m < M; ++m)
    if (letter(v[m]) != letter(v[(m + 1) % M])) ++vjumps;

  return jump + sigma * mismatch + c * static_cast<double>(vjumps);
}

double g_sharp(const GeometricSet& E, const Domain& omega, double sigma,
               double c) {
  omega.validate();
  omega.require_box("g_sharp");
  if (omega.dim != 2)
    throw InvalidArgument("g_sharp: 2D boxes only");
  require_sigma(sigma, "g_sharp");
  require_range(c >= 0.0, "g_sharp: c must be nonnegative");
  const double per_in = classical_perimeter(E, omega, PerimeterWhere::Interior);
  const double wall = classical_perimeter(E, omega, PerimeterWhere::Boundary);

  const int M = 4096;
  const double dl = 1e-9 * (1.0 + omega.diameter());
  const double ax = omega.lo[0] + dl, bx = omega.hi[0] - dl;
  const double ay = omega.lo[1] + dl, by = omega.hi[1] - dl;
  std::vector<char> chi;
  chi.reserve(static_cast<size_t>(4 * M));
  auto sample = [&](double x0, double y0, double x1, double y1) {
    for (int m = 0; m < M; ++m) {
      const double t = (m + 0.5) / M;
      const Vec3 x{x0 + t * (x1 - x0), y0 + t * (y1 - y0), 0};
      chi.push_back(E.contains(x, 2) ? 1 : 0);
    }
  };
  sample(ax, ay, bx, ay);
  sample(bx, ay, bx, by);
  sample(bx, by, ax, by);
  sample(ax, by, ax, ay);
  long trans = 0;
  for (size_t m = 0; m < chi.size(); ++m)
    if (chi[m] != chi[(m + 1) % chi.size()]) ++trans;

  return per_in + sigma * wall + c * static_cast<double>(trans);
}

// ---------------------------------------------------------------------------
// Dispatch and reporting
// ---------------------------------------------------------------------------

EnergyBreakdown evaluate_energy(const EnergySpec& spec, const ScalarField& u) {
  spec.validate();
  const DoubleWell well = make_well(spec.well);
  switch (spec.tag) {
    case EnergyTag::MM:
      return modica_mortola(u, spec.eps, well);
    case EnergyTag::F_INT:
      return scaled_nonlocal(u, spec.eps, spec.s, KernelPart::Interior, well,
                             spec.margin);
    case EnergyTag::F_EXT:
      return scaled_nonlocal(u, spec.eps, spec.s, KernelPart::Exterior, well,
                             spec.margin);
    case EnergyTag::F_FULL:
      return scaled_nonlocal(u, spec.eps, spec.s, KernelPart::Full, well,
                             spec.margin);
    case EnergyTag::J_RAW:
      return j_raw(u, spec.s, well, spec.margin);
    case EnergyTag::J_EPS_S:
      return j_eps_s(u, spec.eps, spec.s, spec.sigma, well, spec.margin);
    case EnergyTag::BOUNDARY_MODICA:
      return boundary_modica(u, spec.eps, make_well(spec.boundary_well),
                             lambda_value(spec.schedule, spec.eps, spec.k),
                             well);
    case EnergyTag::ABS_1D:
      return abs_parts(u, spec.eps, spec.k, spec.s, well, spec.schedule);
    default:
      throw InvalidArgument(
          "evaluate_energy: set-valued tags have no field evaluator");
  }
}

std::vector<std::string> breakdown_csv_header() {
  return {"tag",     "eps",     "s",        "sigma", "k",
          "kinetic", "potential", "boundary", "total"};
}

std::vector<std::string> breakdown_csv_row(const EnergySpec& spec,
                                           const EnergyBreakdown& b) {
  return {energy_tag_name(spec.tag), fmt_full(spec.eps),     fmt_full(spec.s),
          fmt_full(spec.sigma),      fmt_full(spec.k),       fmt_full(b.kinetic),
          fmt_full(b.potential),     fmt_full(b.boundary),   fmt_full(b.total)};
}

// ---------------------------------------------------------------------------
// EnergyModel
// ---------------------------------------------------------------------------

struct EnergyModel::Impl {
  EnergySpec sp;
  DoubleWell well = DoubleWell::quartic();
  DoubleWell vwell = DoubleWell::quartic();
  Prepared pk;
  RegimeWeights rw;
  double lambda = 0.0;
  bool use_ext = false;
};

EnergyModel::EnergyModel(const EnergySpec& spec, const ScalarField& prototype)
    : impl_(std::make_unique<Impl>()) {
  spec.validate();
  require_grid_field(prototype, "energy model");
  Impl& im = *impl_;
  im.sp = spec;
  im.well = make_well(spec.well);
  im.vwell = make_well(spec.boundary_well);
  bool use_kernel = false;
  double kernel_margin = spec.margin;
  double kernel_s = spec.s;
  switch (spec.tag) {
    case EnergyTag::MM:
      break;
    case EnergyTag::BOUNDARY_MODICA:
      im.lambda = lambda_value(spec.schedule, spec.eps, spec.k);
      break;
    case EnergyTag::F_INT:
      use_kernel = true;
      im.rw = regime_weights(spec.s, spec.eps);
      break;
    case EnergyTag::F_EXT:
    case EnergyTag::F_FULL:
      use_kernel = true;
      im.use_ext = true;
      im.rw = regime_weights(spec.s, spec.eps);
      break;
    case EnergyTag::J_RAW:
      use_kernel = true;
      im.use_ext = true;
      break;
    case EnergyTag::J_EPS_S:
      use_kernel = true;
      im.use_ext = spec.sigma != 0.0;
      break;
    case EnergyTag::ABS_1D:
      if (prototype.dom.dim != 1)
        throw InvalidArgument("energy model: abs_1d needs a 1D field");
      use_kernel = true;
      kernel_margin = 0.0;
      im.lambda = lambda_value(spec.schedule, spec.eps, spec.k);
      break;
    default:
      throw InvalidArgument(
          "energy model: set-valued tags have no field evaluator");
  }
  if (use_kernel) im.pk.build(prototype, kernel_s, kernel_margin, im.use_ext);
}

EnergyModel::~EnergyModel() = default;
EnergyModel::EnergyModel(EnergyModel&&) noexcept = default;
EnergyModel& EnergyModel::operator=(EnergyModel&&) noexcept = default;

const EnergySpec& EnergyModel::spec() const { return impl_->sp; }

EnergyBreakdown EnergyModel::breakdown(const ScalarField& u) const {
  const Impl& im = *impl_;
  const EnergySpec& sp = im.sp;
  switch (sp.tag) {
    case EnergyTag::MM:
      return modica_mortola(u, sp.eps, im.well);
    case EnergyTag::BOUNDARY_MODICA: {
      const double kin = sp.eps * grad_norm_sq_sum(u);
      const double pot = potential_sum(u, im.well) / sp.eps;
      const double bnd = im.lambda * boundary_well_sum(u, im.vwell);
      return make_breakdown(kin, pot, bnd);
    }
    case EnergyTag::F_INT:
      return make_breakdown(im.rw.kinetic * im.pk.kint(u),
                            0.5 * im.rw.potential_full *
                                potential_sum(u, im.well),
                            0.0);
    case EnergyTag::F_EXT:
      return make_breakdown(im.rw.kinetic * im.pk.kext(u),
                            0.5 * im.rw.potential_full *
                                potential_sum(u, im.well),
                            0.0);
    case EnergyTag::F_FULL:
      return make_breakdown(im.rw.kinetic * (im.pk.kint(u) + im.pk.kext(u)),
                            im.rw.potential_full * potential_sum(u, im.well),
                            0.0);
    case EnergyTag::J_RAW:
      return make_breakdown(im.pk.kint(u) + im.pk.kext(u),
                            potential_sum(u, im.well), 0.0);
    case EnergyTag::J_EPS_S: {
      const double kin =
          im.pk.kint(u) + (im.use_ext ? sp.sigma * im.pk.kext(u) : 0.0);
      const double pot =
          std::pow(sp.eps, -2.0 * sp.s) * potential_sum(u, im.well);
      return make_breakdown(kin, pot, 0.0);
    }
    case EnergyTag::ABS_1D: {
      const double kin =
          std::pow(sp.eps, 2.0 * sp.s) * im.pk.k1->K_int(u.v.data());
      const double pot = im.lambda * potential_sum(u, im.well);
      return make_breakdown(kin, pot, 0.0);
    }
    default:
      throw InvalidArgument("energy model: unsupported tag");
  }
}

double EnergyModel::energy(const ScalarField& u) const {
  return breakdown(u).total;
}

void EnergyModel::gradient(const ScalarField& u, std::vector<double>& g) const {
  const Impl& im = *impl_;
  const EnergySpec& sp = im.sp;
  g.assign(u.v.size(), 0.0);
  double* gp = g.data();
  switch (sp.tag) {
    case EnergyTag::MM:
      add_grad_norm_sq_grad(u, sp.eps, gp);
      add_potential_grad(u, im.well, 1.0 / sp.eps, gp);
      return;
    case EnergyTag::BOUNDARY_MODICA:
      add_grad_norm_sq_grad(u, sp.eps, gp);
      add_potential_grad(u, im.well, 1.0 / sp.eps, gp);
      add_boundary_well_grad(u, im.vwell, im.lambda, gp);
      return;
    case EnergyTag::F_INT:
      im.pk.grad_int(u, im.rw.kinetic, gp);
      add_potential_grad(u, im.well, 0.5 * im.rw.potential_full, gp);
      return;
    case EnergyTag::F_EXT:
      im.pk.grad_ext(u, im.rw.kinetic, gp);
      add_potential_grad(u, im.well, 0.5 * im.rw.potential_full, gp);
      return;
    case EnergyTag::F_FULL:
      im.pk.grad_int(u, im.rw.kinetic, gp);
      im.pk.grad_ext(u, im.rw.kinetic, gp);
      add_potential_grad(u, im.well, im.rw.potential_full, gp);
      return;
    case EnergyTag::J_RAW:
      im.pk.grad_int(u, 1.0, gp);
      im.pk.grad_ext(u, 1.0, gp);
      add_potential_grad(u, im.well, 1.0, gp);
      return;
    case EnergyTag::J_EPS_S:
      im.pk.grad_int(u, 1.0, gp);
      if (im.use_ext) im.pk.grad_ext(u, sp.sigma, gp);
      add_potential_grad(u, im.well, std::pow(sp.eps, -2.0 * sp.s), gp);
      return;
    case EnergyTag::ABS_1D:
      im.pk.k1->add_grad_K_int(u.v.data(), std::pow(sp.eps, 2.0 * sp.s), gp);
      add_potential_grad(u, im.well, im.lambda, gp);
      return;
    default:
      throw InvalidArgument("energy model: unsupported tag");
  }
}

}  // namespace nlphase
