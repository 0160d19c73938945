#include "nlphase/model.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_interp.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlphase {

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

Domain Domain::interval(double a, double b, int n, double margin) {
  Domain d;
  d.dim = 1;
  d.lo = {a, 0, 0};
  d.hi = {b, 0, 0};
  d.cells = {n, 1, 1};
  d.margin = margin;
  d.validate();
  return d;
}

Domain Domain::box2(double ax, double bx, int nx, double ay, double by, int ny,
                    double margin) {
  Domain d;
  d.dim = 2;
  d.lo = {ax, ay, 0};
  d.hi = {bx, by, 0};
  d.cells = {nx, ny, 1};
  d.margin = margin;
  d.validate();
  return d;
}

Domain Domain::ball(const Vec3& center, double radius, int dim,
                    int cells_per_axis, double margin) {
  if (!(radius > 0)) throw InvalidArgument("Domain: ball radius must be positive");
  Domain d;
  d.dim = dim;
  d.is_ball = true;
  d.ball_center = center;
  d.ball_radius = radius;
  d.lo = d.hi = {0, 0, 0};
  d.cells = {1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    d.lo[a] = center[a] - radius;
    d.hi[a] = center[a] + radius;
    d.cells[a] = cells_per_axis;
  }
  d.margin = margin;
  d.validate();
  return d;
}

void Domain::validate() const {
  if (dim < 1 || dim > 3) throw InvalidArgument("Domain: dimension must be 1, 2, or 3");
  if (margin < 0) throw InvalidArgument("Domain: exterior margin must be >= 0");
  for (int a = 0; a < dim; ++a) {
    if (!(hi[a] > lo[a])) throw InvalidArgument("Domain: extents must be positive");
    if (cells[a] < 1) throw InvalidArgument("Domain: resolutions must be positive");
  }
  if (is_ball && !(ball_radius > 0))
    throw InvalidArgument("Domain: ball radius must be positive");
  if (!(cell_volume() > 0)) throw InvalidArgument("Domain: cell volume must be positive");
}

bool Domain::contains_point(const Vec3& x) const {
  if (is_ball) {
    double d2 = 0;
    for (int a = 0; a < dim; ++a)
      d2 += (x[a] - ball_center[a]) * (x[a] - ball_center[a]);
    return d2 < ball_radius * ball_radius;
  }
  for (int a = 0; a < dim; ++a)
    if (x[a] < lo[a] || x[a] >= hi[a]) return false;
  return true;
}

void Domain::require_box(const char* op) const {
  if (is_ball)
    throw InvalidArgument(std::string(op) +
                          ": ball-shaped domains are not supported here; "
                          "use a box domain");
}

double Domain::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

long Domain::num_cells() const {
  long n = 1;
  for (int a = 0; a < dim; ++a) n *= cells[a];
  return n;
}

double Domain::diameter() const {
  double d2 = 0.0;
  for (int a = 0; a < dim; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(d2);
}

// ---------------------------------------------------------------------------
// GeometricSet
// ---------------------------------------------------------------------------

GeometricSet GeometricSet::empty() { return GeometricSet{}; }

GeometricSet GeometricSet::full() {
  GeometricSet s;
  s.kind_ = Kind::Full;
  return s;
}

GeometricSet GeometricSet::half_space(const Vec3& normal, double offset) {
  double len = std::sqrt(normal[0] * normal[0] + normal[1] * normal[1] +
                         normal[2] * normal[2]);
  if (!(len > 0)) throw InvalidArgument("half_space: zero normal");
  GeometricSet s;
  s.kind_ = Kind::HalfSpace;
  s.a_ = {normal[0] / len, normal[1] / len, normal[2] / len};
  s.r_ = offset / len;
  return s;
}

GeometricSet GeometricSet::half_line(double c, int side) {
  // side -1: {x < c};  side +1: {x > c}
  return half_space({side < 0 ? 1.0 : -1.0, 0, 0}, side < 0 ? c : -c);
}

GeometricSet GeometricSet::box(const Vec3& lo, const Vec3& hi, int dim) {
  for (int a = 0; a < dim; ++a)
    if (!(hi[a] > lo[a])) throw InvalidArgument("box set: empty extents");
  GeometricSet s;
  s.kind_ = Kind::Box;
  s.a_ = lo;
  s.b_ = hi;
  s.r_ = dim;
  return s;
}

GeometricSet GeometricSet::ball(const Vec3& center, double radius) {
  if (!(radius > 0)) throw InvalidArgument("ball set: radius must be positive");
  GeometricSet s;
  s.kind_ = Kind::Ball;
  s.a_ = center;
  s.r_ = radius;
  return s;
}

GeometricSet GeometricSet::unite(GeometricSet a, GeometricSet b) {
  GeometricSet s;
  s.kind_ = Kind::Union;
  s.c0_ = std::make_shared<GeometricSet>(std::move(a));
  s.c1_ = std::make_shared<GeometricSet>(std::move(b));
  return s;
}

GeometricSet GeometricSet::intersect(GeometricSet a, GeometricSet b) {
  GeometricSet s;
  s.kind_ = Kind::Intersect;
  s.c0_ = std::make_shared<GeometricSet>(std::move(a));
  s.c1_ = std::make_shared<GeometricSet>(std::move(b));
  return s;
}

GeometricSet GeometricSet::complement(GeometricSet a) {
  GeometricSet s;
  s.kind_ = Kind::Complement;
  s.c0_ = std::make_shared<GeometricSet>(std::move(a));
  return s;
}

const GeometricSet& GeometricSet::child(int i) const {
  const auto& p = (i == 0) ? c0_ : c1_;
  if (!p) throw InvalidArgument("GeometricSet: no such child");
  return *p;
}

bool GeometricSet::contains(const Vec3& x, int dim) const {
  switch (kind_) {
    case Kind::Empty: return false;
    case Kind::Full: return true;
    case Kind::HalfSpace: {
      double dot = 0;
      for (int a = 0; a < dim; ++a) dot += x[a] * a_[a];
      return dot < r_;
    }
    case Kind::Box:
      for (int a = 0; a < dim; ++a)
        if (x[a] < a_[a] || x[a] >= b_[a]) return false;
      return true;
    case Kind::Ball: {
      double d2 = 0;
      for (int a = 0; a < dim; ++a) d2 += (x[a] - a_[a]) * (x[a] - a_[a]);
      return d2 < r_ * r_;
    }
    case Kind::Union: return c0_->contains(x, dim) || c1_->contains(x, dim);
    case Kind::Intersect: return c0_->contains(x, dim) && c1_->contains(x, dim);
    case Kind::Complement: return !c0_->contains(x, dim);
  }
  return false;
}

double GeometricSet::signed_distance(const Vec3& x, int dim) const {
  switch (kind_) {
    case Kind::Empty: return -std::numeric_limits<double>::infinity();
    case Kind::Full: return std::numeric_limits<double>::infinity();
    case Kind::HalfSpace: {
      double dot = 0;
      for (int a = 0; a < dim; ++a) dot += x[a] * a_[a];
      return r_ - dot;
    }
    case Kind::Box: {
      double inside = std::numeric_limits<double>::infinity();
      double out2 = 0;
      bool outside = false;
      for (int a = 0; a < dim; ++a) {
        const double q = std::max(a_[a] - x[a], x[a] - b_[a]);
        if (q > 0) {
          outside = true;
          out2 += q * q;
        } else {
          inside = std::min(inside, -q);
        }
      }
      return outside ? -std::sqrt(out2) : inside;
    }
    case Kind::Ball: {
      double d2 = 0;
      for (int a = 0; a < dim; ++a) d2 += (x[a] - a_[a]) * (x[a] - a_[a]);
      return r_ - std::sqrt(d2);
    }
    case Kind::Union:
      return std::max(c0_->signed_distance(x, dim), c1_->signed_distance(x, dim));
    case Kind::Intersect:
      return std::min(c0_->signed_distance(x, dim), c1_->signed_distance(x, dim));
    case Kind::Complement: return -c0_->signed_distance(x, dim);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

ScalarField ScalarField::constant(const Domain& d, double value, ValueRange r) {
  d.validate();
  ScalarField f;
  f.dom = d;
  f.range = r;
  f.v.assign(static_cast<size_t>(d.num_cells()), value);
  f.validate_range();
  return f;
}

double ScalarField::exterior_value(const Vec3& x) const {
  if (exterior_const) return *exterior_const;
  if (exterior_set)
    return exterior_set->contains(x, dom.dim) ? 1.0 : -1.0;
  throw InvalidArgument("ScalarField: no exterior datum prescribed");
}

void ScalarField::validate_range() const {
  const double a = (range == ValueRange::PlusMinusOne) ? -1.0 : 0.0;
  const double b = 1.0;
  for (double x : v)
    if (!(x >= a - 1e-12 && x <= b + 1e-12))
      throw InvalidArgument("ScalarField: value outside declared range");
}

double& ScalarField::at(int i, int j, int k) {
  return v[static_cast<size_t>((k * dom.cells[1] + j) * dom.cells[0] + i)];
}
double ScalarField::at(int i, int j, int k) const {
  return v[static_cast<size_t>((k * dom.cells[1] + j) * dom.cells[0] + i)];
}

void write_field(const ScalarField& f, const std::string& path) {
  f.dom.require_box("write_field");  // the header carries box extents only
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open field file for writing: " + path);
  out << "dim " << f.dom.dim << "\n";
  out << "extents";
  for (int a = 0; a < f.dom.dim; ++a)
    out << ' ' << fmt_full(f.dom.lo[a]) << ' ' << fmt_full(f.dom.hi[a]);
  out << "\n";
  out << "cells";
  for (int a = 0; a < f.dom.dim; ++a) out << ' ' << f.dom.cells[a];
  out << "\n";
  out << "range " << (f.range == ValueRange::PlusMinusOne ? "pm1" : "zo") << "\n";
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!out) throw InvalidArgument("field write failed: " + path);
}

ScalarField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open field file: " + path);
  std::string line, word;
  ScalarField f;
  // dim
  if (!std::getline(in, line)) throw InvalidArgument("field file: missing header");
  {
    std::istringstream ss(line);
    ss >> word >> f.dom.dim;
    if (word != "dim" || f.dom.dim < 1 || f.dom.dim > 3)
      throw InvalidArgument("field file: bad dim line");
  }
  // extents
  if (!std::getline(in, line)) throw InvalidArgument("field file: missing extents");
  {
    std::istringstream ss(line);
    ss >> word;
    if (word != "extents") throw InvalidArgument("field file: bad extents line");
    for (int a = 0; a < f.dom.dim; ++a) ss >> f.dom.lo[a] >> f.dom.hi[a];
    if (!ss) throw InvalidArgument("field file: bad extents line");
  }
  // cells
  if (!std::getline(in, line)) throw InvalidArgument("field file: missing cells");
  {
    std::istringstream ss(line);
    ss >> word;
    if (word != "cells") throw InvalidArgument("field file: bad cells line");
    f.dom.cells = {1, 1, 1};
    for (int a = 0; a < f.dom.dim; ++a) ss >> f.dom.cells[a];
    if (!ss) throw InvalidArgument("field file: bad cells line");
  }
  // range
  if (!std::getline(in, line)) throw InvalidArgument("field file: missing range");
  {
    std::istringstream ss(line);
    std::string r;
    ss >> word >> r;
    if (word != "range" || (r != "pm1" && r != "zo"))
      throw InvalidArgument("field file: bad range line");
    f.range = (r == "pm1") ? ValueRange::PlusMinusOne : ValueRange::ZeroOne;
  }
  f.dom.validate();
  f.v.resize(static_cast<size_t>(f.dom.num_cells()));
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(f.v.size() * sizeof(double)))
    throw InvalidArgument("field file: truncated payload");
  return f;
}

// ---------------------------------------------------------------------------
// DoubleWell
// ---------------------------------------------------------------------------

DoubleWell DoubleWell::quartic() {
  DoubleWell w;
  w.z1_ = -1.0;
  w.z2_ = 1.0;
  w.tag_ = 0;
  return w;
}

DoubleWell DoubleWell::zero_one() {
  DoubleWell w;
  w.z1_ = 0.0;
  w.z2_ = 1.0;
  w.tag_ = 1;
  return w;
}

DoubleWell DoubleWell::custom(double zero1, double zero2, double (*w)(double),
                              double (*dw)(double)) {
  if (!(zero1 < zero2)) throw InvalidArgument("DoubleWell: zeros must be ordered");
  if (!w || !dw) throw InvalidArgument("DoubleWell: missing evaluators");
  DoubleWell d;
  d.z1_ = zero1;
  d.z2_ = zero2;
  d.tag_ = 2;
  d.wc_ = w;
  d.dwc_ = dw;
  return d;
}

double DoubleWell::value(double t) const {
  switch (tag_) {
    case 0: {
      const double q = 1.0 - t * t;
      return 0.25 * q * q;
    }
    case 1: {
      const double q = t * (1.0 - t);
      return q * q;
    }
    default: return wc_(t);
  }
}

double DoubleWell::derivative(double t) const {
  switch (tag_) {
    case 0: return -t * (1.0 - t * t);
    case 1: return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    default: return dwc_(t);
  }
}

double DoubleWell::primitive(double t) const {
  if (tag_ == 0) {
    // H' = 2 sqrt(W) = |1 - t^2|, H(-1) = 0, piecewise antiderivative.
    if (t < -1.0) return t * t * t / 3.0 - t - 2.0 / 3.0;
    if (t <= 1.0) return t - t * t * t / 3.0 + 2.0 / 3.0;
    return t * t * t / 3.0 - t + 2.0;
  }
  if (tag_ == 1) {
    // H' = 2 |t (1 - t)|, H(0) = 0.
    if (t < 0.0) return 2.0 * t * t * t / 3.0 - t * t;
    if (t <= 1.0) return t * t - 2.0 * t * t * t / 3.0;
    return 2.0 * t * t * t / 3.0 - t * t + 2.0 / 3.0;
  }
  // Custom well: adaptive quadrature of 2 sqrt(W) from zero1 to t.
  struct P {
    double (*w)(double);
  } p{wc_};
  auto integrand = [](double x, void* params) -> double {
    auto* pp = static_cast<P*>(params);
    return 2.0 * std::sqrt(std::max(0.0, pp->w(x)));
  };
  gsl_function F;
  F.function = integrand;
  F.params = &p;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
  double result = 0, abserr = 0;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_integration_qags(&F, z1_, t, 1e-12, 1e-10, 4096, ws, &result, &abserr);
  gsl_set_error_handler(old);
  gsl_integration_workspace_free(ws);
  return result;
}

double DoubleWell::curvature_at(double zero) const {
  const double h = 1e-5;
  return (value(zero + h) - 2.0 * value(zero) + value(zero - h)) / (h * h);
}

double potential_eval(const DoubleWell& w, double t, PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Value: return w.value(t);
    case PotentialKind::Derivative: return w.derivative(t);
    case PotentialKind::Primitive: return w.primitive(t);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// OptimalProfile
// ---------------------------------------------------------------------------

struct OptimalProfile::Impl {
  std::vector<double> t, u;
  gsl_spline* spline = nullptr;
  gsl_interp_accel* acc = nullptr;
  double z1 = -1, z2 = 1;
  double energy = 0;
  ~Impl() {
    if (spline) gsl_spline_free(spline);
    if (acc) gsl_interp_accel_free(acc);
  }
};

OptimalProfile::OptimalProfile(const DoubleWell& w) : impl_(new Impl) {
  const double c1 = w.curvature_at(w.zero1());
  const double c2 = w.curvature_at(w.zero2());
  if (!(c1 > 1e-8) || !(c2 > 1e-8))
    throw InvalidArgument("optimal_profile: degenerate well (W'' = 0 at a zero)");
  impl_->z1 = w.zero1();
  impl_->z2 = w.zero2();
  const double mid = 0.5 * (w.zero1() + w.zero2());
  const double dt = 5e-4;          // RK4 step
  const double Tmax = 60.0;
  const double snap = 1e-13 * (w.zero2() - w.zero1());

  auto f = [&](double u) { return std::sqrt(std::max(0.0, w.value(u))); };
  auto rk4 = [&](double u, double sign) {
    const double h = sign * dt;
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };

  // Integrate forward to zero2 and backward to zero1; store every 10th node.
  std::vector<double> tf{0.0}, uf{mid};
  double u = mid;
  int step = 0;
  while (step * dt < Tmax && impl_->z2 - u > snap) {
    u = std::min(impl_->z2, rk4(u, +1.0));
    ++step;
    if (step % 10 == 0) {
      tf.push_back(step * dt);
      uf.push_back(u);
    }
  }
  tf.push_back(step * dt + dt);
  uf.push_back(impl_->z2);  // asymptote node to stabilize the spline end
  T_ = step * dt + dt;

  std::vector<double> tb, ub;
  u = mid;
  step = 0;
  while (step * dt < Tmax && u - impl_->z1 > snap) {
    u = std::max(impl_->z1, rk4(u, -1.0));
    ++step;
    if (step % 10 == 0) {
      tb.push_back(-step * dt);
      ub.push_back(u);
    }
  }
  tb.push_back(-step * dt - dt);
  ub.push_back(impl_->z1);
  T_ = std::max(T_, step * dt + dt);

  // Merge into one ascending table.
  std::reverse(tb.begin(), tb.end());
  std::reverse(ub.begin(), ub.end());
  impl_->t = std::move(tb);
  impl_->u = std::move(ub);
  impl_->t.insert(impl_->t.end(), tf.begin(), tf.end());
  impl_->u.insert(impl_->u.end(), uf.begin(), uf.end());

  impl_->acc = gsl_interp_accel_alloc();
  impl_->spline = gsl_spline_alloc(gsl_interp_cspline, impl_->t.size());
  gsl_spline_init(impl_->spline, impl_->t.data(), impl_->u.data(),
                  impl_->t.size());

  // Profile energy  int (u')^2 + W(u) dt  with u' = sqrt(W(u)): composite
  // Simpson over the stored table (u' known analytically, no differencing).
  double e = 0;
  for (size_t i = 0; i + 1 < impl_->t.size(); ++i) {
    const double a = impl_->t[i], b = impl_->t[i + 1];
    const double m = 0.5 * (a + b);
    auto g = [&](double tt) {
      const double uu = gsl_spline_eval(impl_->spline, tt, impl_->acc);
      return 2.0 * w.value(uu);
    };
    e += (b - a) / 6.0 * (g(a) + 4.0 * g(m) + g(b));
  }
  impl_->energy = e;
}

OptimalProfile::~OptimalProfile() = default;
OptimalProfile::OptimalProfile(OptimalProfile&&) noexcept = default;
OptimalProfile& OptimalProfile::operator=(OptimalProfile&&) noexcept = default;

double OptimalProfile::operator()(double t) const {
  if (t <= impl_->t.front()) return impl_->z1;
  if (t >= impl_->t.back()) return impl_->z2;
  return gsl_spline_eval(impl_->spline, t, impl_->acc);
}

double OptimalProfile::energy() const { return impl_->energy; }

double OptimalProfile::inverse(double value) const {
  if (!(value > impl_->z1 && value < impl_->z2))
    throw InvalidArgument("profile inverse: value outside the open well range");
  double a = impl_->t.front(), b = impl_->t.back();
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if ((*this)(m) < value)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// voxelize
// ---------------------------------------------------------------------------

ScalarField voxelize(const GeometricSet& set, const Domain& domain) {
  domain.validate();
  ScalarField f;
  f.dom = domain;
  f.range = ValueRange::PlusMinusOne;
  f.v.resize(static_cast<size_t>(domain.num_cells()));
  const int nx = domain.cells[0];
  const int ny = domain.dim >= 2 ? domain.cells[1] : 1;
  const int nz = domain.dim >= 3 ? domain.cells[2] : 1;
  size_t idx = 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        Vec3 x{domain.center(0, i), domain.dim >= 2 ? domain.center(1, j) : 0.0,
               domain.dim >= 3 ? domain.center(2, k) : 0.0};
        f.v[idx++] = set.contains(x, domain.dim) ? 1.0 : -1.0;
      }
  f.exterior_set = set;
  return f;
}

}  // namespace nlphase
