#include "nlphase/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "nlphase/energy.hpp"
#include "nlphase/geometry.hpp"
#include "nlphase/minimize.hpp"
#include "nlphase/model.hpp"
#include "nlphase/spectral.hpp"

namespace nlphase {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rescaling under which the pair-integral perimeter parts approach a fixed
// multiple of the classical interface measure as the order approaches 1/2.
// Fixed by the closed-form half-line values: the interior part of the
// half-line in (-1,1) equals (2-2^(1-2s))/(2s(1-2s)), so (1/2-s) times it
// tends to 1/2 -- half the counting measure of the interface point, the
// half reflecting that the pair sums count ordered pairs once per cell pair
// while the cross-section integral counts each crossing twice.
double pointwise_rescale(double s) { return 0.5 - s; }

// Limit constant per unit classical interface measure under the rescaling
// above: half the measure of the (dim-1)-dimensional unit ball swept by the
// crossing directions -- 1/2 for dim 1 (point interfaces), 1 for dim 2
// (half the segment [-1,1]).
double sharp_limit_constant(int dim) { return dim == 1 ? 0.5 : 1.0; }

bool is_half(double s) { return std::abs(s - 0.5) <= 1e-14; }

std::vector<double> linspace_step(double a, double b, double step) {
  std::vector<double> v;
  for (double x = a; x <= b + 1e-12; x += step) v.push_back(x);
  return v;
}

bool strictly_monotone(const std::vector<double>& g) {
  if (g.size() < 2) return true;
  const bool up = g[1] > g[0];
  for (size_t i = 1; i < g.size(); ++i) {
    if (up && !(g[i] > g[i - 1])) return false;
    if (!up && !(g[i] < g[i - 1])) return false;
  }
  return true;
}

void sort_rows(SweepReport& r) {
  std::stable_sort(r.rows.begin(), r.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.param < b.param;
                   });
}

double rel_to(double value, double reference) {
  if (!std::isfinite(reference) || reference == 0.0) return kNaN;
  return std::abs(value - reference) / std::abs(reference);
}

// The Richardson estimator infers its rate from ratios of successive
// differences, which is only meaningful when the abscissae themselves form
// a geometric progression. Pick the triple (x0, 2*x0, 4*x0) anchored at the
// smallest abscissa when the grid contains one; otherwise fall back to the
// three smallest points.
std::pair<std::vector<double>, std::vector<double>> richardson_triple(
    const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<size_t> order(x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return x[a] < x[b]; });
  const double x0 = x[order[0]];
  std::vector<double> tx = {x0}, ty = {y[order[0]]};
  for (const double want : {2.0 * x0, 4.0 * x0}) {
    for (const size_t i : order)
      if (std::abs(x[i] - want) <= 1e-6 * std::abs(want)) {
        tx.push_back(x[i]);
        ty.push_back(y[i]);
        break;
      }
  }
  if (tx.size() == 3) return {tx, ty};
  tx.clear();
  ty.clear();
  for (size_t j = 0; j < 3; ++j) {
    tx.push_back(x[order[j]]);
    ty.push_back(y[order[j]]);
  }
  return {tx, ty};
}

// Affine extrapolation from the two finest points of (x, y), cross-checked
// by three-point Richardson when a third point exists. Disagreement beyond
// the tolerance (relative to the target when finite, to the affine value
// otherwise) flags the report.
void extrapolate_into(SweepReport& r, const std::vector<double>& x,
                      const std::vector<double>& y) {
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  if (x.size() >= 2) r.extrapolated = extrapolate_affine(x, y);
  if (x.size() >= 3) {
    const auto [tx, ty] = richardson_triple(x, y);
    r.richardson = extrapolate_richardson(tx, ty);
  }
  if (std::isfinite(r.extrapolated) && std::isfinite(r.richardson)) {
    const double scale = std::isfinite(r.target) && r.target != 0.0
                             ? std::abs(r.target)
                             : std::max(std::abs(r.extrapolated), 1e-300);
    r.extrapolation_disagrees =
        std::abs(r.extrapolated - r.richardson) > r.tolerance * scale;
  }
}

void fill_summary(SweepReport& r) {
  std::ostringstream os;
  os << experiment_name(r.name) << " " << verdict_name(r.verdict)
     << " rows=" << r.rows.size();
  os << " extrapolated=" << fmt_full(r.extrapolated);
  os << " target=" << fmt_full(r.target);
  os << " tolerance=" << fmt_full(r.tolerance);
  if (r.has_rate) os << " rate_slope=" << fmt_full(r.rate.slope);
  if (r.extrapolation_disagrees) os << " extrapolation_disagrees=1";
  r.summary = os.str();
}

bool rows_all_ok(const SweepReport& r) {
  for (const SweepRow& row : r.rows)
    if (!row.ok) return false;
  return true;
}

bool any_eval_failure(const SweepReport& r) {
  for (const SweepRow& row : r.rows)
    if (row.note.rfind("error", 0) == 0) return true;
  return false;
}

// ---------------------------------------------------------------------------
// POINTWISE_S_LIMIT: rescaled perimeter parts across an s-sweep against the
// classical interface measures, extrapolated to the s -> 1/2 limit.
// ---------------------------------------------------------------------------

struct PointwiseGeometry {
  GeometricSet set = GeometricSet::half_line(0.0, +1);
  Domain omega;
  double target = 0.0;
};

PointwiseGeometry pointwise_geometry(int dim, KernelPart part, int cells) {
  PointwiseGeometry g;
  if (dim == 1) {
    g.set = GeometricSet::half_line(0.0, +1);
    // Interior probe: interface strictly inside. Exterior probe: the set
    // boundary sits on the container boundary.
    g.omega = part == KernelPart::Exterior
                  ? Domain::interval(0.0, 1.0, cells)
                  : Domain::interval(-1.0, 1.0, cells);
  } else {
    if (part == KernelPart::Exterior) {
      // Half-plane datum against the unit square: the set boundary is the
      // left edge of the container, so the exterior part carries a unit of
      // boundary interface and admits a closed-form cross-check.
      g.set = GeometricSet::half_space({1.0, 0.0, 0.0}, 0.0);
      g.omega = Domain::box2(0.0, 1.0, cells, 0.0, 1.0, cells);
    } else {
      // Concentric square, edges voxel-aligned, classical perimeter 8.
      g.set = GeometricSet::box({-1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}, 2);
      g.omega = Domain::box2(-2.0, 2.0, cells, -2.0, 2.0, cells);
    }
  }
  const PerimeterWhere where = part == KernelPart::Exterior
                                   ? PerimeterWhere::Boundary
                                   : PerimeterWhere::Interior;
  g.target = sharp_limit_constant(dim) * classical_perimeter(g.set, g.omega, where);
  return g;
}

void run_pointwise(const Experiment& ex, SweepReport& r) {
  const int cells = ex.cells > 0 ? ex.cells : (ex.dim == 1 ? 256 : 64);
  const PointwiseGeometry g = pointwise_geometry(ex.dim, ex.part, cells);
  r.target = std::isfinite(ex.target) && ex.target != 0.0 ? ex.target : g.target;
  r.value_names = {"rescaled_perimeter"};
  std::vector<double> xs, ys;
  for (const double s : ex.grid) {
    SweepRow row;
    row.param = s;
    row.reference = r.target;
    try {
      const double y =
          pointwise_rescale(s) * frac_perimeter(g.set, g.omega, s, ex.part);
      row.values = {y};
      row.rel_error = rel_to(y, row.reference);
      xs.push_back(0.5 - s);
      ys.push_back(y);
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  extrapolate_into(r, xs, ys);
  if (xs.size() >= 3) {
    r.rate = fit_line(xs, ys);
    r.has_rate = true;
  }
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  const bool hit = std::isfinite(r.extrapolated) &&
                   rel_to(r.extrapolated, r.target) <= r.tolerance;
  r.verdict = hit ? Verdict::Pass : Verdict::Fail;
  if (r.verdict == Verdict::Pass && r.extrapolation_disagrees)
    r.verdict = Verdict::Inconclusive;
}

// ---------------------------------------------------------------------------
// EXT_VANISHING: the exterior part for a boundary-crossing set keeps a
// positive s-limit, while inward-retracted copies of the same set lose it
// at a fixed order close to 1/2.
// ---------------------------------------------------------------------------

void run_ext_vanishing(const Experiment& ex, SweepReport& r) {
  const GeometricSet crossing_set = GeometricSet::half_line(0.0, +1);
  if (ex.crossing) {
    const int cells = ex.cells > 0 ? ex.cells : 64;
    const Domain omega = Domain::interval(0.0, 1.0, cells);
    r.target = sharp_limit_constant(1) *
               classical_perimeter(crossing_set, omega, PerimeterWhere::Boundary);
    r.value_names = {"rescaled_exterior"};
    std::vector<double> xs, ys;
    for (const double s : ex.grid) {
      SweepRow row;
      row.param = s;
      row.reference = r.target;
      try {
        const double y = pointwise_rescale(s) *
                         frac_perimeter(crossing_set, omega, s,
                                        KernelPart::Exterior);
        row.values = {y};
        row.rel_error = rel_to(y, row.reference);
        xs.push_back(0.5 - s);
        ys.push_back(y);
      } catch (const std::exception& e) {
        row.values = {kNaN};
        row.rel_error = kNaN;
        row.ok = false;
        row.note = std::string("error: ") + e.what();
      }
      r.rows.push_back(row);
    }
    sort_rows(r);
    extrapolate_into(r, xs, ys);
    if (xs.size() >= 3) {
      r.rate = fit_line(xs, ys);
      r.has_rate = true;
    }
    if (any_eval_failure(r)) {
      r.verdict = Verdict::Inconclusive;
      return;
    }
    // Positivity exhibit: the extrapolated limit clears the stated fraction
    // of the interface-measure target.
    const bool positive = std::isfinite(r.extrapolated) &&
                          r.extrapolated > r.tolerance * r.target;
    r.verdict = positive ? Verdict::Pass : Verdict::Fail;
    return;
  }

  // Retracted family: pull the set boundary off the container boundary by a
  // few cells; the same rescaled quantity at fixed order must fall away.
  const int cells = ex.cells > 0 ? ex.cells : 10;
  const Domain omega = Domain::interval(0.0, 1.0, cells);
  const double h = omega.spacing(0);
  const double s = ex.s;
  r.target = sharp_limit_constant(1) *
             classical_perimeter(crossing_set, omega, PerimeterWhere::Boundary);
  r.value_names = {"rescaled_exterior"};
  for (const double delta : ex.grid) {
    SweepRow row;
    row.param = delta;
    row.reference = r.target;
    try {
      const GeometricSet retracted = GeometricSet::half_line(delta * h, +1);
      const double y = pointwise_rescale(s) *
                       frac_perimeter(retracted, omega, s, KernelPart::Exterior);
      row.values = {y};
      row.rel_error = rel_to(y, row.reference);
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  // Strictly smaller with each extra cell of retraction, and already below
  // tolerance * target at the least-retracted member.
  bool decreasing = true;
  for (size_t i = 1; i < r.rows.size(); ++i)
    if (!(r.rows[i].value() < r.rows[i - 1].value())) decreasing = false;
  const bool below =
      !r.rows.empty() && r.rows.front().value() < r.tolerance * r.target;
  r.verdict = (decreasing && below) ? Verdict::Pass : Verdict::Fail;
}

// ---------------------------------------------------------------------------
// GAMMA_EPS_LIMIT: minimized full-energy values across an eps-sweep against
// the sharp-interface reference, with the recovery energies as upper bounds.
// ---------------------------------------------------------------------------

EnergySpec full_energy_spec(double eps, double s) {
  EnergySpec spec;
  spec.tag = EnergyTag::F_FULL;
  spec.eps = eps;
  spec.s = s;
  spec.well = WellKind::Quartic;
  return spec;
}

// ---------------------------------------------------------------------------
// Cell problem for orders above 1/2: the unrescaled energy of a single
// transition on a long truncated line with matching far-field data. The
// minimized value plus the closed-form interaction of the two omitted far
// rays with each other is the per-unit-interface limit constant; the
// minimizing profile doubles as the recovery shape for the eps-sweep.
// ---------------------------------------------------------------------------

struct CellProfile {
  double value = 0.0;            // limit constant (minimum + tail closure)
  double x0 = 0.0, h = 0.0;      // uniform profile abscissae
  std::vector<double> phi;       // minimized transition profile
};

const CellProfile& cell_profile(double s) {
  if (!(s > 0.5 && s < 1.0))
    throw InvalidArgument("profile_constant_s: order must lie in (1/2,1)");
  static std::mutex mu;
  static std::map<double, CellProfile> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto it = cache.find(s);
  if (it != cache.end()) return it->second;
  // Window long enough that the limit constant is stable in L at the
  // reported precision; spacing fine enough to resolve the wide optimal
  // transition (much wider than the local optimal profile).
  const double L = 40.0;
  const int cells = 1600;
  const Domain dom = Domain::interval(-L, L, cells);
  const GeometricSet E = GeometricSet::half_line(0.0, +1);
  // Wide seed: the optimal transition is far wider than the local profile,
  // and a wide start descends into it directly.
  const ScalarField seed =
      recovery_sequence(E, 4.0, DoubleWell::quartic(), dom);
  EnergySpec spec;
  spec.tag = EnergyTag::J_RAW;
  spec.s = s;
  spec.well = WellKind::Quartic;
  // The exterior datum is a pure phase on each side, so the analytic ray
  // tails make the exterior part independent of the materialized margin;
  // keep the margin short for cost.
  spec.margin = 2.0;
  const MinimizeResult res = minimize_energy(spec, seed);
  if (res.line_search_failed || !res.converged)
    throw InvalidArgument("profile_constant_s: minimization did not converge");
  // Ordered pairs between the two omitted rays: unit jump of size 2
  // squared, both orders, distances at least 2L.
  const double closure =
      8.0 * std::pow(2.0 * L, 1.0 - 2.0 * s) / (2.0 * s * (2.0 * s - 1.0));
  CellProfile cp;
  cp.value = res.final_energy + closure;
  cp.x0 = dom.center(0, 0);
  cp.h = dom.spacing(0);
  cp.phi = res.u.v;
  return cache.emplace(s, std::move(cp)).first->second;
}

// Linear interpolation of the cell profile, clamped to the pure phases
// beyond the stored window.
double cell_profile_at(const CellProfile& cp, double t) {
  const double pos = (t - cp.x0) / cp.h;
  if (pos <= 0.0) return cp.phi.front();
  const double last = static_cast<double>(cp.phi.size() - 1);
  if (pos >= last) return cp.phi.back();
  const size_t i = static_cast<size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * cp.phi[i] + f * cp.phi[i + 1];
}

// Recovery field for orders above 1/2: the minimized cell profile rescaled
// to transition width eps, blended into the exterior datum by a linear ramp
// near the container boundary (the raw profile tail otherwise pays a large
// mismatch penalty against the prescribed datum).
ScalarField blended_cell_recovery(const CellProfile& cp, const GeometricSet& E,
                                  double eps, const DoubleWell& well,
                                  const Domain& omega) {
  ScalarField u = recovery_sequence(E, eps, well, omega);
  const double ramp = 0.1;
  const double lo = omega.lo[0], hi = omega.hi[0];
  for (int i = 0; i < omega.cells[0]; ++i) {
    const double x = omega.center(0, i);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    const double eta =
        std::clamp(std::min(x - lo, hi - x) / ramp, 0.0, 1.0);
    const double phi = cell_profile_at(cp, x / eps);
    u.v[static_cast<size_t>(i)] = sgn + eta * (phi - sgn);
  }
  return u;
}

void run_gamma_eps(const Experiment& ex, SweepReport& r) {
  const int cells = ex.cells > 0 ? ex.cells : 512;
  const double s = ex.s;
  const GeometricSet E = GeometricSet::half_line(0.0, +1);
  const Domain omega = Domain::interval(-1.0, 1.0, cells);
  if (std::isfinite(ex.target) && ex.target != 0.0) {
    r.target = ex.target;
  } else if (s < 0.5 - 1e-14) {
    r.target = 8.0 * frac_perimeter(E, omega, s, KernelPart::Full);
  } else {
    r.target = profile_constant_s(s) *
               classical_perimeter(E, omega, PerimeterWhere::Interior);
  }
  r.value_names = {"minimized", "recovery"};
  const DoubleWell well = DoubleWell::quartic();
  for (const double eps : ex.grid) {
    SweepRow row;
    row.param = eps;
    row.reference = r.target;
    try {
      const EnergySpec spec = full_energy_spec(eps, s);
      // Below order 1/2 the optimal-profile family is the recovery
      // sequence; above it the minimized cell profile (rescaled and
      // blended into the datum) is both the recovery field and the seed.
      const ScalarField seed =
          s < 0.5 ? recovery_sequence(E, eps, well, omega)
                  : blended_cell_recovery(cell_profile(s), E, eps, well,
                                          omega);
      const double rec = evaluate_energy(spec, seed).total;
      const MinimizeResult res = minimize_energy(spec, seed);
      row.values = {res.final_energy, rec};
      row.rel_error = rel_to(res.final_energy, row.reference);
      if (res.line_search_failed || !res.converged) {
        row.ok = false;
        row.note = "error: minimization did not converge";
      }
    } catch (const std::exception& e) {
      row.values = {kNaN, kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  // Extrapolate both columns in the analytic small parameter eps^|1-2s|
  // (the leading correction order of the transition energies).
  const double order = std::abs(1.0 - 2.0 * s);
  double rec_extrapolated = kNaN;
  {
    std::vector<double> xs, ys, yr;
    for (const SweepRow& row : r.rows)
      if (row.ok) {
        xs.push_back(std::pow(row.param, order));
        ys.push_back(row.values[0]);
        yr.push_back(row.values[1]);
      }
    extrapolate_into(r, xs, ys);
    if (xs.size() >= 3) {
      r.rate = fit_line(xs, ys);
      r.has_rate = true;
    }
    if (xs.size() >= 2) rec_extrapolated = extrapolate_affine(xs, yr);
  }
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  // Rows are sorted by eps ascending; traversing the sweep toward eps -> 0
  // visits them in reverse, so "nonincreasing along the sweep" means the
  // stored sequence must not decrease with the row index. The trend is
  // asserted over the three finest rows (coarse rows are pre-asymptotic)
  // and only below order 1/2, where the limit is approached from above;
  // above 1/2 the approach is from below and no direction is asserted.
  bool nonincreasing_toward_limit = true;
  if (s < 0.5) {
    const size_t nt = std::min<size_t>(3, r.rows.size());
    for (size_t i = 1; i < nt; ++i)
      if (r.rows[i].value() < r.rows[i - 1].value() * (1.0 - 1e-12))
        nonincreasing_toward_limit = false;
  }
  const bool min_extrap_hit = std::isfinite(r.extrapolated) &&
                              rel_to(r.extrapolated, r.target) <= r.tolerance;
  // The upper bound is asymptotic: it is asserted on the finest rows
  // (same window as the trend check) and on the extrapolated value.  At
  // the coarsest eps the transition layer does not fit the domain and the
  // admissible-field energy legitimately overshoots.
  bool recovery_bounds = true;
  {
    const size_t nt = std::min<size_t>(3, r.rows.size());
    for (size_t i = 0; i < nt; ++i)
      if (!(r.rows[i].values[1] <= (1.0 + r.tolerance) * r.target))
        recovery_bounds = false;
  }
  if (!(std::isfinite(rec_extrapolated) &&
        rel_to(rec_extrapolated, r.target) <= r.tolerance))
    recovery_bounds = false;
  r.verdict = (nonincreasing_toward_limit && min_extrap_hit && recovery_bounds)
                  ? Verdict::Pass
                  : Verdict::Fail;
  std::ostringstream os;
  os << "monotone=" << (s < 0.5 ? (nonincreasing_toward_limit ? "1" : "0") : "na")
     << " min_extrap_ok=" << (min_extrap_hit ? 1 : 0)
     << " recovery_ok=" << (recovery_bounds ? 1 : 0)
     << " rec_extrapolated=" << fmt_full(rec_extrapolated);
  if (!r.rows.empty()) r.rows.front().note = os.str();
}

// ---------------------------------------------------------------------------
// ENERGY_GROWTH: the unrescaled energy of a sharp one-dimensional transition
// on growing containers (-R, R) at fixed lattice spacing.
// ---------------------------------------------------------------------------

void run_energy_growth(const Experiment& ex, SweepReport& r) {
  const double s = ex.s;
  // Transition-profile member per regime. Below order 1/2 the sharp
  // transition is used: the pair quadrature is exact for piecewise-constant
  // fields, so its energy is a pure power of the container half-width and
  // the log-log slope is spacing-independent. At order 1/2 the sharp
  // seminorm carries a spacing-truncated logarithmic divergence, so the
  // smooth unit-width transition is used instead; its additive constants
  // stay small relative to log R over the sampled range.
  const double h = is_half(s) ? 0.1 : 0.5;
  const GeometricSet E = GeometricSet::half_line(0.0, +1);
  r.value_names = {"energy"};
  r.target = is_half(s) ? kNaN : 1.0 - 2.0 * s;  // growth exponent
  for (const double R : ex.grid) {
    SweepRow row;
    row.param = R;
    row.reference = kNaN;
    row.rel_error = kNaN;
    try {
      const int cells = static_cast<int>(std::lround(2.0 * R / h));
      const Domain dom = Domain::interval(-R, R, cells);
      const ScalarField u =
          is_half(s)
              ? recovery_sequence(E, 1.0, DoubleWell::quartic(), dom)
              : voxelize(E, dom);
      EnergySpec spec;
      spec.tag = EnergyTag::J_RAW;
      spec.s = s;
      spec.well = WellKind::Quartic;
      if (is_half(s)) spec.margin = 2.0 * R;
      row.values = {evaluate_energy(spec, u).total};
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  if (is_half(s)) {
    // Log corrections defeat log-log fits at this scale: use a ratio test.
    // The energy must keep growing while energy / log R stays within a
    // bounded band (factor 2 across the sampled range).
    bool increasing = true;
    double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
    for (size_t i = 0; i < r.rows.size(); ++i) {
      if (i > 0 && !(r.rows[i].value() > r.rows[i - 1].value()))
        increasing = false;
      const double q = r.rows[i].value() / std::log(r.rows[i].param);
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
    }
    const bool bounded = qmax <= 2.0 * qmin;
    for (SweepRow& row : r.rows)
      row.note = "ratio_test";
    r.verdict = (increasing && bounded) ? Verdict::Pass : Verdict::Fail;
    return;
  }
  r.rate = fit_rate(r.rows, FitKind::LogLog);
  r.has_rate = true;
  const bool slope_hit = std::abs(r.rate.slope - r.target) <= r.tolerance;
  r.verdict = slope_hit ? Verdict::Pass : Verdict::Fail;
}

// ---------------------------------------------------------------------------
// DENSITY_ESTIMATE: phase-volume fraction around an established point of the
// minimizers, with a floor and grid-doubling stability of the recorded floor.
// ---------------------------------------------------------------------------

double leftmost_above(const ScalarField& u, double theta1) {
  for (long i = 0; i < u.dom.num_cells(); ++i)
    if (u.v[static_cast<size_t>(i)] > theta1)
      return u.dom.center(0, static_cast<int>(i));
  throw InvalidArgument("density experiment: no cell exceeds theta1");
}

void run_density(const Experiment& ex, SweepReport& r) {
  const double s = ex.s;
  const double eps = 0.025;  // finest member of the minimization sweep
  const int base_cells = ex.cells > 0 ? ex.cells : 512;
  const GeometricSet E = GeometricSet::half_line(0.0, +1);
  const DoubleWell well = DoubleWell::quartic();
  r.target = ex.tolerance;  // the floor doubles as the target
  r.value_names = {"fraction", "fraction_doubled"};
  ScalarField u_base = ScalarField::constant(Domain::interval(0, 1, 2), 0.0);
  ScalarField u_dbl = u_base;
  double x0_base = 0.0, x0_dbl = 0.0;
  bool setup_ok = true;
  std::string setup_err;
  try {
    for (const int mult : {1, 2}) {
      const Domain omega = Domain::interval(-1.0, 1.0, base_cells * mult);
      const EnergySpec spec = full_energy_spec(eps, s);
      const ScalarField seed = recovery_sequence(E, eps, well, omega);
      const MinimizeResult res = minimize_energy(spec, seed);
      if (res.line_search_failed || !res.converged)
        throw InvalidArgument("density experiment: minimization did not converge");
      // Center the sampling balls at the first cell inside the positive
      // phase: the hypothesis point of the density bound, and for this
      // antisymmetric minimizer essentially the midpoint of the container,
      // so every sampled ball stays inside the sampled region.
      if (mult == 1) {
        u_base = res.u;
        x0_base = leftmost_above(u_base, 0.0);
      } else {
        u_dbl = res.u;
        x0_dbl = leftmost_above(u_dbl, 0.0);
      }
    }
  } catch (const std::exception& e) {
    setup_ok = false;
    setup_err = std::string("error: ") + e.what();
  }
  double c0_base = std::numeric_limits<double>::infinity();
  double c0_dbl = std::numeric_limits<double>::infinity();
  for (const double R : ex.grid) {
    SweepRow row;
    row.param = R;
    row.reference = r.target;
    if (!setup_ok) {
      row.values = {kNaN, kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = setup_err;
      r.rows.push_back(row);
      continue;
    }
    try {
      const double fb = density_fraction(u_base, 0.0, {x0_base, 0.0, 0.0}, R);
      const double fd = density_fraction(u_dbl, 0.0, {x0_dbl, 0.0, 0.0}, R);
      row.values = {fb, fd};
      row.rel_error = rel_to(fb, row.reference);
      row.ok = fb >= r.target && fd >= r.target;
      c0_base = std::min(c0_base, fb);
      c0_dbl = std::min(c0_dbl, fd);
    } catch (const std::exception& e) {
      row.values = {kNaN, kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  const bool floors = rows_all_ok(r);
  const bool stable =
      std::isfinite(c0_base) && std::isfinite(c0_dbl) &&
      std::abs(c0_dbl - c0_base) <= 0.2 * std::abs(c0_base);
  r.verdict = (floors && stable) ? Verdict::Pass : Verdict::Fail;
  if (!r.rows.empty()) {
    std::ostringstream os;
    os << "c0=" << fmt_full(c0_base) << " c0_doubled=" << fmt_full(c0_dbl);
    r.rows.front().note = os.str();
  }
}

// ---------------------------------------------------------------------------
// LEVELSET_CONV: the band {|u_eps| < 1/2} of the minimizers localizes onto
// the limit interface; measured by the one-sided Hausdorff distance.
// ---------------------------------------------------------------------------

void run_levelset(const Experiment& ex, SweepReport& r) {
  const int cells = ex.cells > 0 ? ex.cells : (ex.dim == 1 ? 128 : 40);
  const DoubleWell well = DoubleWell::quartic();
  GeometricSet E = GeometricSet::half_line(0.0, +1);
  Domain omega = Domain::interval(-1.0, 1.0, cells);
  if (ex.dim == 2) {
    E = GeometricSet::ball({0.0, 0.0, 0.0}, 0.25);
    omega = Domain::box2(-1.0, 1.0, cells, -1.0, 1.0, cells);
  }
  const double h = omega.spacing(0);
  const InterfaceMesh limit_mesh = extract_interface(E, omega);
  r.target = ex.tolerance * h;  // tolerance counts cell widths
  r.value_names = {"hausdorff"};
  for (const double eps : ex.grid) {
    SweepRow row;
    row.param = eps;
    row.reference = r.target;
    try {
      // Minimizers of the local gradient/well energy: their transition band
      // has width proportional to eps, so the midlevel set localizes.
      EnergySpec spec;
      spec.tag = EnergyTag::MM;
      spec.eps = eps;
      spec.well = WellKind::Quartic;
      ScalarField seed = recovery_sequence(E, eps, well, omega);
      MinimizeOptions opt;
      if (ex.dim == 1) {
        // Anchor the pure phases at the container ends; the local energy has
        // no exterior coupling, so without an anchor the profile could creep
        // toward a constant.
        opt.frozen.push_back(0);
        opt.frozen.push_back(omega.num_cells() - 1);
      } else {
        // Pin the phase on the droplet cells: the interface is then held at
        // the set boundary and only the transition band relaxes.
        VoxelRegion probe;
        probe.dom = omega;
        for (long t = 0; t < omega.num_cells(); ++t) {
          if (E.contains(probe.cell_center(t), 2)) {
            seed.v[static_cast<size_t>(t)] = 1.0;
            opt.frozen.push_back(t);
          }
        }
      }
      const MinimizeResult res = minimize_energy(spec, seed, opt);
      if (res.line_search_failed || !res.converged)
        throw InvalidArgument("levelset experiment: minimization did not converge");
      const VoxelRegion band = level_set_region(res.u, 0.5);
      row.values = {hausdorff_distance(band, limit_mesh)};
      row.rel_error = rel_to(row.values[0], row.reference);
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  // Ascending eps rows: the distance must shrink as eps does (asserted over
  // the three finest rows; coarser rows can sit in the pre-asymptotic
  // regime), and the finest band must sit within the stated number of cell
  // widths of the interface.
  bool shrinking = true;
  const size_t nt = std::min<size_t>(3, r.rows.size());
  for (size_t i = 1; i < nt; ++i)
    if (!(r.rows[i - 1].value() < r.rows[i].value())) shrinking = false;
  const bool finest_close =
      !r.rows.empty() && r.rows.front().value() <= r.target;
  r.verdict = (shrinking && finest_close) ? Verdict::Pass : Verdict::Fail;
}

// ---------------------------------------------------------------------------
// BBM_LIMIT: rescaled L1 difference-quotient seminorm of the identity ramp,
// rows against the closed form and the extrapolated limit against 1.
// ---------------------------------------------------------------------------

void run_bbm(const Experiment& ex, SweepReport& r) {
  const int cells = ex.cells > 0 ? ex.cells : 256;
  const Domain omega = Domain::interval(0.0, 1.0, cells);
  ScalarField u = ScalarField::constant(omega, 0.0);
  u.range = ValueRange::ZeroOne;
  for (int i = 0; i < cells; ++i)
    u.v[static_cast<size_t>(i)] = omega.center(0, i);
  r.target = 1.0;
  r.value_names = {"rescaled_seminorm"};
  const double row_tol = 0.01;  // per-row closeness to the closed form
  std::vector<double> xs, ys;
  for (const double s : ex.grid) {
    SweepRow row;
    row.param = s;
    row.reference = 1.0 / (2.0 - 2.0 * s);
    try {
      const double y = (0.5 - s) * bbm_seminorm(u, s);
      row.values = {y};
      row.rel_error = rel_to(y, row.reference);
      row.ok = row.rel_error <= row_tol;
      xs.push_back(0.5 - s);
      ys.push_back(y);
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  extrapolate_into(r, xs, ys);
  if (xs.size() >= 3) {
    r.rate = fit_line(xs, ys);
    r.has_rate = true;
  }
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  const bool rows_ok = rows_all_ok(r);
  const bool limit_ok = std::isfinite(r.extrapolated) &&
                        rel_to(r.extrapolated, r.target) <= r.tolerance;
  r.verdict = (rows_ok && limit_ok) ? Verdict::Pass : Verdict::Fail;
  if (r.verdict == Verdict::Pass && r.extrapolation_disagrees)
    r.verdict = Verdict::Inconclusive;
}

// ---------------------------------------------------------------------------
// ABS1D_LIMIT: minimized single-jump energies under the exponential
// potential schedule, checked for monotone approach to the jump constant.
//
// Strategy: at the exponential schedule the optimal transition width is
// 30 * eps * exp(-k/eps) -- far below any affordable lattice spacing, where
// a grid minimizer collapses onto a spacing-truncated jump. The
// minimization is therefore parametric over the clamped-ramp dilation
// family v_d(x) = clamp(x/d, -1, 1): its order-1/2 interior seminorm is
// C - 8 log d with the shape constant C measured once on a reference
// lattice at a resolvable width, its well mass is (4/15) d, and the inner
// minimum over d is exact:
//   d* = 8 eps / (lambda * 4/15),   E(eps) = eps (C - 8 log d*) + 8 eps.
// ---------------------------------------------------------------------------

double clamped_ramp_shape_constant() {
  static std::once_flag once;
  static double C = kNaN;
  std::call_once(once, [] {
    const int ref_cells = 4000;
    const Domain ref = Domain::interval(-1.0, 1.0, ref_cells);
    const double d0 = 0.02;  // reference width: 40 cells, fully resolved
    ScalarField ramp = ScalarField::constant(ref, 0.0);
    for (int i = 0; i < ref_cells; ++i)
      ramp.v[static_cast<size_t>(i)] =
          std::clamp(ref.center(0, i) / d0, -1.0, 1.0);
    EnergySpec mspec;
    mspec.tag = EnergyTag::ABS_1D;
    mspec.eps = 0.5;  // kinetic part scales as eps^(2s); divided back out
    mspec.s = 0.5;
    mspec.k = 1.0;
    mspec.schedule = LambdaSchedule::ExpK;
    mspec.well = WellKind::Quartic;
    const double A = evaluate_energy(mspec, ramp).kinetic / 0.5;
    C = A + 8.0 * std::log(d0);
  });
  return C;
}

void run_abs1d(const Experiment& ex, SweepReport& r) {
  const int cells = ex.cells > 0 ? ex.cells : 1024;
  const double k = ex.k;
  const Domain omega = Domain::interval(0.0, 1.0, cells);
  const GeometricSet left = GeometricSet::half_line(0.5, -1);
  ScalarField v0 = voxelize(left, omega);
  v0.exterior_set.reset();  // the jump functional sees the interval only
  r.target = std::isfinite(ex.target) && ex.target != 0.0
                 ? ex.target
                 : abs_1d_limit(v0, k);
  r.value_names = {"minimized"};
  const double well_mass_rate = 4.0 / 15.0;  // quartic well over a unit ramp
  double C = kNaN;
  bool setup_ok = true;
  std::string setup_err;
  try {
    C = clamped_ramp_shape_constant();
  } catch (const std::exception& e) {
    setup_ok = false;
    setup_err = std::string("error: ") + e.what();
  }
  const auto ramp_family_minimum = [&](double eps) {
    const double lambda = lambda_value(LambdaSchedule::ExpK, eps, k);
    const double dstar = 8.0 * eps / (lambda * well_mass_rate);
    return eps * (C - 8.0 * std::log(dstar)) + lambda * well_mass_rate * dstar;
  };
  for (const double eps : ex.grid) {
    SweepRow row;
    row.param = eps;
    row.reference = r.target;
    if (!setup_ok) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = setup_err;
      r.rows.push_back(row);
      continue;
    }
    try {
      const double E = ramp_family_minimum(eps);
      row.values = {E};
      row.rel_error = rel_to(E, row.reference);
    } catch (const std::exception& e) {
      row.values = {kNaN};
      row.rel_error = kNaN;
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
  }
  sort_rows(r);
  {
    std::vector<double> xs, ys;
    for (const SweepRow& row : r.rows)
      if (row.ok) {
        xs.push_back(row.param);
        ys.push_back(row.value());
      }
    extrapolate_into(r, xs, ys);
  }
  if (any_eval_failure(r)) {
    r.verdict = Verdict::Inconclusive;
    return;
  }
  // Trend check only: traversing the sweep toward eps -> 0 (descending
  // parameter), the distance to the jump constant must strictly shrink,
  // asserted over the three finest rows.
  bool approaching = true;
  const size_t nt = std::min<size_t>(3, r.rows.size());
  for (size_t i = 1; i < nt; ++i) {
    const double d_small = std::abs(r.rows[i - 1].value() - r.target);
    const double d_large = std::abs(r.rows[i].value() - r.target);
    if (!(d_small < d_large)) approaching = false;
  }
  r.verdict = approaching ? Verdict::Pass : Verdict::Fail;
  // The parametric energy has a hump at eps = exp(C/8)/30; below it the
  // values decrease toward the jump constant. Record that stretch as a
  // diagnostic alongside the verdict over the requested grid.
  if (!r.rows.empty()) {
    std::ostringstream os;
    os << "approaching=" << (approaching ? 1 : 0) << " sub_hump";
    for (const double eps : {0.02, 0.01, 0.005})
      os << " E(" << eps << ")=" << fmt_full(ramp_family_minimum(eps));
    r.rows.front().note = os.str();
  }
}

// ---------------------------------------------------------------------------
// MULTIPLIER_ASYMPTOTICS: dispersion multiplier against its closed form at
// order 1/2 and against its quadratic/power asymptotics otherwise.
// ---------------------------------------------------------------------------

void run_multiplier(const Experiment& ex, SweepReport& r) {
  const double s = ex.s;
  if (is_half(s)) {
    r.target = kNaN;
    r.value_names = {"multiplier"};
    const double row_tol = 1e-8;
    for (const double xi : ex.grid) {
      SweepRow row;
      row.param = xi;
      row.reference = std::abs(xi) * std::tanh(std::abs(xi));
      try {
        const double S = multiplier_S(s, xi);
        row.values = {S};
        row.rel_error = rel_to(S, row.reference);
        row.ok = row.rel_error <= row_tol;
      } catch (const std::exception& e) {
        row.values = {kNaN};
        row.rel_error = kNaN;
        row.ok = false;
        row.note = std::string("error: ") + e.what();
      }
      r.rows.push_back(row);
    }
    sort_rows(r);
    r.extrapolated = kNaN;
    r.richardson = kNaN;
    r.verdict = any_eval_failure(r)
                    ? Verdict::Inconclusive
                    : (rows_all_ok(r) ? Verdict::Pass : Verdict::Fail);
    return;
  }
  // Away from 1/2: the multiplier matches |xi|^2 scaling at low frequency
  // (bounded ratio band) and |xi|^(2s) scaling at high frequency (ratio
  // within 1 percent of 1).
  r.target = kNaN;
  r.value_names = {"multiplier", "ratio"};
  std::vector<size_t> small_rows;
  for (const double xi : ex.grid) {
    SweepRow row;
    row.param = xi;
    row.reference = kNaN;
    row.rel_error = kNaN;
    const bool small = xi < 1.0;
    try {
      const double S = multiplier_S(s, xi);
      const double ratio =
          small ? S / (xi * xi) : S / std::pow(std::abs(xi), 2.0 * s);
      row.values = {S, ratio};
      row.note = small ? "small" : "large";
      if (!small) row.ok = ratio >= 0.99 && ratio <= 1.01;
    } catch (const std::exception& e) {
      row.values = {kNaN, kNaN};
      row.ok = false;
      row.note = std::string("error: ") + e.what();
    }
    r.rows.push_back(row);
    if (small && row.ok) small_rows.push_back(r.rows.size() - 1);
  }
  // Bounded low-frequency band: all quadratic ratios within a factor 2.
  double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
  for (const size_t i : small_rows) {
    qmin = std::min(qmin, r.rows[i].values[1]);
    qmax = std::max(qmax, r.rows[i].values[1]);
  }
  const bool small_bounded =
      small_rows.empty() || (std::isfinite(qmax) && qmax <= 2.0 * qmin);
  if (!small_bounded)
    for (const size_t i : small_rows) r.rows[i].ok = false;
  sort_rows(r);
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  r.verdict = any_eval_failure(r)
                  ? Verdict::Inconclusive
                  : (rows_all_ok(r) ? Verdict::Pass : Verdict::Fail);
}

}  // namespace

// ---------------------------------------------------------------------------
// Names, defaults, validation
// ---------------------------------------------------------------------------

std::string experiment_name(ExperimentName name) {
  switch (name) {
    case ExperimentName::PointwiseSLimit: return "POINTWISE_S_LIMIT";
    case ExperimentName::GammaEpsLimit: return "GAMMA_EPS_LIMIT";
    case ExperimentName::ExtVanishing: return "EXT_VANISHING";
    case ExperimentName::EnergyGrowth: return "ENERGY_GROWTH";
    case ExperimentName::DensityEstimate: return "DENSITY_ESTIMATE";
    case ExperimentName::LevelsetConv: return "LEVELSET_CONV";
    case ExperimentName::BbmLimit: return "BBM_LIMIT";
    case ExperimentName::Abs1dLimit: return "ABS1D_LIMIT";
    case ExperimentName::MultiplierAsymptotics: return "MULTIPLIER_ASYMPTOTICS";
  }
  throw InvalidArgument("experiment_name: unknown experiment");
}

ExperimentName parse_experiment(const std::string& text) {
  static const std::map<std::string, ExperimentName> table = {
      {"POINTWISE_S_LIMIT", ExperimentName::PointwiseSLimit},
      {"GAMMA_EPS_LIMIT", ExperimentName::GammaEpsLimit},
      {"EXT_VANISHING", ExperimentName::ExtVanishing},
      {"ENERGY_GROWTH", ExperimentName::EnergyGrowth},
      {"DENSITY_ESTIMATE", ExperimentName::DensityEstimate},
      {"LEVELSET_CONV", ExperimentName::LevelsetConv},
      {"BBM_LIMIT", ExperimentName::BbmLimit},
      {"ABS1D_LIMIT", ExperimentName::Abs1dLimit},
      {"MULTIPLIER_ASYMPTOTICS", ExperimentName::MultiplierAsymptotics},
  };
  const auto it = table.find(text);
  if (it == table.end())
    throw InvalidArgument("parse_experiment: unknown experiment '" + text + "'");
  return it->second;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  throw InvalidArgument("verdict_name: unknown verdict");
}

void Experiment::validate() const {
  if (grid.empty())
    throw InvalidArgument("experiment: parameter grid must be nonempty");
  if (!strictly_monotone(grid))
    throw InvalidArgument("experiment: parameter grid must be strictly monotone");
  if (!(tolerance > 0.0))
    throw InvalidArgument("experiment: tolerance must be positive");
  if (dim != 1 && dim != 2)
    throw InvalidArgument("experiment: dimension must be 1 or 2");
  if (cells < 0)
    throw InvalidArgument("experiment: cell count must be nonnegative");
  if (s != 0.0 && !(s > 0.0 && s < 1.0))
    throw InvalidArgument("experiment: order must lie in (0,1)");
  if (!(k > 0.0))
    throw InvalidArgument("experiment: jump-constant multiplier must be positive");
}

Experiment experiment_defaults(ExperimentName name) {
  Experiment ex;
  ex.name = name;
  switch (name) {
    case ExperimentName::PointwiseSLimit:
      ex.grid = linspace_step(0.30, 0.48, 0.02);
      ex.tolerance = 0.05;
      break;
    case ExperimentName::GammaEpsLimit:
      ex.grid = {0.2, 0.1, 0.05, 0.025};
      ex.tolerance = 0.05;
      ex.s = 0.25;
      break;
    case ExperimentName::ExtVanishing:
      ex.grid = linspace_step(0.30, 0.48, 0.02);
      ex.tolerance = 0.5;  // positivity fraction of the interface target
      ex.part = KernelPart::Exterior;
      break;
    case ExperimentName::EnergyGrowth:
      ex.grid = {4, 8, 16, 32, 64};
      ex.tolerance = 0.1;  // slope window around the growth exponent
      ex.s = 0.25;
      break;
    case ExperimentName::DensityEstimate:
      ex.grid = {0.1, 0.2, 0.3, 0.4};
      ex.tolerance = 0.25;  // the density floor
      ex.s = 0.25;
      break;
    case ExperimentName::LevelsetConv:
      ex.grid = {0.2, 0.1, 0.05, 0.025};
      ex.tolerance = 2.0;  // cell widths at the finest eps
      ex.s = 0.25;
      break;
    case ExperimentName::BbmLimit:
      ex.grid = linspace_step(0.30, 0.48, 0.02);
      ex.tolerance = 0.02;
      break;
    case ExperimentName::Abs1dLimit:
      ex.grid = {0.1, 0.07, 0.05};
      ex.tolerance = 0.5;  // trend check only; tolerance is not asserted
      break;
    case ExperimentName::MultiplierAsymptotics:
      ex.s = 0.5;
      ex.tolerance = 1e-8;
      for (int i = 0; i < 60; ++i)
        ex.grid.push_back(0.01 * std::pow(5000.0, i / 59.0));
      break;
  }
  return ex;
}

// The retracted family and the two-dimensional level-set run change defaults
// that depend on other fields; resolve them here.
namespace {
Experiment resolve(const Experiment& in) {
  Experiment ex = in;
  if (ex.name == ExperimentName::ExtVanishing && !ex.crossing) {
    if (ex.grid.empty() ||
        ex.grid == experiment_defaults(ExperimentName::ExtVanishing).grid)
      ex.grid = {1.0, 2.0, 4.0};
    if (ex.tolerance == 0.0 || ex.tolerance == 0.5) ex.tolerance = 0.10;
    if (ex.s == 0.0) ex.s = 0.48;
  }
  if (ex.name == ExperimentName::LevelsetConv && ex.dim == 2 &&
      ex.grid == experiment_defaults(ExperimentName::LevelsetConv).grid)
    ex.grid = {0.2, 0.1, 0.05};
  if (ex.name == ExperimentName::MultiplierAsymptotics && !is_half(ex.s) &&
      ex.grid == experiment_defaults(ExperimentName::MultiplierAsymptotics).grid)
    ex.grid = {0.01, 0.02, 0.05, 0.1, 10.0, 20.0, 30.0, 40.0, 50.0};
  if (ex.s == 0.0) {
    const Experiment d = experiment_defaults(ex.name);
    ex.s = d.s != 0.0 ? d.s : 0.25;
  }
  if (ex.tolerance == 0.0) ex.tolerance = experiment_defaults(ex.name).tolerance;
  if (ex.grid.empty()) ex.grid = experiment_defaults(ex.name).grid;
  return ex;
}
}  // namespace

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

SweepReport run_experiment(const Experiment& experiment) {
  const Experiment ex = resolve(experiment);
  ex.validate();
  SweepReport r;
  r.name = ex.name;
  r.tolerance = ex.tolerance;
  r.target = kNaN;
  r.extrapolated = kNaN;
  r.richardson = kNaN;
  switch (ex.name) {
    case ExperimentName::PointwiseSLimit: run_pointwise(ex, r); break;
    case ExperimentName::GammaEpsLimit: run_gamma_eps(ex, r); break;
    case ExperimentName::ExtVanishing: run_ext_vanishing(ex, r); break;
    case ExperimentName::EnergyGrowth: run_energy_growth(ex, r); break;
    case ExperimentName::DensityEstimate: run_density(ex, r); break;
    case ExperimentName::LevelsetConv: run_levelset(ex, r); break;
    case ExperimentName::BbmLimit: run_bbm(ex, r); break;
    case ExperimentName::Abs1dLimit: run_abs1d(ex, r); break;
    case ExperimentName::MultiplierAsymptotics: run_multiplier(ex, r); break;
  }
  fill_summary(r);
  return r;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

LineFit fit_rate(const std::vector<SweepRow>& rows, FitKind kind) {
  if (rows.size() < 3)
    throw InvalidArgument("fit_rate needs at least three rows");
  std::vector<double> x, y;
  for (const SweepRow& row : rows) {
    const double xv = row.param, yv = row.value();
    if (kind == FitKind::LogLog) {
      if (!(xv > 0.0) || !(yv > 0.0))
        throw InvalidArgument("fit_rate: loglog requires positive data");
      x.push_back(std::log(xv));
      y.push_back(std::log(yv));
    } else {
      x.push_back(xv);
      y.push_back(yv);
    }
  }
  return fit_line(x, y);
}

// ---------------------------------------------------------------------------
// Profile constant for orders above 1/2
// ---------------------------------------------------------------------------

double profile_constant_s(double s) { return cell_profile(s).value; }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string report_csv(const SweepReport& report) {
  size_t width = 0;
  for (const SweepRow& row : report.rows)
    width = std::max(width, row.values.size());
  std::ostringstream os;
  os << "param";
  for (size_t j = 0; j < width; ++j) {
    if (j < report.value_names.size())
      os << "," << report.value_names[j];
    else
      os << ",value" << (j + 1);
  }
  os << ",reference,rel_error,ok,note\n";
  for (const SweepRow& row : report.rows) {
    os << fmt_full(row.param);
    for (size_t j = 0; j < width; ++j)
      os << "," << (j < row.values.size() ? fmt_full(row.values[j]) : "");
    os << "," << fmt_full(row.reference) << "," << fmt_full(row.rel_error)
       << "," << (row.ok ? 1 : 0) << "," << row.note << "\n";
  }
  return os.str();
}

void write_report_csv(const SweepReport& report, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(report_csv(report));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::string col;
    std::istringstream ls(line);
    while (std::getline(ls, col, ',')) cols.push_back(col);
    rows.push_back(cols);
  }
  write_csv(path, rows);
}

std::string verdict_line(const SweepReport& report) { return report.summary; }

}  // namespace nlphase
