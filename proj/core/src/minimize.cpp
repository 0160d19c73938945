#include "nlphase/minimize.hpp"

#include <algorithm>
#include <cmath>

namespace nlphase {

namespace {

double l2_norm(const std::vector<double>& g) {
  double acc = 0.0;
  for (double t : g) acc += t * t;
  return std::sqrt(acc);
}

void clamp_field(std::vector<double>& v, double lo, double hi) {
  for (double& t : v) t = std::min(hi, std::max(lo, t));
}

}  // namespace

void MinimizeOptions::validate() const {
  if (max_iters < 1)
    throw InvalidArgument("minimize: max_iters must be at least 1");
  if (!(grad_tol > 0.0))
    throw InvalidArgument("minimize: grad_tol must be positive");
  if (!(rel_drop_tol >= 0.0))
    throw InvalidArgument("minimize: rel_drop_tol must be nonnegative");
  if (stall_window < 1)
    throw InvalidArgument("minimize: stall_window must be at least 1");
  if (!(step0 > 0.0) || !(step_grow >= 1.0) || !(step_min > 0.0))
    throw InvalidArgument("minimize: step parameters must be positive");
  if (!(lo_bound < hi_bound))
    throw InvalidArgument("minimize: projection box must be nonempty");
}

ScalarField energy_gradient(const EnergySpec& spec, const ScalarField& u) {
  EnergyModel model(spec, u);
  ScalarField g = u;
  model.gradient(u, g.v);
  return g;
}

MinimizeResult minimize_energy(const EnergySpec& spec, const ScalarField& u0,
                               const MinimizeOptions& opt) {
  opt.validate();
  for (double t : u0.v)
    if (t < opt.lo_bound - 1e-12 || t > opt.hi_bound + 1e-12)
      throw InvalidArgument("minimize: u0 must lie within the projection box");
  for (long idx : opt.frozen)
    if (idx < 0 || idx >= static_cast<long>(u0.v.size()))
      throw InvalidArgument("minimize: frozen index out of range");

  EnergyModel model(spec, u0);
  MinimizeResult res;
  res.u = u0;
  std::vector<double>& u = res.u.v;

  if (opt.antisym_perturb) {
    const Domain& d = u0.dom;
    const double cx = 0.5 * (d.lo[0] + d.hi[0]);
    const double half = 0.5 * (d.hi[0] - d.lo[0]);
    const int nx = d.cells[0];
    for (size_t m = 0; m < u.size(); ++m) {
      const int i = static_cast<int>(m % static_cast<size_t>(nx));
      u[m] += 1e-3 * (d.center(0, i) - cx) / half;
    }
    clamp_field(u, opt.lo_bound, opt.hi_bound);
    for (long idx : opt.frozen) u[static_cast<size_t>(idx)] = u0.v[static_cast<size_t>(idx)];
  }

  std::vector<double> g, g_prev, u_prev, trial(u.size());
  double energy = model.energy(res.u);
  double step = opt.step0;
  ScalarField work = res.u;  // reusable field for trial evaluations

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    model.gradient(res.u, g);
    for (long idx : opt.frozen) g[static_cast<size_t>(idx)] = 0.0;
    const double gn = l2_norm(g);
    res.trace.push_back({iter, energy, gn, step});
    if (gn <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    if (static_cast<int>(res.trace.size()) > opt.stall_window) {
      const double before =
          res.trace[res.trace.size() - 1 - static_cast<size_t>(opt.stall_window)]
              .energy;
      const double drop = before - energy;
      if (drop <= opt.rel_drop_tol * std::max(1.0, std::abs(before))) {
        res.converged = true;
        break;
      }
    }

    // Trial step: curvature-scaled when requested and available, otherwise
    // grow the last accepted step.
    double trial_step = std::min(step * opt.step_grow, 1e6);
    if (opt.bb_step && !u_prev.empty()) {
      double sy = 0.0, ss = 0.0;
      for (size_t m = 0; m < u.size(); ++m) {
        const double du = u[m] - u_prev[m];
        const double dg = g[m] - g_prev[m];
        sy += du * dg;
        ss += du * du;
      }
      if (sy > 0.0 && ss > 0.0) {
        const double bb = ss / sy;
        if (std::isfinite(bb)) trial_step = std::min(std::max(bb, opt.step_min), 1e6);
      }
    }

    // Backtracking: accept on sufficient decrease of the projected step.
    bool accepted = false;
    double e_try = energy;
    while (trial_step >= opt.step_min) {
      for (size_t m = 0; m < u.size(); ++m)
        trial[m] = std::min(opt.hi_bound,
                            std::max(opt.lo_bound, u[m] - trial_step * g[m]));
      for (long idx : opt.frozen)
        trial[static_cast<size_t>(idx)] = u[static_cast<size_t>(idx)];
      work.v = trial;
      e_try = model.energy(work);
      double move2 = 0.0;
      for (size_t m = 0; m < u.size(); ++m) {
        const double d = trial[m] - u[m];
        move2 += d * d;
      }
      if (move2 == 0.0) break;  // projection left nothing to move
      if (e_try <= energy - 1e-4 * move2 / trial_step) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) {
      if (trial_step < opt.step_min)
        res.line_search_failed = true;  // no decrease at the minimal step
      else
        res.converged = true;  // projection allows no move: stationary
      break;
    }
    u_prev = u;
    g_prev = g;
    u = trial;
    energy = e_try;
    step = trial_step;
  }
  if (res.trace.empty() || res.trace.back().energy != energy)
    res.trace.push_back({static_cast<int>(res.trace.size()), energy,
                         res.trace.empty() ? 0.0 : res.trace.back().grad_norm,
                         step});
  res.final_energy = energy;
  return res;
}

ScalarField recovery_sequence(const GeometricSet& E, double eps,
                              const DoubleWell& well, const Domain& domain) {
  domain.validate();
  if (!(eps > 0.0))
    throw InvalidArgument("recovery_sequence: eps must be positive");
  OptimalProfile prof(well);
  ScalarField u;
  u.dom = domain;
  u.range = (well.zero1() == 0.0 && well.zero2() == 1.0)
                ? ValueRange::ZeroOne
                : ValueRange::PlusMinusOne;
  u.exterior_set = E;
  u.v.resize(static_cast<size_t>(domain.num_cells()));
  const int nx = domain.cells[0];
  const int ny = domain.dim >= 2 ? domain.cells[1] : 1;
  const int nz = domain.dim >= 3 ? domain.cells[2] : 1;
  size_t m = 0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Vec3 x{domain.center(0, i), 0, 0};
        if (domain.dim >= 2) x[1] = domain.center(1, j);
        if (domain.dim >= 3) x[2] = domain.center(2, k);
        const double sd = E.signed_distance(x, domain.dim);
        u.v[m++] = prof(sd / eps);
      }
    }
  }
  return u;
}

ScalarField make_seed(SeedKind kind, const GeometricSet& E, const Domain& dom,
                      double constant_value) {
  switch (kind) {
    case SeedKind::Voxelized:
      return voxelize(E, dom);
    case SeedKind::Linear: {
      ScalarField u = ScalarField::constant(dom, 0.0);
      u.exterior_set = E;
      const int nx = dom.cells[0];
      const double cx = 0.5 * (dom.lo[0] + dom.hi[0]);
      const double half = 0.5 * (dom.hi[0] - dom.lo[0]);
      for (size_t m = 0; m < u.v.size(); ++m) {
        const int i = static_cast<int>(m % static_cast<size_t>(nx));
        u.v[m] = (dom.center(0, i) - cx) / half;
      }
      return u;
    }
    case SeedKind::Constant: {
      ScalarField u = ScalarField::constant(dom, constant_value);
      u.exterior_set = E;
      return u;
    }
  }
  throw InvalidArgument("make_seed: unknown seed kind");
}

void write_trace_csv(const std::vector<IterRow>& trace,
                     const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"iter", "energy", "grad_norm", "step"});
  for (const IterRow& r : trace)
    rows.push_back({std::to_string(r.iter), fmt_full(r.energy),
                    fmt_full(r.grad_norm), fmt_full(r.step)});
  write_csv(path, rows);
}

}  // namespace nlphase
