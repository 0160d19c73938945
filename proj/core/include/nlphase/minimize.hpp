#pragma once

// Constrained first-order minimization of any field functional over grid
// fields with fixed exterior data: analytic gradients, projected descent
// with backtracking line search, and transition-profile (recovery) fields.

#include <string>
#include <vector>

#include "nlphase/energy.hpp"

namespace nlphase {

enum class SeedKind { Voxelized, Linear, Constant };

struct MinimizeOptions {
  int max_iters = 20000;
  double grad_tol = 1e-8;       // stop when the gradient 2-norm falls below
  double rel_drop_tol = 1e-10;  // ... or the relative decrease per window does
  int stall_window = 10;
  double step0 = 1.0;           // initial trial step
  double step_grow = 1.3;       // growth factor after an accepted step
  double step_min = 1e-14;      // below this the line search reports failure
  bool bb_step = true;          // curvature-scaled trial step (safeguarded)
  bool antisym_perturb = false; // deterministic odd-in-x1 kick, amplitude 1e-3
  std::vector<long> frozen;     // flat cell indices pinned to their u0 values
  double lo_bound = -1.0;       // projection box
  double hi_bound = 1.0;

  void validate() const;
};

struct IterRow {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct MinimizeResult {
  ScalarField u;
  std::vector<IterRow> trace;  // energy column is nonincreasing
  bool converged = false;
  bool line_search_failed = false;
  double final_energy = 0.0;
};

// Exact gradient of the discrete energy as implemented, returned as a field
// of the same shape. Set-valued tags are rejected.
ScalarField energy_gradient(const EnergySpec& spec, const ScalarField& u);

// Projected gradient descent within [lo_bound, hi_bound]; the exterior
// datum and all frozen cells are never modified.
MinimizeResult minimize_energy(const EnergySpec& spec, const ScalarField& u0,
                               const MinimizeOptions& opt = {});

// Transition-profile field u(x) = profile(signed_distance(x, E) / eps);
// exterior datum is the set itself.
ScalarField recovery_sequence(const GeometricSet& E, double eps,
                              const DoubleWell& well, const Domain& domain);

// Seed fields for minimization runs: the voxelized set, a linear ramp along
// the first axis between the well zeros, or a constant. All carry E as the
// exterior datum.
ScalarField make_seed(SeedKind kind, const GeometricSet& E, const Domain& dom,
                      double constant_value = 0.0);

// CSV: iter, energy, grad_norm, step.
void write_trace_csv(const std::vector<IterRow>& trace,
                     const std::string& path);

}  // namespace nlphase
