#pragma once

// Every functional of the toolkit as an evaluator over a grid field or an
// analytic set: the local gradient/well energy, the rescaled nonlocal
// functionals in their three s-regimes, sharp capillarity energies (local and
// fractional), the raw unrescaled energy, boundary-penalized variants, the
// 1D absolute-kernel energy with its jump-counting limit, and the sharp
// line-tension functionals. Each evaluator reports a kinetic / potential /
// boundary breakdown whose parts sum to the total.

#include <string>
#include <vector>

#include "nlphase/kernels.hpp"
#include "nlphase/model.hpp"

namespace nlphase {

enum class EnergyTag {
  MM,               // eps |grad u|^2 + (1/eps) W(u)
  F_INT,            // regime-weighted interior kernel + half potential
  F_EXT,            // regime-weighted exterior kernel + half potential
  F_FULL,           // both kernels + single full-weight potential
  J_RAW,            // unrescaled: K_int + K_ext + integral of W
  CAPILLARY_LOCAL,  // perimeter in the box + sigma * boundary trace
  CAPILLARY_FRAC,   // interior s-perimeter + sigma * wetting mass
  J_EPS_S,          // K_int + sigma K_ext + eps^{-2s} potential
  BOUNDARY_MODICA,  // MM + lambda * boundary well on the trace
  ABS_1D,           // eps^{2s} K_int at exponent 1+2s + lambda potential
  PHI_LINE,         // sharp interface + trace mismatch + line tension
  G_SHARP           // sharp set version of PHI_LINE
};

std::string energy_tag_name(EnergyTag tag);

enum class WellKind { Quartic, ZeroOne };
DoubleWell make_well(WellKind kind);

// Penalty growth schedules lambda_eps with eps * log(lambda_eps) -> k.
enum class LambdaSchedule {
  ExpK,      // e^{k/eps}: eps log lambda = k exactly for every eps
  InvEpsLog  // eps^{-1} |log eps|^{-1} (k enters only through the limit)
};
double lambda_value(LambdaSchedule schedule, double eps, double k);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double boundary = 0.0;
  double total = 0.0;  // always kinetic + potential + boundary
};
EnergyBreakdown make_breakdown(double kinetic, double potential,
                               double boundary);

// Per-regime weights (kinetic, full potential). The potential weight is the
// coefficient of the single potential term of the full functional; each
// standalone interior / exterior part carries half of it.
struct RegimeWeights {
  double kinetic = 1.0;
  double potential_full = 1.0;
};
RegimeWeights regime_weights(double s, double eps);

// ---------------------------------------------------------------------------
// Parameter bundle used by the CLI, sweeps, and the minimizer.
// ---------------------------------------------------------------------------
struct EnergySpec {
  EnergyTag tag = EnergyTag::MM;
  double eps = 0.1;
  double s = 0.25;
  double sigma = 0.0;
  double k = 1.0;          // jump-penalty coefficient (ABS_1D, schedules)
  double c = 0.0;          // line-tension coefficient (PHI_LINE, G_SHARP)
  WellKind well = WellKind::Quartic;
  WellKind boundary_well = WellKind::Quartic;
  LambdaSchedule schedule = LambdaSchedule::ExpK;
  double margin = -1.0;    // nonlocal truncation margin; <0 selects default

  void validate() const;
};

// ---------------------------------------------------------------------------
// Field functionals
// ---------------------------------------------------------------------------

// Centered finite differences inside, one-sided at the boundary cells;
// potential by cell sums.
EnergyBreakdown modica_mortola(const ScalarField& u, double eps,
                               const DoubleWell& well = DoubleWell::quartic());

// Regime-weighted nonlocal functional; part selects interior / exterior /
// full as described for EnergyTag. eps must lie in (0,1).
EnergyBreakdown scaled_nonlocal(const ScalarField& u, double eps, double s,
                                KernelPart part,
                                const DoubleWell& well = DoubleWell::quartic(),
                                double margin = -1.0);

// Unrescaled K_int + K_ext + integral of W (growth studies).
EnergyBreakdown j_raw(const ScalarField& u, double s,
                      const DoubleWell& well = DoubleWell::quartic(),
                      double margin = -1.0);

// K_int + sigma K_ext + eps^{-2s} integral of W; s in (0,1/2).
EnergyBreakdown j_eps_s(const ScalarField& u, double eps, double s,
                        double sigma,
                        const DoubleWell& well = DoubleWell::quartic(),
                        double margin = -1.0);

// modica_mortola plus lambda * sum over boundary facets of V(trace).
EnergyBreakdown boundary_modica(const ScalarField& u, double eps,
                                const DoubleWell& V, double lambda,
                                const DoubleWell& well = DoubleWell::quartic());

// eps^{2s} * interior kernel at exponent 1+2s plus lambda_eps(ExpK, k) * W;
// the s = 1/2 endpoint (|x-y|^{-2}) is the default.
EnergyBreakdown abs_1d(const ScalarField& v, double eps, double k,
                       double s = 0.5,
                       const DoubleWell& well = DoubleWell::quartic());

// 8 k * (number of jumps) for an exactly +-1-valued 1D field.
double abs_1d_limit(const ScalarField& v, double k);

// ---------------------------------------------------------------------------
// Set functionals
// ---------------------------------------------------------------------------

enum class CapillaryKind { Local, Fractional };

// Local: perimeter inside the container + sigma * boundary-trace perimeter.
// Fractional (E must lie inside the box): interior s-perimeter +
// sigma * mass of E against the box complement. sigma in [-1,1].
double capillarity(const GeometricSet& E, const Domain& omega, double sigma,
                   CapillaryKind kind, double s = 0.25, double margin = -1.0);

// Jump measure of a +-1 field + sigma * trace-mismatch + c * trace jumps.
// u must be exactly +-1-valued on a 2D box; v holds one value per boundary
// cell in the order produced by boundary_trace and takes at most two
// distinct values.
double phi_line_tension(const ScalarField& u, const std::vector<double>& v,
                        double sigma, double c,
                        const DoubleWell& well = DoubleWell::quartic());

// Boundary-cell values in a fixed counter-clockwise loop: bottom row left to
// right, right column bottom to top, top row right to left, left column top
// to bottom (2 nx + 2 ny - 4 entries).
std::vector<double> boundary_trace(const ScalarField& u);

// Sharp-set line-tension energy: interior perimeter + sigma * boundary-trace
// perimeter + c * (number of transitions of the set indicator around the
// boundary loop). 2D boxes only.
double g_sharp(const GeometricSet& E, const Domain& omega, double sigma,
               double c);

// ---------------------------------------------------------------------------
// Dispatch and reporting
// ---------------------------------------------------------------------------

// Field-valued tags only; set-valued tags are rejected.
EnergyBreakdown evaluate_energy(const EnergySpec& spec, const ScalarField& u);

// CSV row "tag,eps,s,sigma,k,kinetic,potential,boundary,total" (with header
// row helper for writers).
std::vector<std::string> breakdown_csv_header();
std::vector<std::string> breakdown_csv_row(const EnergySpec& spec,
                                           const EnergyBreakdown& b);

// ---------------------------------------------------------------------------
// EnergyModel: kernels and exterior data prepared once for a fixed domain,
// exterior datum, and spec; repeated evaluation and analytic gradients for
// iterative minimization. Field-valued tags only.
// ---------------------------------------------------------------------------
class EnergyModel {
 public:
  EnergyModel(const EnergySpec& spec, const ScalarField& prototype);
  ~EnergyModel();
  EnergyModel(EnergyModel&&) noexcept;
  EnergyModel& operator=(EnergyModel&&) noexcept;
  EnergyModel(const EnergyModel&) = delete;
  EnergyModel& operator=(const EnergyModel&) = delete;

  const EnergySpec& spec() const;
  EnergyBreakdown breakdown(const ScalarField& u) const;
  double energy(const ScalarField& u) const;
  // g is assigned (resized and overwritten) with dE/du.
  void gradient(const ScalarField& u, std::vector<double>& g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nlphase
