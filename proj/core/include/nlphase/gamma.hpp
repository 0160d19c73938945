#pragma once

// Experiment harness: named parameter sweeps probing the limiting behavior of
// the energies and perimeters, with limit extrapolation, rate fitting, and
// deterministic report assembly.

#include <string>
#include <vector>

#include "nlphase/kernels.hpp"
#include "nlphase/util.hpp"

namespace nlphase {

enum class ExperimentName {
  PointwiseSLimit,        // rescaled perimeter parts against their s-limits
  GammaEpsLimit,          // minimized vs recovery energies across an eps sweep
  ExtVanishing,           // boundary-crossing vs retracted exterior families
  EnergyGrowth,           // growth exponent of the unrescaled energy in R
  DensityEstimate,        // phase-volume floor around an established point
  LevelsetConv,           // level-set localization of minimizers
  BbmLimit,               // rescaled L1 difference-quotient seminorm rows
  Abs1dLimit,             // minimized jump energies under the exp schedule
  MultiplierAsymptotics,  // dispersion-multiplier closed form and asymptotics
};

// Canonical ALL_CAPS name used in reports, CSV files, and the CLI.
std::string experiment_name(ExperimentName name);
ExperimentName parse_experiment(const std::string& text);

enum class Verdict { Pass, Fail, Inconclusive };
std::string verdict_name(Verdict v);

struct SweepRow {
  double param = 0.0;             // sweep parameter (s, eps, R, xi, or cells)
  std::vector<double> values;     // measured values; values[0] is primary
  double reference = 0.0;         // row-level reference (NaN when none)
  double rel_error = 0.0;         // |values[0]-reference|/|reference|
  bool ok = true;                 // row-level evaluation succeeded and checks hold
  std::string note;               // short machine-friendly tag

  double value() const { return values.empty() ? 0.0 : values.front(); }
};

struct SweepReport {
  ExperimentName name = ExperimentName::BbmLimit;
  std::vector<std::string> value_names;  // CSV column names for row values
  std::vector<SweepRow> rows;     // ordered by parameter value, ascending
  LineFit rate{};                 // fitted approach/growth rate
  bool has_rate = false;
  double extrapolated = 0.0;      // affine limit from the two finest points
  double richardson = 0.0;        // three-point cross-check of the same limit
  bool extrapolation_disagrees = false;
  double target = 0.0;            // limit value the verdict compares against
  double tolerance = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string summary;            // one-line human-readable verdict
};

// Deterministic CSV: a header row, then one line per sweep row with every
// numeric field printed via fmt_full. Identical reports serialize bitwise
// identically.
std::string report_csv(const SweepReport& report);
void write_report_csv(const SweepReport& report, const std::string& path);

// The single verdict line: "<NAME> <VERDICT> <key figures>".
std::string verdict_line(const SweepReport& report);

struct Experiment {
  ExperimentName name = ExperimentName::BbmLimit;
  std::vector<double> grid;   // sweep values; strictly monotone; empty -> default
  double tolerance = 0.0;     // 0 -> per-experiment default
  double s = 0.0;             // fixed kernel order for eps/R sweeps; 0 -> default
  int dim = 1;                // container dimension where the experiment supports 2
  KernelPart part = KernelPart::Interior;  // perimeter part for s-sweeps
  int cells = 0;              // grid resolution override; 0 -> default
  double target = 0.0;        // NaN-able override; 0 -> derived internally
  bool crossing = true;       // ExtVanishing: crossing family vs retracted family
  double k = 1.0;             // Abs1dLimit: jump-constant multiplier (limit 8k)

  void validate() const;      // grid strictly monotone, tolerance > 0 after fill
};

// Fill unset fields (empty grid, zero tolerance/s/cells) with the
// experiment's documented defaults and validate the result.
Experiment experiment_defaults(ExperimentName name);

// Run the sweep: evaluate every grid point, extrapolate the limit (affine in
// the small parameter over the two finest points, cross-checked by
// three-point Richardson), fit a rate when three or more rows exist, compare
// to the target, and emit the verdict. A failed grid point flags its row and
// makes the verdict Inconclusive. Identical inputs produce bitwise-identical
// reports.
SweepReport run_experiment(const Experiment& experiment);

enum class FitKind { LogLog, Linear };

// Least-squares rate fit over (param, values[0]) rows. LogLog fits
// log y = slope * log x + intercept and requires positive x and y.
LineFit fit_rate(const std::vector<SweepRow>& rows, FitKind kind);

// Transition-profile energy constant for orders s > 1/2: the minimized
// unrescaled one-dimensional energy of a single transition on a long
// truncated line with matching far-field data, plus the closed-form
// cross-tail correction for the truncation. Self-consistent derived
// reference; cached per order within a process.
double profile_constant_s(double s);

}  // namespace nlphase
