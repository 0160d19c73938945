// Command-line driver. Every subcommand resolves its parameters from three
// layers (built-in defaults, then an optional config file, then explicit
// flags — flags win), writes the fully-resolved configuration plus CSV
// outputs and a JSON summary into the output directory, and exits 0 on
// success or a passing experiment, 1 on a failing experiment or
// non-converged run, 2 on usage or configuration errors (naming the
// offending key). Re-running a command from its own effective config file
// reproduces the outputs byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlphase/energy.hpp"
#include "nlphase/gamma.hpp"
#include "nlphase/geometry.hpp"
#include "nlphase/kernels.hpp"
#include "nlphase/minimize.hpp"
#include "nlphase/model.hpp"
#include "nlphase/spectral.hpp"
#include "nlphase/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nlphase;

namespace {

// Thrown for every problem that must terminate with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parameter resolution: defaults -> config file section -> explicit flags.
// Values are carried as strings until a typed accessor parses them, so the
// effective config can be serialized exactly as resolved.
// ---------------------------------------------------------------------------

struct ParamDecl {
  std::string key;       // config key ('-' of the flag spelled '_')
  std::string value;     // resolved value (starts at the default)
  CLI::Option* option = nullptr;
};

class Params {
 public:
  Params(CLI::App* cmd, std::string section) : cmd_(cmd), section_(std::move(section)) {}

  void declare(const std::string& flag, const std::string& def,
               const std::string& help) {
    decls_.push_back({flag_to_key(flag), def, nullptr});
    ParamDecl& d = decls_.back();
    d.option = cmd_->add_option("--" + flag, d.value, help + " [" + def + "]");
  }

  const std::string& section() const { return section_; }

  // Applies the config file (if any), keeping explicitly-passed flags.
  void resolve(const std::optional<Config>& cfg) {
    if (!cfg) return;
    std::set<std::string> known;
    for (const ParamDecl& d : decls_) known.insert(d.key);
    const std::vector<std::string> secs = cfg->sections();
    if (std::find(secs.begin(), secs.end(), section_) == secs.end()) return;
    for (const auto& [key, value] : cfg->section(section_)) {
      if (!known.count(key))
        throw UsageError("unknown key '" + section_ + "." + key + "'");
      for (ParamDecl& d : decls_)
        if (d.key == key && d.option->count() == 0) d.value = value;
    }
  }

  bool has(const std::string& key) const {
    for (const ParamDecl& d : decls_)
      if (d.key == key) return true;
    return false;
  }

  const std::string& str(const std::string& key) const {
    for (const ParamDecl& d : decls_)
      if (d.key == key) return d.value;
    throw std::logic_error("undeclared parameter " + key);
  }

  double num(const std::string& key) const {
    const std::string& v = str(key);
    try {
      size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("key '" + section_ + "." + key + "' expects a number, got '" + v + "'");
  }

  int integer(const std::string& key) const {
    const double x = num(key);
    if (x != std::floor(x))
      throw UsageError("key '" + section_ + "." + key + "' expects an integer, got '" + str(key) + "'");
    return static_cast<int>(x);
  }

  bool flag01(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "0" || v == "false") return false;
    if (v == "1" || v == "true") return true;
    throw UsageError("key '" + section_ + "." + key + "' expects 0 or 1, got '" + v + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const std::string& v = str(key);
    if (v.empty()) return out;
    size_t start = 0;
    while (start <= v.size()) {
      const size_t comma = v.find(',', start);
      const std::string piece =
          v.substr(start, comma == std::string::npos ? comma : comma - start);
      try {
        size_t pos = 0;
        out.push_back(std::stod(piece, &pos));
        if (pos != piece.size()) throw std::invalid_argument(piece);
      } catch (const std::exception&) {
        throw UsageError("key '" + section_ + "." + key +
                         "' expects comma-separated numbers, got '" + v + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  // Section contents for the effective config.
  void store(Config& cfg) const {
    for (const ParamDecl& d : decls_) cfg.set(section_, d.key, d.value);
  }

 private:
  static std::string flag_to_key(std::string flag) {
    std::replace(flag.begin(), flag.end(), '-', '_');
    return flag;
  }

  CLI::App* cmd_;
  std::string section_;
  std::deque<ParamDecl> decls_;  // stable addresses for CLI11 bindings
};

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value) {
  throw UsageError("key '" + section + "." + key + "' has unsupported value '" + value + "'");
}

// ---------------------------------------------------------------------------
// Geometry grammar shared by perimeter / energy / minimize:
//   omega:  box:a,b | box2:ax,bx,ay,by | ball2:cx,cy,r
//   set:    halfspace | halfspace:offset | box:a,b | box2:ax,bx,ay,by
//           | ball:c,r | ball2:cx,cy,r
// ---------------------------------------------------------------------------

std::pair<std::string, std::vector<double>> split_spec(const std::string& text) {
  const size_t colon = text.find(':');
  std::pair<std::string, std::vector<double>> out;
  out.first = text.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::string rest = text.substr(colon + 1);
  size_t start = 0;
  while (start <= rest.size()) {
    const size_t comma = rest.find(',', start);
    const std::string piece =
        rest.substr(start, comma == std::string::npos ? comma : comma - start);
    size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(piece, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != piece.size()) return {"", {}};
    out.second.push_back(x);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Domain parse_omega(const Params& p, const std::string& key, int cells) {
  const std::string& text = p.str(key);
  const auto [head, a] = split_spec(text);
  if (cells <= 0)
    throw UsageError("key '" + p.section() + ".cells' must be positive");
  if (head == "box" && a.size() == 2) return Domain::interval(a[0], a[1], cells);
  if (head == "box2" && a.size() == 4)
    return Domain::box2(a[0], a[1], cells, a[2], a[3], cells);
  if (head == "ball2" && a.size() == 3)
    return Domain::ball({a[0], a[1], 0.0}, a[2], 2, cells);
  bad_value(p.section(), key, text);
}

GeometricSet parse_set(const Params& p, const std::string& key, int dim) {
  const std::string& text = p.str(key);
  const auto [head, a] = split_spec(text);
  if (head == "halfspace" && a.empty())
    return GeometricSet::half_space({1.0, 0.0, 0.0}, 0.0);
  if (head == "halfspace" && a.size() == 1)
    return GeometricSet::half_space({1.0, 0.0, 0.0}, a[0]);
  if (head == "box" && a.size() == 2 && dim == 1)
    return GeometricSet::box({a[0], 0.0, 0.0}, {a[1], 0.0, 0.0}, 1);
  if (head == "box2" && a.size() == 4 && dim == 2)
    return GeometricSet::box({a[0], a[2], 0.0}, {a[1], a[3], 0.0}, 2);
  if (head == "ball" && a.size() == 2 && dim == 1)
    return GeometricSet::ball({a[0], 0.0, 0.0}, a[1]);
  if (head == "ball2" && a.size() == 3 && dim == 2)
    return GeometricSet::ball({a[0], a[1], 0.0}, a[2]);
  bad_value(p.section(), key, text);
}

KernelPart parse_part(const Params& p, const std::string& key) {
  const std::string& v = p.str(key);
  if (v == "interior") return KernelPart::Interior;
  if (v == "exterior") return KernelPart::Exterior;
  if (v == "full") return KernelPart::Full;
  bad_value(p.section(), key, v);
}

EnergyTag parse_tag(const Params& p, const std::string& key) {
  const std::string& v = p.str(key);
  for (EnergyTag tag : {EnergyTag::MM, EnergyTag::F_INT, EnergyTag::F_EXT,
                        EnergyTag::F_FULL, EnergyTag::J_RAW, EnergyTag::J_EPS_S,
                        EnergyTag::BOUNDARY_MODICA, EnergyTag::ABS_1D})
    if (v == energy_tag_name(tag)) return tag;
  bad_value(p.section(), key, v);
}

WellKind parse_well(const Params& p, const std::string& key) {
  const std::string& v = p.str(key);
  if (v == "quartic") return WellKind::Quartic;
  if (v == "zero_one") return WellKind::ZeroOne;
  bad_value(p.section(), key, v);
}

LambdaSchedule parse_schedule(const Params& p, const std::string& key) {
  const std::string& v = p.str(key);
  if (v == "expk") return LambdaSchedule::ExpK;
  if (v == "inv_eps_log") return LambdaSchedule::InvEpsLog;
  bad_value(p.section(), key, v);
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct OutputDir {
  fs::path path;
  std::vector<std::string> files;

  std::string file(const std::string& name) {
    files.push_back(name);
    return (path / name).string();
  }
};

void write_summary(OutputDir& out, json& j) {
  j["outputs"] = out.files;
  std::ofstream os(out.path / "summary.json", std::ios::binary);
  if (!os) throw UsageError("output directory '" + out.path.string() + "' is not writable");
  os << j.dump(2) << "\n";
}

void write_effective_config(const Config& cfg, OutputDir& out) {
  out.files.push_back("effective_config.cfg");
  cfg.save((out.path / "effective_config.cfg").string());
}

json breakdown_json(const EnergyBreakdown& b) {
  return json{{"kinetic", b.kinetic},
              {"potential", b.potential},
              {"boundary", b.boundary},
              {"total", b.total}};
}

// Shared declarations for the commands that build a field over a geometry.
void declare_field_params(Params& p, bool with_field_source) {
  p.declare("tag", "mm", "energy functional tag");
  p.declare("eps", "0.1", "transition-width parameter");
  p.declare("s", "0.25", "kernel order");
  p.declare("sigma", "0", "boundary-coupling coefficient");
  p.declare("k", "1", "jump-penalty coefficient");
  p.declare("c", "0", "line-tension coefficient");
  p.declare("well", "quartic", "double well: quartic | zero_one");
  p.declare("boundary-well", "quartic", "boundary well: quartic | zero_one");
  p.declare("schedule", "expk", "penalty schedule: expk | inv_eps_log");
  p.declare("margin", "-1", "kernel truncation margin; -1 selects the default");
  p.declare("set", "halfspace", "phase set (exterior datum)");
  p.declare("omega", "box:-1,1", "container: box:a,b | box2:ax,bx,ay,by | ball2:cx,cy,r");
  p.declare("cells", "256", "grid cells per axis");
  if (with_field_source) {
    p.declare("field", "voxel", "field source: voxel | recovery | constant | file");
    p.declare("field-const", "0", "value used by field=constant");
    p.declare("field-path", "", "field file used by field=file");
  }
}

EnergySpec build_energy_spec(const Params& p) {
  EnergySpec spec;
  spec.tag = parse_tag(p, "tag");
  spec.eps = p.num("eps");
  spec.s = p.num("s");
  spec.sigma = p.num("sigma");
  spec.k = p.num("k");
  spec.c = p.num("c");
  spec.well = parse_well(p, "well");
  spec.boundary_well = parse_well(p, "boundary_well");
  spec.schedule = parse_schedule(p, "schedule");
  spec.margin = p.num("margin");
  spec.validate();
  return spec;
}

ScalarField build_field(const Params& p, const EnergySpec& spec) {
  const int cells = p.integer("cells");
  const Domain omega = parse_omega(p, "omega", cells);
  const GeometricSet E = parse_set(p, "set", omega.dim);
  const std::string& source = p.str("field");
  if (source == "voxel") return make_seed(SeedKind::Voxelized, E, omega);
  if (source == "recovery")
    return recovery_sequence(E, spec.eps, make_well(spec.well), omega);
  if (source == "constant")
    return make_seed(SeedKind::Constant, E, omega, p.num("field_const"));
  if (source == "file") {
    const std::string& path = p.str("field_path");
    if (path.empty())
      throw UsageError("key '" + p.section() + ".field_path' is required for field=file");
    return read_field(path);
  }
  bad_value(p.section(), "field", source);
}

// ---------------------------------------------------------------------------
// Command handlers (return the process exit code)
// ---------------------------------------------------------------------------

int run_perimeter(const Params& p, OutputDir& out, json& summary) {
  const int cells = p.integer("cells");
  const Domain omega = parse_omega(p, "omega", cells);
  const GeometricSet E = parse_set(p, "set", omega.dim);
  const std::string& family = p.str("family");
  double value = 0.0;
  if (family == "fractional") {
    value = frac_perimeter(E, omega, p.num("s"), parse_part(p, "part"), p.num("margin"));
  } else if (family == "classical") {
    const std::string& part = p.str("part");
    PerimeterWhere where = PerimeterWhere::Interior;
    if (part == "interior")
      where = PerimeterWhere::Interior;
    else if (part == "boundary")
      where = PerimeterWhere::Boundary;
    else
      bad_value(p.section(), "part", part);
    value = classical_perimeter(E, omega, where);
  } else {
    bad_value(p.section(), "family", family);
  }
  write_csv(out.file("perimeter.csv"),
            {{"family", "set", "omega", "cells", "s", "part", "margin", "value"},
             {family, p.str("set"), p.str("omega"), p.str("cells"), p.str("s"),
              p.str("part"), p.str("margin"), fmt_full(value)}});
  std::cout << "perimeter = " << fmt_full(value) << "\n";
  summary["value"] = value;
  return 0;
}

int run_energy_cmd(const Params& p, OutputDir& out, json& summary) {
  const EnergySpec spec = build_energy_spec(p);
  const ScalarField u = build_field(p, spec);
  const EnergyBreakdown b = evaluate_energy(spec, u);
  write_csv(out.file("energy.csv"),
            {breakdown_csv_header(), breakdown_csv_row(spec, b)});
  std::cout << "total = " << fmt_full(b.total) << "\n";
  summary["energy"] = breakdown_json(b);
  return 0;
}

int run_minimize_cmd(const Params& p, OutputDir& out, json& summary) {
  const EnergySpec spec = build_energy_spec(p);
  const int cells = p.integer("cells");
  const Domain omega = parse_omega(p, "omega", cells);
  const GeometricSet E = parse_set(p, "set", omega.dim);
  const std::string& seed_kind = p.str("seed");
  ScalarField seed;
  if (seed_kind == "voxel")
    seed = make_seed(SeedKind::Voxelized, E, omega);
  else if (seed_kind == "linear")
    seed = make_seed(SeedKind::Linear, E, omega);
  else if (seed_kind == "constant")
    seed = make_seed(SeedKind::Constant, E, omega, p.num("seed_const"));
  else if (seed_kind == "recovery")
    seed = recovery_sequence(E, spec.eps, make_well(spec.well), omega);
  else
    bad_value(p.section(), "seed", seed_kind);

  MinimizeOptions opt;
  opt.max_iters = p.integer("max_iters");
  opt.grad_tol = p.num("grad_tol");
  opt.validate();
  const MinimizeResult res = minimize_energy(spec, seed, opt);
  const EnergyBreakdown b = evaluate_energy(spec, res.u);

  if (p.flag01("save_trace")) write_trace_csv(res.trace, out.file("trace.csv"));
  if (p.flag01("save_field")) write_field(res.u, out.file("field.bin"));
  write_csv(out.file("energy.csv"),
            {breakdown_csv_header(), breakdown_csv_row(spec, b)});
  const bool ok = res.converged && !res.line_search_failed;
  std::cout << "final energy = " << fmt_full(res.final_energy)
            << (ok ? "  (converged)" : "  (NOT converged)") << "\n";
  summary["energy"] = breakdown_json(b);
  summary["final_energy"] = res.final_energy;
  summary["converged"] = ok;
  summary["iterations"] = res.trace.empty() ? 0 : res.trace.back().iter;
  return ok ? 0 : 1;
}

int run_sweep_cmd(const Params& p, OutputDir& out, json& summary) {
  Experiment ex;
  try {
    ex.name = parse_experiment(p.str("experiment"));
  } catch (const InvalidArgument&) {
    bad_value(p.section(), "experiment", p.str("experiment"));
  }
  ex.grid = p.numbers("grid");
  ex.tolerance = p.num("tolerance");
  ex.s = p.num("s");
  ex.dim = p.integer("dim");
  ex.part = parse_part(p, "part");
  ex.cells = p.integer("cells");
  ex.target = p.num("target");
  ex.crossing = p.flag01("crossing");
  ex.k = p.num("k");

  const SweepReport report = run_experiment(ex);
  write_report_csv(report, out.file(experiment_name(report.name) + ".csv"));
  std::cout << verdict_line(report) << "\n";
  summary["experiment"] = experiment_name(report.name);
  summary["verdict"] = verdict_name(report.verdict);
  summary["extrapolated"] = report.extrapolated;
  summary["target"] = report.target;
  summary["tolerance"] = report.tolerance;
  summary["rows"] = report.rows.size();
  return report.verdict == Verdict::Pass ? 0 : 1;
}

int run_multiplier_cmd(const Params& p, OutputDir& out, json& summary) {
  const double s = p.num("s");
  const double xi_min = p.num("xi_min");
  const double xi_max = p.num("xi_max");
  const int count = p.integer("count");
  if (count < 1) throw UsageError("key '" + p.section() + ".count' must be >= 1");
  if (!(xi_max > xi_min) || xi_min < 0.0)
    throw UsageError("key '" + p.section() + ".xi_max' must exceed xi_min >= 0");
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"s", "xi", "S"});
  for (int i = 0; i <= count; ++i) {
    const double xi = xi_min + (xi_max - xi_min) * i / count;
    rows.push_back({fmt_full(s), fmt_full(xi), fmt_full(multiplier_S(s, xi))});
  }
  write_csv(out.file("multiplier.csv"), rows);
  std::cout << "wrote multiplier.csv (" << count + 1 << " rows)\n";
  summary["rows"] = count + 1;
  return 0;
}

int run_report_cmd(const Params& p, OutputDir& out, json& summary) {
  std::vector<std::string> names;
  {
    const std::string& list = p.str("experiments");
    if (list.empty()) {
      for (ExperimentName n :
           {ExperimentName::PointwiseSLimit, ExperimentName::GammaEpsLimit,
            ExperimentName::ExtVanishing, ExperimentName::EnergyGrowth,
            ExperimentName::DensityEstimate, ExperimentName::LevelsetConv,
            ExperimentName::BbmLimit, ExperimentName::Abs1dLimit,
            ExperimentName::MultiplierAsymptotics})
        names.push_back(experiment_name(n));
    } else {
      size_t start = 0;
      while (start <= list.size()) {
        const size_t comma = list.find(',', start);
        names.push_back(list.substr(
            start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
  }
  bool all_pass = true;
  json items = json::array();
  for (const std::string& name : names) {
    Experiment ex;
    try {
      ex = experiment_defaults(parse_experiment(name));
    } catch (const InvalidArgument&) {
      bad_value(p.section(), "experiments", name);
    }
    const SweepReport report = run_experiment(ex);
    write_report_csv(report, out.file(experiment_name(report.name) + ".csv"));
    std::cout << verdict_line(report) << "\n";
    items.push_back(json{{"experiment", experiment_name(report.name)},
                         {"verdict", verdict_name(report.verdict)},
                         {"extrapolated", report.extrapolated},
                         {"target", report.target},
                         {"tolerance", report.tolerance}});
    all_pass = all_pass && report.verdict == Verdict::Pass;
  }
  summary["experiments"] = items;
  summary["all_pass"] = all_pass;
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App app{"nonlocal phase-transition toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "config file applied under explicit flags");

  struct Common {
    std::string out = ".";
    std::string threads = "1";
    std::string cache_dir;
    CLI::Option* out_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* cache_opt = nullptr;
  } run;
  run.out_opt = app.add_option("--out", run.out, "output directory [.]");
  run.threads_opt = app.add_option("--threads", run.threads, "worker threads [1]");
  run.cache_opt = app.add_option("--cache-dir", run.cache_dir,
                                 "pair-weight cache directory (also NLPHASE_CACHE_DIR)");

  CLI::App* perimeter = app.add_subcommand("perimeter", "sharp-set perimeter value");
  perimeter->fallthrough();
  Params pp(perimeter, "perimeter");
  pp.declare("family", "fractional", "fractional | classical");
  pp.declare("set", "halfspace", "measured set");
  pp.declare("omega", "box:-1,1", "container: box:a,b | box2:ax,bx,ay,by | ball2:cx,cy,r");
  pp.declare("cells", "256", "grid cells per axis");
  pp.declare("s", "0.25", "kernel order (fractional family)");
  pp.declare("part", "interior", "interior | exterior | full (classical: interior | boundary)");
  pp.declare("margin", "-1", "kernel truncation margin; -1 selects the default");

  CLI::App* energy = app.add_subcommand("energy", "evaluate one functional on one field");
  energy->fallthrough();
  Params pe(energy, "energy");
  declare_field_params(pe, /*with_field_source=*/true);

  CLI::App* minimize = app.add_subcommand("minimize", "projected descent on one functional");
  minimize->fallthrough();
  Params pm(minimize, "minimize");
  declare_field_params(pm, /*with_field_source=*/false);
  pm.declare("seed", "voxel", "start field: voxel | linear | constant | recovery");
  pm.declare("seed-const", "0", "value used by seed=constant");
  pm.declare("max-iters", "20000", "iteration budget");
  pm.declare("grad-tol", "1e-8", "gradient-norm stopping tolerance");
  pm.declare("save-field", "1", "write the minimizer to field.bin");
  pm.declare("save-trace", "1", "write the iteration trace to trace.csv");

  CLI::App* sweep = app.add_subcommand("sweep", "run one named limit experiment");
  sweep->fallthrough();
  Params ps(sweep, "sweep");
  ps.declare("experiment", "BBM_LIMIT", "experiment name (ALL_CAPS)");
  ps.declare("grid", "", "sweep values, comma separated; empty selects the default");
  ps.declare("tolerance", "0", "verdict tolerance; 0 selects the default");
  ps.declare("s", "0", "fixed kernel order; 0 selects the default");
  ps.declare("dim", "1", "container dimension");
  ps.declare("part", "interior", "perimeter part for order sweeps");
  ps.declare("cells", "0", "grid resolution override; 0 selects the default");
  ps.declare("target", "0", "target override; 0 derives it internally");
  ps.declare("crossing", "1", "boundary-crossing family (1) or retracted family (0)");
  ps.declare("k", "1", "jump-constant multiplier");

  CLI::App* multiplier = app.add_subcommand("multiplier", "dispersion-multiplier table");
  multiplier->fallthrough();
  Params pu(multiplier, "multiplier");
  pu.declare("s", "0.5", "kernel order");
  pu.declare("xi-min", "0", "first frequency magnitude");
  pu.declare("xi-max", "50", "last frequency magnitude");
  pu.declare("count", "500", "number of intervals");

  CLI::App* report = app.add_subcommand("report", "run a battery of experiments");
  report->fallthrough();
  Params pr(report, "report");
  pr.declare("experiments", "", "comma-separated experiment names; empty runs all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  Params* params = nullptr;
  if (command == "perimeter") params = &pp;
  if (command == "energy") params = &pe;
  if (command == "minimize") params = &pm;
  if (command == "sweep") params = &ps;
  if (command == "multiplier") params = &pu;
  if (command == "report") params = &pr;

  try {
    std::optional<Config> cfg;
    if (!config_path.empty()) {
      try {
        cfg = Config::load(config_path);
      } catch (const std::exception& e) {
        throw UsageError(std::string("cannot load config: ") + e.what());
      }
      static const std::set<std::string> known_sections{
          "run", "perimeter", "energy", "minimize", "sweep", "multiplier", "report"};
      for (const std::string& sec : cfg->sections())
        if (!known_sections.count(sec))
          throw UsageError("unknown section '" + sec + "'");
      static const std::set<std::string> run_keys{"command", "out", "threads", "cache_dir"};
      const std::vector<std::string> secs = cfg->sections();
      if (std::find(secs.begin(), secs.end(), "run") != secs.end()) {
        for (const auto& [key, value] : cfg->section("run")) {
          if (!run_keys.count(key)) throw UsageError("unknown key 'run." + key + "'");
          if (key == "command" && value != command)
            throw UsageError("key 'run.command' is '" + value +
                             "' but the invoked command is '" + command + "'");
          if (key == "out" && run.out_opt->count() == 0) run.out = value;
          if (key == "threads" && run.threads_opt->count() == 0) run.threads = value;
          if (key == "cache_dir" && run.cache_opt->count() == 0) run.cache_dir = value;
        }
      }
    }
    params->resolve(cfg);

    int threads = 1;
    try {
      size_t pos = 0;
      threads = std::stoi(run.threads, &pos);
      if (pos != run.threads.size()) threads = -1;
    } catch (const std::exception&) {
      threads = -1;
    }
    if (threads < 1) throw UsageError("key 'run.threads' must be a positive integer");
    set_thread_count(threads);
    if (!run.cache_dir.empty()) set_cache_dir(run.cache_dir);

    OutputDir out;
    out.path = run.out;
    std::error_code ec;
    fs::create_directories(out.path, ec);
    if (ec) throw UsageError("cannot create output directory '" + run.out + "'");

    Config effective;
    effective.set("run", "command", command);
    effective.set("run", "out", run.out);
    effective.set("run", "threads", run.threads);
    effective.set("run", "cache_dir", run.cache_dir);
    params->store(effective);
    write_effective_config(effective, out);

    json summary;
    summary["command"] = command;
    int code = 0;
    if (command == "perimeter") code = run_perimeter(*params, out, summary);
    if (command == "energy") code = run_energy_cmd(*params, out, summary);
    if (command == "minimize") code = run_minimize_cmd(*params, out, summary);
    if (command == "sweep") code = run_sweep_cmd(*params, out, summary);
    if (command == "multiplier") code = run_multiplier_cmd(*params, out, summary);
    if (command == "report") code = run_report_cmd(*params, out, summary);
    summary["exit_code"] = code;
    write_summary(out, summary);
    return code;
  } catch (const UsageError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
