#pragma once

// Small shared utilities: error type, CSV emission, sectioned key=value
// config files, and deterministic blocked parallel reduction.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlphase {

// Thrown on every contract violation (bad arguments, unsupported modes).
struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// Formats a double with enough digits to round-trip (max_digits10).
std::string fmt_full(double x);

// Writes rows as comma-separated lines; first row is the header.
// Numeric cells should be pre-formatted by the caller (fmt_full for doubles).
void write_csv(const std::string& path,
               const std::vector<std::vector<std::string>>& rows);

// ---------------------------------------------------------------------------
// Config files: flat key=value entries grouped in [section] headers.
// Deterministic serialization (sections and keys sorted) so that a
// write/read/write round trip is byte-identical.
// ---------------------------------------------------------------------------

class Config {
 public:
  // Parses a config file. Lines: "[section]", "key = value", "#" comments.
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& section, const std::string& key,
           const std::string& value);
  void set(const std::string& section, const std::string& key, double value);
  void set(const std::string& section, const std::string& key, int value);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  int get_int_or(const std::string& section, const std::string& key,
                 int fallback) const;

  // All sections, sorted.
  std::vector<std::string> sections() const;
  const std::map<std::string, std::string>& section(
      const std::string& name) const;

  std::string serialize() const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
};

// ---------------------------------------------------------------------------
// Deterministic parallelism
// ---------------------------------------------------------------------------

// Runs fn(block) for block = 0..nblocks-1 on up to nthreads workers and
// returns the per-block results in block order. The block decomposition is
// fixed by nblocks alone, so reducing the returned vector in order gives a
// bitwise-identical result for every thread count.
std::vector<double> parallel_block_map(int nblocks, int nthreads,
                                       const std::function<double(int)>& fn);

// Global thread-count knob used by the heavy evaluators (default 1).
void set_thread_count(int n);
int thread_count();

// ---------------------------------------------------------------------------
// Fitting and extrapolation helpers (shared by the experiment harness).
// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual of the fit
};

// Least-squares line through (x, y); model "loglog" fits log y vs log x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Affine-in-x extrapolation to x = 0 using the two smallest-x points.
// Points need not be sorted.
double extrapolate_affine(const std::vector<double>& x,
                          const std::vector<double>& y);

// Three-point Richardson extrapolation with the rate estimated from the
// ratio of successive differences; uses the three smallest-x points.
// Returns the extrapolant, or y at the smallest x when the rows are not in
// a contraction regime (non-decreasing differences).
double extrapolate_richardson(const std::vector<double>& x,
                              const std::vector<double>& y);

}  // namespace nlphase
