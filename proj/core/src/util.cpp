#include "nlphase/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

namespace nlphase {

std::string fmt_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(const std::string& path,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open CSV for writing: " + path);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

static std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section = "global";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw InvalidArgument("config line " + std::to_string(lineno) +
                              ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      cfg.data_[section];  // record even if empty
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": expected key = value");
    cfg.data_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return cfg;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  data_[section][key] = value;
}
void Config::set(const std::string& section, const std::string& key,
                 double value) {
  set(section, key, fmt_full(value));
}
void Config::set(const std::string& section, const std::string& key,
                 int value) {
  set(section, key, std::to_string(value));
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  return it != data_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section,
                        const std::string& key) const {
  auto it = data_.find(section);
  if (it == data_.end())
    throw InvalidArgument("missing config section: [" + section + "]");
  auto kt = it->second.find(key);
  if (kt == it->second.end())
    throw InvalidArgument("missing config key: [" + section + "] " + key);
  return kt->second;
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section,
                          const std::string& key) const {
  const std::string v = get(section, key);
  size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size())
    throw InvalidArgument("config key [" + section + "] " + key +
                          " is not a number: " + v);
  return x;
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int_or(const std::string& section, const std::string& key,
                       int fallback) const {
  if (!has(section, key)) return fallback;
  return static_cast<int>(get_double(section, key));
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, kv] : data_) out.push_back(name);
  return out;
}

const std::map<std::string, std::string>& Config::section(
    const std::string& name) const {
  auto it = data_.find(name);
  if (it == data_.end())
    throw InvalidArgument("missing config section: [" + name + "]");
  return it->second;
}

std::string Config::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, kv] : data_) {
    if (!first) out << '\n';
    first = false;
    out << '[' << name << "]\n";
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  }
  return out.str();
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open config for writing: " + path);
  out << serialize();
}

// ---------------------------------------------------------------------------
// Deterministic parallelism
// ---------------------------------------------------------------------------

static int g_threads = 1;
void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

std::vector<double> parallel_block_map(int nblocks, int nthreads,
                                       const std::function<double(int)>& fn) {
  std::vector<double> out(static_cast<size_t>(std::max(0, nblocks)), 0.0);
  if (nblocks <= 0) return out;
  nthreads = std::max(1, std::min(nthreads, nblocks));
  if (nthreads == 1) {
    for (int b = 0; b < nblocks; ++b) out[static_cast<size_t>(b)] = fn(b);
    return out;
  }
  std::vector<std::future<void>> workers;
  std::atomic<int> next{0};
  for (int t = 0; t < nthreads; ++t) {
    workers.push_back(std::async(std::launch::async, [&]() {
      for (;;) {
        int b = next.fetch_add(1);
        if (b >= nblocks) return;
        out[static_cast<size_t>(b)] = fn(b);
      }
    }));
  }
  for (auto& w : workers) w.get();
  return out;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_line needs at least two (x, y) pairs");
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300 * (1.0 + sxx * n))
    throw InvalidArgument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

// Returns indices of v sorted ascending.
static std::vector<size_t> order_of(const std::vector<double>& v) {
  std::vector<size_t> idx(v.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  return idx;
}

double extrapolate_affine(const std::vector<double>& x,
                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("extrapolate_affine needs at least two points");
  auto idx = order_of(x);
  const double x1 = x[idx[0]], x2 = x[idx[1]];
  const double y1 = y[idx[0]], y2 = y[idx[1]];
  if (x1 == x2) throw InvalidArgument("extrapolate_affine: repeated abscissa");
  return y1 - x1 * (y2 - y1) / (x2 - x1);
}

double extrapolate_richardson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw InvalidArgument("extrapolate_richardson needs at least three points");
  auto idx = order_of(x);
  // y3 at the smallest x, y1 at the largest of the chosen three.
  const double y3 = y[idx[0]], y2 = y[idx[1]], y1 = y[idx[2]];
  const double x3 = x[idx[0]], x2 = x[idx[1]];
  const double d32 = y3 - y2, d21 = y2 - y1;
  if (d32 == 0.0) return y3;
  const double ratio = d32 / d21;
  if (!(ratio > 0.0) || ratio >= 1.0) return y3;  // not contracting
  // Estimated rate p from |d32/d21| assuming a geometric abscissa ladder is
  // not required: solve with the actual spacings via p from ratio of x.
  const double rx = x3 / x2;
  if (!(rx > 0.0) || rx >= 1.0) return y3;
  const double p = std::log(ratio) / std::log(rx);
  const double q = std::pow(rx, p);  // equals ratio; contraction per step
  return y3 + d32 * q / (1.0 - q);
}

}  // namespace nlphase
