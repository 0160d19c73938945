#include "nlphase/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "nlphase/util.hpp"

namespace nlphase {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Gauss-Legendre rules (nodes on (-1,1)), computed once per order by Newton
// iteration on the Legendre recurrence.
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    const double wt = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = wt;
    r.w[n - 1 - i] = wt;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// Antiderivative pair for the 1D kernel t^{-(1+2s)}: Phi''(t) = t^{-(1+2s)}.
double phi_1d(double t, double s) {
  if (!(t > 0)) return 0.0;
  if (std::abs(s - 0.5) < 1e-14) return -std::log(t);
  return -std::pow(t, 1.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s));
}

// Antiderivative pair for the absolute-difference kernel t^{-2s} (s < 1/2).
double phi_abs_1d(double t, double s) {
  if (!(t > 0)) return 0.0;
  return std::pow(t, 2.0 - 2.0 * s) / ((1.0 - 2.0 * s) * (2.0 - 2.0 * s));
}

void check_s_field(double s) {
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgument("kernel: s must lie in (0,1)");
}

void check_s_set(double s) {
  if (!(s > 0.0 && s < 0.5 - 1e-14))
    throw InvalidArgument(
        "set kernel: s must lie in (0,1/2); the pair integral across a "
        "shared boundary diverges otherwise");
}

// ---------------------------------------------------------------------------
// 2D touching-cell integrals in polar coordinates. The integrand on each
// angular ray is a quadratic polynomial in r (product of two tent factors)
// against r^{-(1+2s)} dr, integrated analytically piece by piece.
// ---------------------------------------------------------------------------

double rad_poly(double a, double b, double c, double r0, double r1, double s) {
  auto F = [&](double r) -> double {
    if (!(r > 0)) return 0.0;
    double v = b * std::pow(r, 1.0 - 2.0 * s) / (1.0 - 2.0 * s) +
               c * std::pow(r, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    if (a != 0.0) v += a * std::pow(r, -2.0 * s) / (-2.0 * s);
    return v;
  };
  return F(r1) - F(r0);
}

// Offset (1,0): support z1 in [0,2], z2 in [-1,1]; twice the upper half.
double touch_10(double s) {
  const GaussRule& g = gauss_rule(24);
  const double tha = std::atan(0.5);
  const double panels[4] = {0.0, tha, kPi / 4.0, kPi / 2.0};
  double total = 0.0;
  for (int p = 0; p < 3; ++p) {
    const double mid = 0.5 * (panels[p] + panels[p + 1]);
    const double hw = 0.5 * (panels[p + 1] - panels[p]);
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double th = mid + hw * g.x[i];
      const double ct = std::cos(th), st = std::sin(th);
      const double r1 = 1.0 / ct;
      const double rexit = (th < tha) ? 2.0 / ct : 1.0 / st;
      double val = rad_poly(0.0, ct, -ct * st, 0.0, std::min(r1, rexit), s);
      if (rexit > r1)
        val += rad_poly(2.0, -(ct + 2.0 * st), ct * st, r1, rexit, s);
      total += hw * g.w[i] * val;
    }
  }
  return 2.0 * total;
}

// Offset (1,1): support z in [0,2]^2; twice the wedge below the diagonal.
double touch_11(double s) {
  const GaussRule& g = gauss_rule(24);
  const double tha = std::atan(0.5);
  const double panels[3] = {0.0, tha, kPi / 4.0};
  double total = 0.0;
  for (int p = 0; p < 2; ++p) {
    const double mid = 0.5 * (panels[p] + panels[p + 1]);
    const double hw = 0.5 * (panels[p + 1] - panels[p]);
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double th = mid + hw * g.x[i];
      const double ct = std::cos(th), st = std::sin(th);
      const double rA = 1.0 / ct, rX = 2.0 / ct, rB = 1.0 / st;
      double val = rad_poly(0.0, 0.0, ct * st, 0.0, rA, s);
      if (th < tha) {
        val += rad_poly(0.0, 2.0 * st, -ct * st, rA, rX, s);
      } else {
        val += rad_poly(0.0, 2.0 * st, -ct * st, rA, rB, s);
        val += rad_poly(4.0, -2.0 * (ct + st), ct * st, rB, rX, s);
      }
      total += hw * g.w[i] * val;
    }
  }
  return 2.0 * total;
}

// Non-touching offsets: 4-panel tensor Gauss on the tent (cell
// autocorrelation) form, smooth since max(|p|,|q|) >= 2.
double tent_far(int p, int q, double s) {
  const GaussRule& g = gauss_rule(10);
  double total = 0.0;
  for (int pa = 0; pa < 2; ++pa) {
    for (int pb = 0; pb < 2; ++pb) {
      const double c1 = pa == 0 ? -0.5 : 0.5;
      const double c2 = pb == 0 ? -0.5 : 0.5;
      for (size_t i = 0; i < g.x.size(); ++i) {
        const double z1 = c1 + 0.5 * g.x[i];
        const double t1 = 1.0 - std::abs(z1);
        for (size_t j = 0; j < g.x.size(); ++j) {
          const double z2 = c2 + 0.5 * g.x[j];
          const double t2 = 1.0 - std::abs(z2);
          const double A =
              (z1 + p) * (z1 + p) + (z2 + q) * (z2 + q);
          total += 0.25 * g.w[i] * g.w[j] * t1 * t2 * std::pow(A, -(1.0 + s));
        }
      }
    }
  }
  return total;
}

// Point mass against the quadrant {x >= A-away, y >= B-away}:
// (1/2s) * int_0^{pi/2} max(A/cos, B/sin)^{-2s}.
double quadrant_point(double A, double B, double s) {
  const GaussRule& g = gauss_rule(16);
  const double tstar = std::atan2(B, A);
  double acc = 0.0;
  {
    const double mid = 0.5 * tstar, hw = 0.5 * tstar;
    double sum = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i)
      sum += g.w[i] * std::pow(std::sin(mid + hw * g.x[i]), 2.0 * s);
    acc += hw * sum * std::pow(B, -2.0 * s);
  }
  {
    const double mid = 0.5 * (tstar + kPi / 2.0), hw = 0.5 * (kPi / 2.0 - tstar);
    double sum = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i)
      sum += g.w[i] * std::pow(std::cos(mid + hw * g.x[i]), 2.0 * s);
    acc += hw * sum * std::pow(A, -2.0 * s);
  }
  return acc / (2.0 * s);
}

// ---------------------------------------------------------------------------
// Optional on-disk cache for pair-weight payloads.
// ---------------------------------------------------------------------------

std::string g_cache_dir;
bool g_cache_dir_set = false;

struct CacheKey {
  int32_t dim = 0;
  int32_t mode = 0;  // 1: 1D offsets, 2: 2D table, 4: 2D complement masses
  double s = 0;
  double lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  int32_t cells[3] = {0, 0, 0};
  double margin = 0;

  std::string bytes() const {
    std::string b;
    auto put = [&b](const void* p, size_t n) {
      b.append(static_cast<const char*>(p), n);
    };
    put(&dim, sizeof dim);
    put(&mode, sizeof mode);
    put(&s, sizeof s);
    put(lo, sizeof lo);
    put(hi, sizeof hi);
    put(cells, sizeof cells);
    put(&margin, sizeof margin);
    return b;
  }
};

constexpr char kCacheMagic[5] = {'N', 'L', 'P', 'W', 'T'};
constexpr uint32_t kCacheVersion = 1;

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string cache_path_for(const CacheKey& key, const std::string& dir) {
  std::ostringstream name;
  name << dir << "/nlpwt_" << std::hex << fnv1a(key.bytes()) << ".bin";
  return name.str();
}

bool cache_load(const CacheKey& key, std::vector<double>& out) {
  const std::string dir = cache_dir();
  if (dir.empty()) return false;
  std::ifstream in(cache_path_for(key, dir), std::ios::binary);
  if (!in) return false;
  char magic[5];
  uint32_t version = 0;
  in.read(magic, 5);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || std::memcmp(magic, kCacheMagic, 5) != 0 || version != kCacheVersion)
    return false;
  const std::string want = key.bytes();
  std::string got(want.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != want) return false;
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || count != out.size()) return false;
  in.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(out.size() * sizeof(double)));
  return in.gcount() ==
         static_cast<std::streamsize>(out.size() * sizeof(double));
}

void cache_store(const CacheKey& key, const std::vector<double>& data) {
  const std::string dir = cache_dir();
  if (dir.empty()) return;
  const std::string path = cache_path_for(key, dir);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;  // cache is best-effort
    out.write(kCacheMagic, 5);
    out.write(reinterpret_cast<const char*>(&kCacheVersion),
              sizeof kCacheVersion);
    const std::string bytes = key.bytes();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    const uint64_t count = data.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) {
      std::remove(tmp.c_str());
      return;
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

CacheKey key_for(const Domain& dom, double s, double margin, int mode) {
  CacheKey k;
  k.dim = dom.dim;
  k.mode = mode;
  k.s = s;
  for (int a = 0; a < 3; ++a) {
    k.lo[a] = dom.lo[a];
    k.hi[a] = dom.hi[a];
    k.cells[a] = dom.cells[a];
  }
  k.margin = margin;
  return k;
}

// Probe offsets used to read the constant far phase of an exterior datum.
double far_probe_offset(const Domain& dom) { return dom.diameter() + 1.0; }

}  // namespace

void set_cache_dir(const std::string& dir) {
  g_cache_dir = dir;
  g_cache_dir_set = true;
}

std::string cache_dir() {
  if (g_cache_dir_set) return g_cache_dir;
  const char* env = std::getenv("NLPHASE_CACHE_DIR");
  return env ? std::string(env) : std::string();
}

double KernelSpec::resolved_margin(const Domain& dom) const {
  return margin < 0 ? 4.0 * dom.diameter() : margin;
}

// ---------------------------------------------------------------------------
// Closed-form 1D primitives
// ---------------------------------------------------------------------------

double pair_weight_1d(double d, double h, double s) {
  return phi_1d(d + h, s) - 2.0 * phi_1d(d, s) + phi_1d(d - h, s);
}

double band_coeff_1d(double h, double s) {
  const double a_diag =
      2.0 * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
  auto psi = [&](double t) {
    return std::pow(t, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
  };
  const double a_adj = psi(2.0 * h) - 2.0 * psi(h);
  return (2.0 * a_adj + a_diag) / (h * h);
}

double ray_mass_1d(double a, double b, double M, double s, int side) {
  if (side < 0) {
    const double na = -b, nb = -a, nM = -M;
    a = na;
    b = nb;
    M = nM;
  }
  if (!(b <= M + 1e-12 * (std::abs(M) + 1.0)))
    throw InvalidArgument("ray_mass: cell must not cross the ray origin");
  if (std::abs(s - 0.5) < 1e-14) return std::log((M - a) / (M - b));
  return (std::pow(M - a, 1.0 - 2.0 * s) - std::pow(M - b, 1.0 - 2.0 * s)) /
         (2.0 * s * (1.0 - 2.0 * s));
}

double abs_pair_weight_1d(double d, double h, double s) {
  return phi_abs_1d(d + h, s) - 2.0 * phi_abs_1d(d, s) + phi_abs_1d(d - h, s);
}

double abs_diag_coeff_1d(double h, double s) {
  return 2.0 * std::pow(h, 2.0 - 2.0 * s) /
         ((1.0 - 2.0 * s) * (2.0 - 2.0 * s));
}

// ---------------------------------------------------------------------------
// 2D primitives
// ---------------------------------------------------------------------------

double cell_pair_integral_2d(int p, int q, double s) {
  check_s_field(s);
  p = std::abs(p);
  q = std::abs(q);
  if (p < q) std::swap(p, q);
  if (p == 0 && q == 0) return 0.0;  // diagonal handled by the caller's rule
  if (p <= 1 && q <= 1) {
    if (!(s < 0.5 - 1e-14))
      throw InvalidArgument(
          "cell_pair_integral_2d: touching offsets diverge for s >= 1/2");
    return (q == 0) ? touch_10(s) : touch_11(s);
  }
  return tent_far(p, q, s);
}

double halfplane_reduction_const(double s) {
  return std::sqrt(kPi) * std::tgamma(s + 0.5) / std::tgamma(s + 1.0);
}

double quadrant_mass_2d(const std::array<double, 2>& clo,
                        const std::array<double, 2>& chi, double xi0,
                        double eta0, double s) {
  if (!(chi[0] <= xi0 + 1e-12 && chi[1] <= eta0 + 1e-12))
    throw InvalidArgument("quadrant_mass_2d: cell must lie below-left of the corner");
  const GaussRule& g = gauss_rule(10);
  const double mx = 0.5 * (clo[0] + chi[0]), hx = 0.5 * (chi[0] - clo[0]);
  const double my = 0.5 * (clo[1] + chi[1]), hy = 0.5 * (chi[1] - clo[1]);
  double total = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) {
    const double x = mx + hx * g.x[i];
    for (size_t j = 0; j < g.x.size(); ++j) {
      const double y = my + hy * g.x[j];
      total += g.w[i] * g.w[j] * quadrant_point(xi0 - x, eta0 - y, s);
    }
  }
  return total * hx * hy;
}

// ---------------------------------------------------------------------------
// Kernel1D
// ---------------------------------------------------------------------------

Kernel1D::Kernel1D(const Domain& dom, double s, double margin_len) {
  dom.validate();
  dom.require_box("nonlocal kernel");
  if (dom.dim != 1) throw InvalidArgument("Kernel1D: domain must be 1D");
  check_s_field(s);
  if (!(margin_len >= 0))
    throw InvalidArgument("kernel: margin must be >= 0");
  n_ = dom.cells[0];
  h_ = dom.spacing(0);
  lo_ = dom.lo[0];
  hi_ = dom.hi[0];
  s_ = s;
  mext_ = static_cast<int>(std::llround(margin_len / h_));
  mleft_ = lo_ - mext_ * h_;
  mright_ = hi_ + mext_ * h_;
  has_band_ = (s >= 0.5 - 1e-14);
  kmin_ = has_band_ ? 2 : 1;
  band_ = has_band_ ? band_coeff_1d(h_, s) : 0.0;

  const int dmax = n_ + mext_;
  w_.assign(static_cast<size_t>(dmax) + 1, 0.0);
  const CacheKey key = key_for(dom, s, margin_len, 1);
  if (!cache_load(key, w_)) {
    for (int d = kmin_; d <= dmax; ++d)
      w_[static_cast<size_t>(d)] = pair_weight_1d(d * h_, h_, s);
    cache_store(key, w_);
  }

  xl_.resize(static_cast<size_t>(mext_));
  xr_.resize(static_cast<size_t>(mext_));
  for (int j = 0; j < mext_; ++j) {
    xl_[static_cast<size_t>(j)] = lo_ - (mext_ - j - 0.5) * h_;
    xr_[static_cast<size_t>(j)] = hi_ + (j + 0.5) * h_;
  }
  tail_l_.assign(static_cast<size_t>(n_), 0.0);
  tail_r_.assign(static_cast<size_t>(n_), 0.0);
  // With a band and no margin the tails diverge at the box edge; exterior
  // evaluation is rejected in materialize, so the tails stay zero.
  if (!has_band_ || mext_ > 0) {
    for (int i = 0; i < n_; ++i) {
      const double a = lo_ + i * h_, b = a + h_;
      tail_r_[static_cast<size_t>(i)] = ray_mass_1d(a, b, mright_, s, +1);
      tail_l_[static_cast<size_t>(i)] = ray_mass_1d(a, b, mleft_, s, -1);
    }
  }
}

Kernel1D::ExteriorData Kernel1D::materialize(const ScalarField& u) const {
  if (!u.has_exterior())
    throw InvalidArgument(
        "field kernel: exterior part requires a prescribed exterior datum");
  if (has_band_ && mext_ == 0)
    throw InvalidArgument(
        "field kernel: s >= 1/2 exterior parts require a positive margin");
  ExteriorData e;
  e.gl.resize(static_cast<size_t>(mext_));
  e.gr.resize(static_cast<size_t>(mext_));
  for (int j = 0; j < mext_; ++j) {
    e.gl[static_cast<size_t>(j)] =
        u.exterior_value({xl_[static_cast<size_t>(j)], 0, 0});
    e.gr[static_cast<size_t>(j)] =
        u.exterior_value({xr_[static_cast<size_t>(j)], 0, 0});
  }
  const double p = far_probe_offset(u.dom);
  e.far_l = u.exterior_value({mleft_ - p, 0, 0});
  e.far_r = u.exterior_value({mright_ + p, 0, 0});
  if (u.exterior_value({mleft_ - 5.0 * p, 0, 0}) != e.far_l ||
      u.exterior_value({mright_ + 5.0 * p, 0, 0}) != e.far_r)
    throw InvalidArgument(
        "field kernel: exterior datum must be constant beyond the margin "
        "(analytic tails assume a pure phase)");
  return e;
}

double Kernel1D::K_int(const double* u) const {
  const int N = n_;
  const int nblocks = std::max(0, N - kmin_);
  auto per_offset = [&](int b) -> double {
    const int d = kmin_ + b;
    const double wd = w_[static_cast<size_t>(d)];
    double acc = 0.0;
    for (int i = 0; i + d < N; ++i) {
      const double df = u[i + d] - u[i];
      acc += df * df;
    }
    return 2.0 * wd * acc;
  };
  const std::vector<double> parts =
      parallel_block_map(nblocks, thread_count(), per_offset);
  double total = 0.0;
  for (double v : parts) total += v;
  if (has_band_) {
    double acc = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      const double df = u[i + 1] - u[i];
      acc += df * df;
    }
    total += band_ * acc;
  }
  return total;
}

double Kernel1D::K_ext(const double* u, const ExteriorData& ext) const {
  const int N = n_, M = mext_;
  double total = 0.0;
  for (int j = 0; j < M; ++j) {
    const double grj = ext.gr[static_cast<size_t>(j)];
    const double glj = ext.gl[static_cast<size_t>(M - 1 - j)];
    double accr = 0.0, accl = 0.0;
    for (int i = 0; i < N; ++i) {
      const int offr = N + j - i;
      if (offr >= kmin_) {
        const double df = u[i] - grj;
        accr += w_[static_cast<size_t>(offr)] * df * df;
      }
      const int offl = i + j + 1;
      if (offl >= kmin_) {
        const double df = u[i] - glj;
        accl += w_[static_cast<size_t>(offl)] * df * df;
      }
    }
    total += 2.0 * (accr + accl);
  }
  if (has_band_ && M > 0) {
    const double dl = u[0] - ext.gl[static_cast<size_t>(M - 1)];
    const double dr = u[N - 1] - ext.gr[0];
    total += band_ * (dl * dl + dr * dr);
  }
  double accr = 0.0, accl = 0.0;
  for (int i = 0; i < N; ++i) {
    const double dr = u[i] - ext.far_r;
    const double dl = u[i] - ext.far_l;
    accr += dr * dr * tail_r_[static_cast<size_t>(i)];
    accl += dl * dl * tail_l_[static_cast<size_t>(i)];
  }
  total += 2.0 * (accr + accl);
  return total;
}

void Kernel1D::add_grad_K_int(const double* u, double coeff, double* g) const {
  const int N = n_;
  for (int d = kmin_; d < N; ++d) {
    const double w4 = 4.0 * coeff * w_[static_cast<size_t>(d)];
    for (int i = 0; i + d < N; ++i) {
      const double df = u[i + d] - u[i];
      g[i + d] += w4 * df;
      g[i] -= w4 * df;
    }
  }
  if (has_band_) {
    const double b2 = 2.0 * coeff * band_;
    for (int i = 0; i + 1 < N; ++i) {
      const double df = u[i + 1] - u[i];
      g[i + 1] += b2 * df;
      g[i] -= b2 * df;
    }
  }
}

void Kernel1D::add_grad_K_ext(const double* u, const ExteriorData& ext,
                              double coeff, double* g) const {
  const int N = n_, M = mext_;
  for (int j = 0; j < M; ++j) {
    const double grj = ext.gr[static_cast<size_t>(j)];
    const double glj = ext.gl[static_cast<size_t>(M - 1 - j)];
    for (int i = 0; i < N; ++i) {
      const int offr = N + j - i;
      if (offr >= kmin_)
        g[i] += 4.0 * coeff * w_[static_cast<size_t>(offr)] * (u[i] - grj);
      const int offl = i + j + 1;
      if (offl >= kmin_)
        g[i] += 4.0 * coeff * w_[static_cast<size_t>(offl)] * (u[i] - glj);
    }
  }
  if (has_band_ && M > 0) {
    g[0] += 2.0 * coeff * band_ * (u[0] - ext.gl[static_cast<size_t>(M - 1)]);
    g[N - 1] += 2.0 * coeff * band_ * (u[N - 1] - ext.gr[0]);
  }
  for (int i = 0; i < N; ++i) {
    g[i] += coeff * (4.0 * (u[i] - ext.far_r) * tail_r_[static_cast<size_t>(i)] +
                     4.0 * (u[i] - ext.far_l) * tail_l_[static_cast<size_t>(i)]);
  }
}

// ---------------------------------------------------------------------------
// Kernel2D
// ---------------------------------------------------------------------------

Kernel2D::Kernel2D(const Domain& dom, double s, double margin_len,
                   bool with_exterior) {
  dom.validate();
  dom.require_box("nonlocal kernel");
  if (dom.dim != 2) throw InvalidArgument("Kernel2D: domain must be 2D");
  if (!(s > 0.0 && s < 0.5 - 1e-14))
    throw InvalidArgument(
        "2D field kernel: s must lie in (0,1/2) — the near-diagonal cell "
        "weights diverge at and above 1/2");
  if (!(margin_len >= 0))
    throw InvalidArgument("kernel: margin must be >= 0");
  nx_ = dom.cells[0];
  ny_ = dom.cells[1];
  hx_ = dom.spacing(0);
  hy_ = dom.spacing(1);
  if (std::abs(hx_ - hy_) > 1e-12 * std::max(hx_, hy_))
    throw InvalidArgument("2D kernel: square cells required");
  lo_ = {dom.lo[0], dom.lo[1]};
  hi_ = {dom.hi[0], dom.hi[1]};
  s_ = s;
  margin_ = margin_len;

  const double scale = std::pow(hx_, 2.0 - 2.0 * s);
  table_.assign(static_cast<size_t>(nx_) * static_cast<size_t>(ny_), 0.0);
  const CacheKey tkey = key_for(dom, s, margin_len, 2);
  if (!cache_load(tkey, table_)) {
    gauss_rule(10);
    gauss_rule(24);
    for (int q = 0; q < ny_; ++q)
      for (int p = 0; p < nx_; ++p) {
        if (p == 0 && q == 0) continue;
        table_[static_cast<size_t>(q) * static_cast<size_t>(nx_) +
               static_cast<size_t>(p)] = scale * cell_pair_integral_2d(p, q, s);
      }
    cache_store(tkey, table_);
  }

  if (with_exterior) {
    m_tot_.assign(static_cast<size_t>(nx_) * static_cast<size_t>(ny_), 0.0);
    const CacheKey mkey = key_for(dom, s, margin_len, 4);
    if (!cache_load(mkey, m_tot_)) {
      const double B = halfplane_reduction_const(s);
      // Quadrant masses depend only on the cell offset from the corner;
      // shared across all four corners by symmetry.
      std::vector<double> quad(static_cast<size_t>(nx_) *
                               static_cast<size_t>(ny_));
      const double h = hx_;
      for (int b = 0; b < ny_; ++b)
        for (int a = 0; a < nx_; ++a) {
          const std::array<double, 2> clo{-(a + 1) * h, -(b + 1) * h};
          const std::array<double, 2> chi{-a * h, -b * h};
          quad[static_cast<size_t>(b) * static_cast<size_t>(nx_) +
               static_cast<size_t>(a)] = quadrant_mass_2d(clo, chi, 0.0, 0.0, s);
        }
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) {
          const double ax = lo_[0] + i * h, bx = ax + h;
          const double ay = lo_[1] + j * h, by = ay + h;
          double m = B * hy_ * ray_mass_1d(ax, bx, lo_[0], s, -1) +
                     B * hy_ * ray_mass_1d(ax, bx, hi_[0], s, +1) +
                     B * hx_ * ray_mass_1d(ay, by, lo_[1], s, -1) +
                     B * hx_ * ray_mass_1d(ay, by, hi_[1], s, +1);
          auto q_at = [&](int a, int b) {
            return quad[static_cast<size_t>(b) * static_cast<size_t>(nx_) +
                        static_cast<size_t>(a)];
          };
          m -= q_at(nx_ - 1 - i, ny_ - 1 - j) + q_at(i, ny_ - 1 - j) +
               q_at(nx_ - 1 - i, j) + q_at(i, j);
          m_tot_[static_cast<size_t>(j) * static_cast<size_t>(nx_) +
                 static_cast<size_t>(i)] = m;
        }
      cache_store(mkey, m_tot_);
    }
  }
}

const std::vector<double>& Kernel2D::mass_complement_total() const {
  if (m_tot_.empty())
    throw InvalidArgument(
        "Kernel2D: exterior masses were not built (with_exterior=false)");
  return m_tot_;
}

namespace {
struct AxisHalf {
  int axis = 0;   // 0 or 1
  int side = -1;  // -1: {x_axis < c}, +1: {x_axis > c}
  double c = 0;
};

std::optional<AxisHalf> as_axis_halfspace(const GeometricSet& set, int dim) {
  if (set.kind() == GeometricSet::Kind::Complement) {
    auto inner = as_axis_halfspace(set.child(0), dim);
    if (!inner) return std::nullopt;
    inner->side = -inner->side;
    return inner;
  }
  if (set.kind() != GeometricSet::Kind::HalfSpace) return std::nullopt;
  const Vec3& nrm = set.normal();
  for (int a = 0; a < dim; ++a) {
    bool pure = std::abs(std::abs(nrm[a]) - 1.0) < 1e-12;
    for (int b = 0; b < dim; ++b)
      if (b != a && std::abs(nrm[b]) > 1e-12) pure = false;
    if (pure) {
      AxisHalf r;
      r.axis = a;
      // {x . n < off}: n = +e_a gives {x_a < off}; n = -e_a gives {x_a > -off}
      r.side = nrm[a] > 0 ? -1 : +1;
      r.c = nrm[a] > 0 ? set.offset() : -set.offset();
      return r;
    }
  }
  return std::nullopt;
}
}  // namespace

std::vector<double> Kernel2D::mass_exterior_set(const GeometricSet& set) const {
  const size_t ncell = static_cast<size_t>(nx_) * static_cast<size_t>(ny_);
  const double tol = 1e-12 * (1.0 + std::max(std::abs(lo_[0]), std::abs(hi_[1])));
  if (auto ah = as_axis_halfspace(set, 2)) {
    const double B = halfplane_reduction_const(s_);
    const int ax = ah->axis;
    const double axis_lo = lo_[static_cast<size_t>(ax)];
    const double axis_hi = hi_[static_cast<size_t>(ax)];
    const double hpar = ax == 0 ? hx_ : hy_;
    const double hperp = ax == 0 ? hy_ : hx_;
    const bool beyond_lo = ah->c <= axis_lo + tol;
    const bool beyond_hi = ah->c >= axis_hi - tol;
    if (!beyond_lo && !beyond_hi)
      throw InvalidArgument(
          "2D exterior set: a half-plane datum must have its boundary clear "
          "of the open box");
    std::vector<double> out(ncell, 0.0);
    const std::vector<double>& mt = mass_complement_total();
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const int ipar = ax == 0 ? i : j;
        const double a = axis_lo + ipar * hpar, b = a + hpar;
        const size_t idx =
            static_cast<size_t>(j) * static_cast<size_t>(nx_) +
            static_cast<size_t>(i);
        if (ah->side < 0) {
          // E = {x_ax < c}: direct strip if clear of the low face, else the
          // complement of the opposite strip within C-Omega.
          if (beyond_lo)
            out[idx] = B * hperp * ray_mass_1d(a, b, ah->c, s_, -1);
          else
            out[idx] = mt[idx] - B * hperp * ray_mass_1d(a, b, ah->c, s_, +1);
        } else {
          // E = {x_ax > c}
          if (beyond_hi)
            out[idx] = B * hperp * ray_mass_1d(a, b, ah->c, s_, +1);
          else
            out[idx] = mt[idx] - B * hperp * ray_mass_1d(a, b, ah->c, s_, -1);
        }
      }
    return out;
  }
  // General set: supported only when it has no part outside the box
  // (checked on a probe grid over the materialized margin).
  const double h = hx_;
  const int mcells = static_cast<int>(std::llround(margin_ / h));
  const int px0 = -mcells, px1 = nx_ + mcells;
  const int py0 = -mcells, py1 = ny_ + mcells;
  const long total_probes = static_cast<long>(px1 - px0) * (py1 - py0);
  const int stride =
      std::max(1, static_cast<int>(std::sqrt(double(total_probes) / 1.0e6)) );
  for (int j = py0; j < py1; j += stride)
    for (int i = px0; i < px1; i += stride) {
      if (i >= 0 && i < nx_ && j >= 0 && j < ny_) continue;
      const Vec3 x{lo_[0] + (i + 0.5) * h, lo_[1] + (j + 0.5) * h, 0.0};
      if (set.contains(x, 2))
        throw InvalidArgument(
            "2D exterior set: only data contained in the box or axis-aligned "
            "half-planes clear of it are supported");
    }
  return std::vector<double>(ncell, 0.0);
}

Kernel2D::ExteriorData Kernel2D::materialize(const ScalarField& u) const {
  if (!u.has_exterior())
    throw InvalidArgument(
        "field kernel: exterior part requires a prescribed exterior datum");
  ExteriorData e;
  const std::vector<double>& mt = mass_complement_total();
  if (u.exterior_const) {
    e.m_set = mt;
    e.g_set = *u.exterior_const;
    e.m_comp.assign(mt.size(), 0.0);
    e.g_comp = 0.0;
    return e;
  }
  e.m_set = mass_exterior_set(*u.exterior_set);
  e.g_set = 1.0;
  e.m_comp.resize(mt.size());
  for (size_t i = 0; i < mt.size(); ++i) e.m_comp[i] = mt[i] - e.m_set[i];
  e.g_comp = -1.0;
  return e;
}

double Kernel2D::K_int(const double* u) const {
  auto offset_sum = [&](int p, int q) -> double {
    const double wpq = w(p, q);
    double acc = 0.0;
    const int i0 = std::max(0, -p), i1 = nx_ - std::max(0, p);
    for (int j = 0; j + q < ny_; ++j) {
      const double* r0 = u + static_cast<size_t>(j) * nx_;
      const double* r1 = u + static_cast<size_t>(j + q) * nx_ + p;
      for (int i = i0; i < i1; ++i) {
        const double df = r1[i] - r0[i];
        acc += df * df;
      }
    }
    return wpq * acc;
  };
  auto block = [&](int q) -> double {
    double acc = 0.0;
    if (q == 0) {
      for (int p = 1; p < nx_; ++p) acc += offset_sum(p, 0);
    } else {
      for (int p = -(nx_ - 1); p < nx_; ++p) acc += offset_sum(p, q);
    }
    return acc;
  };
  const std::vector<double> parts =
      parallel_block_map(ny_, thread_count(), block);
  double total = 0.0;
  for (double v : parts) total += v;
  return 2.0 * total;
}

void Kernel2D::add_grad_K_int(const double* u, double coeff, double* g) const {
  for (int q = 0; q < ny_; ++q) {
    const int pstart = (q == 0) ? 1 : -(nx_ - 1);
    for (int p = pstart; p < nx_; ++p) {
      const double w4 = 4.0 * coeff * w(p, q);
      const int i0 = std::max(0, -p), i1 = nx_ - std::max(0, p);
      for (int j = 0; j + q < ny_; ++j) {
        double* g0 = g + static_cast<size_t>(j) * nx_;
        double* g1 = g + static_cast<size_t>(j + q) * nx_ + p;
        const double* r0 = u + static_cast<size_t>(j) * nx_;
        const double* r1 = u + static_cast<size_t>(j + q) * nx_ + p;
        for (int i = i0; i < i1; ++i) {
          const double df = r1[i] - r0[i];
          g1[i] += w4 * df;
          g0[i] -= w4 * df;
        }
      }
    }
  }
}

double Kernel2D::K_ext(const double* u, const ExteriorData& ext) const {
  double total = 0.0;
  const size_t n = ext.m_set.size();
  for (size_t i = 0; i < n; ++i) {
    const double ds = u[i] - ext.g_set;
    const double dc = u[i] - ext.g_comp;
    total += ds * ds * ext.m_set[i] + dc * dc * ext.m_comp[i];
  }
  return 2.0 * total;
}

void Kernel2D::add_grad_K_ext(const double* u, const ExteriorData& ext,
                              double coeff, double* g) const {
  const size_t n = ext.m_set.size();
  for (size_t i = 0; i < n; ++i) {
    g[i] += 4.0 * coeff * ((u[i] - ext.g_set) * ext.m_set[i] +
                           (u[i] - ext.g_comp) * ext.m_comp[i]);
  }
}

// ---------------------------------------------------------------------------
// interaction
// ---------------------------------------------------------------------------

double interaction(const GeometricSet& E, const GeometricSet& F,
                   const KernelSpec& spec, const Domain& dom) {
  dom.validate();
  dom.require_box("interaction");
  check_s_set(spec.s);
  const double s = spec.s;
  const double margin = spec.resolved_margin(dom);

  if (dom.dim == 1) {
    const double h = dom.spacing(0);
    const int mext = static_cast<int>(std::llround(margin / h));
    const int ntot = dom.cells[0] + 2 * mext;
    const double x0 = dom.lo[0] - mext * h;
    std::vector<int> ia, ib;
    for (int t = 0; t < ntot; ++t) {
      const Vec3 x{x0 + (t + 0.5) * h, 0, 0};
      const bool inE = E.contains(x, 1), inF = F.contains(x, 1);
      if (inE && inF)
        throw InvalidArgument("interaction: sets overlap on the sampled grid");
      if (inE) ia.push_back(t);
      if (inF) ib.push_back(t);
    }
    if (ia.empty() || ib.empty()) return 0.0;
    std::vector<long> cnt(static_cast<size_t>(ntot), 0);
    for (int a : ia)
      for (int b : ib) cnt[static_cast<size_t>(std::abs(a - b))] += 1;
    double total = 0.0;
    for (int d = 1; d < ntot; ++d)
      if (cnt[static_cast<size_t>(d)] != 0)
        total += pair_weight_1d(d * h, h, s) *
                 static_cast<double>(cnt[static_cast<size_t>(d)]);
    return total;
  }

  if (dom.dim == 2) {
    const double h = dom.spacing(0);
    if (std::abs(dom.spacing(1) - h) > 1e-12 * h)
      throw InvalidArgument("interaction: square cells required in 2D");
    const int mext = static_cast<int>(std::llround(margin / h));
    const int nx = dom.cells[0] + 2 * mext, ny = dom.cells[1] + 2 * mext;
    const double x0 = dom.lo[0] - mext * h, y0 = dom.lo[1] - mext * h;
    struct IJ {
      int i, j;
    };
    std::vector<IJ> ca, cb;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec3 x{x0 + (i + 0.5) * h, y0 + (j + 0.5) * h, 0};
        const bool inE = E.contains(x, 2), inF = F.contains(x, 2);
        if (inE && inF)
          throw InvalidArgument("interaction: sets overlap on the sampled grid");
        if (inE) ca.push_back({i, j});
        if (inF) cb.push_back({i, j});
      }
    if (ca.empty() || cb.empty()) return 0.0;
    if (static_cast<long>(ca.size()) * static_cast<long>(cb.size()) > 400000000L)
      throw InvalidArgument(
          "interaction: voxel pair count too large for direct summation");
    int pmax = 0, qmax = 0;
    for (const IJ& a : ca)
      for (const IJ& b : cb) {
        pmax = std::max(pmax, std::abs(a.i - b.i));
        qmax = std::max(qmax, std::abs(a.j - b.j));
      }
    std::vector<long> cnt(static_cast<size_t>(pmax + 1) *
                              static_cast<size_t>(qmax + 1),
                          0);
    for (const IJ& a : ca)
      for (const IJ& b : cb)
        cnt[static_cast<size_t>(std::abs(b.j - a.j)) *
                static_cast<size_t>(pmax + 1) +
            static_cast<size_t>(std::abs(b.i - a.i))] += 1;
    if (cnt[0] != 0)
      throw InvalidArgument("interaction: sets overlap on the sampled grid");
    const double scale = std::pow(h, 2.0 - 2.0 * s);
    double total = 0.0;
    for (int q = 0; q <= qmax; ++q)
      for (int p = 0; p <= pmax; ++p) {
        const long c = cnt[static_cast<size_t>(q) *
                               static_cast<size_t>(pmax + 1) +
                           static_cast<size_t>(p)];
        if (c == 0 || (p == 0 && q == 0)) continue;
        total += scale * cell_pair_integral_2d(p, q, s) *
                 static_cast<double>(c);
      }
    return total;
  }
  throw InvalidArgument("interaction: 3D sampling is not supported");
}

// ---------------------------------------------------------------------------
// frac_perimeter
// ---------------------------------------------------------------------------

namespace {

double frac_perimeter_1d(const GeometricSet& E, const Domain& omega, double s,
                         KernelPart part, double margin) {
  Kernel1D k(omega, s, margin);
  const int N = k.n(), M = k.mext();
  std::vector<int> chi(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i)
    chi[static_cast<size_t>(i)] = E.contains({k.cell_center(i), 0, 0}, 1) ? 1 : 0;

  double interior = 0.0;
  if (part != KernelPart::Exterior) {
    for (int d = 1; d < N; ++d) {
      long cnt = 0;
      for (int i = 0; i + d < N; ++i)
        cnt += (chi[static_cast<size_t>(i)] != chi[static_cast<size_t>(i + d)]);
      if (cnt != 0) interior += k.w(d) * static_cast<double>(cnt);
    }
  }
  if (part == KernelPart::Interior) return interior;

  // Margin indicators and far phases, matching the field materialization.
  std::vector<int> gl(static_cast<size_t>(M)), gr(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) {
    gl[static_cast<size_t>(j)] =
        E.contains({k.margin_center_left(j), 0, 0}, 1) ? 1 : 0;
    gr[static_cast<size_t>(j)] =
        E.contains({k.margin_center_right(j), 0, 0}, 1) ? 1 : 0;
  }
  const double diam = omega.diameter();
  const double p1 = diam + 1.0;
  const double mleft = omega.lo[0] - M * k.h();
  const double mright = omega.hi[0] + M * k.h();
  const int far_l = E.contains({mleft - p1, 0, 0}, 1) ? 1 : 0;
  const int far_r = E.contains({mright + p1, 0, 0}, 1) ? 1 : 0;
  if ((E.contains({mleft - 5.0 * p1, 0, 0}, 1) ? 1 : 0) != far_l ||
      (E.contains({mright + 5.0 * p1, 0, 0}, 1) ? 1 : 0) != far_r)
    throw InvalidArgument(
        "frac_perimeter: the set must be of pure phase beyond the margin");

  double exterior = 0.0;
  for (int j = 0; j < M; ++j) {
    const int grj = gr[static_cast<size_t>(j)];
    const int glj = gl[static_cast<size_t>(M - 1 - j)];
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      if (chi[static_cast<size_t>(i)] != grj) acc += k.w(N + j - i);
      if (chi[static_cast<size_t>(i)] != glj) acc += k.w(i + j + 1);
    }
    exterior += acc;
  }
  for (int i = 0; i < N; ++i) {
    if (chi[static_cast<size_t>(i)] != far_r) exterior += k.tail_right(i);
    if (chi[static_cast<size_t>(i)] != far_l) exterior += k.tail_left(i);
  }
  return part == KernelPart::Exterior ? exterior : interior + exterior;
}

double frac_perimeter_2d(const GeometricSet& E, const Domain& omega, double s,
                         KernelPart part, double margin) {
  Kernel2D k(omega, s, margin, part != KernelPart::Interior);
  const int nx = k.nx(), ny = k.ny();
  const double h = omega.spacing(0);
  std::vector<int> chi(static_cast<size_t>(nx) * static_cast<size_t>(ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec3 x{omega.lo[0] + (i + 0.5) * h, omega.lo[1] + (j + 0.5) * h, 0};
      chi[static_cast<size_t>(j) * static_cast<size_t>(nx) +
          static_cast<size_t>(i)] = E.contains(x, 2) ? 1 : 0;
    }

  double interior = 0.0;
  if (part != KernelPart::Exterior) {
    for (int q = 0; q < ny; ++q) {
      const int pstart = (q == 0) ? 1 : -(nx - 1);
      for (int p = pstart; p < nx; ++p) {
        long cnt = 0;
        const int i0 = std::max(0, -p), i1 = nx - std::max(0, p);
        for (int j = 0; j + q < ny; ++j)
          for (int i = i0; i < i1; ++i)
            cnt += (chi[static_cast<size_t>(j) * static_cast<size_t>(nx) +
                        static_cast<size_t>(i)] !=
                    chi[static_cast<size_t>(j + q) * static_cast<size_t>(nx) +
                        static_cast<size_t>(i + p)]);
        if (cnt != 0) interior += k.w(p, q) * static_cast<double>(cnt);
      }
    }
  }
  if (part == KernelPart::Interior) return interior;

  const std::vector<double> m_set = k.mass_exterior_set(E);
  const std::vector<double>& m_tot = k.mass_complement_total();
  double exterior = 0.0;
  for (size_t i = 0; i < m_set.size(); ++i) {
    const double m_comp = m_tot[i] - m_set[i];
    exterior += chi[i] ? m_comp : m_set[i];
  }
  return part == KernelPart::Exterior ? exterior : interior + exterior;
}

}  // namespace

double frac_perimeter(const GeometricSet& E, const Domain& omega, double s,
                      KernelPart part, double margin) {
  omega.validate();
  omega.require_box("frac_perimeter");
  check_s_set(s);
  const KernelSpec spec{s, margin};
  const double m = spec.resolved_margin(omega);
  if (omega.dim == 1) return frac_perimeter_1d(E, omega, s, part, m);
  if (omega.dim == 2) return frac_perimeter_2d(E, omega, s, part, m);
  throw InvalidArgument("frac_perimeter: 3D sampling is not supported");
}

// ---------------------------------------------------------------------------
// field_kernel
// ---------------------------------------------------------------------------

double field_kernel(const ScalarField& u, double s, KernelPart part,
                    double margin) {
  u.dom.validate();
  u.dom.require_box("field_kernel");
  check_s_field(s);
  if (u.v.size() != static_cast<size_t>(u.dom.num_cells()))
    throw InvalidArgument("field_kernel: field size does not match its domain");
  const KernelSpec spec{s, margin};
  const double m = spec.resolved_margin(u.dom);
  if (u.dom.dim == 1) {
    Kernel1D k(u.dom, s, m);
    double total = 0.0;
    if (part != KernelPart::Exterior) total += k.K_int(u.v.data());
    if (part != KernelPart::Interior)
      total += k.K_ext(u.v.data(), k.materialize(u));
    return total;
  }
  if (u.dom.dim == 2) {
    Kernel2D k(u.dom, s, m, part != KernelPart::Interior);
    double total = 0.0;
    if (part != KernelPart::Exterior) total += k.K_int(u.v.data());
    if (part != KernelPart::Interior)
      total += k.K_ext(u.v.data(), k.materialize(u));
    return total;
  }
  throw InvalidArgument("field_kernel: 3D sampling is not supported");
}

// ---------------------------------------------------------------------------
// bbm_seminorm
// ---------------------------------------------------------------------------

double bbm_seminorm(const ScalarField& u, double s) {
  u.dom.validate();
  u.dom.require_box("bbm_seminorm");
  if (!(s > 0.0 && s < 0.5 - 1e-14))
    throw InvalidArgument("bbm_seminorm: s must lie in (0,1/2)");
  if (u.v.size() != static_cast<size_t>(u.dom.num_cells()))
    throw InvalidArgument("bbm_seminorm: field size does not match its domain");
  if (u.dom.dim == 1) {
    const int N = u.dom.cells[0];
    const double h = u.dom.spacing(0);
    const double* v = u.v.data();
    double total = 0.0;
    // Far pairs: locally-linear reconstruction |u(x)-u(y)| ≈
    // (|u_i-u_j| / |x_i-x_j|) |x-y|, integrated exactly.
    for (int d = 1; d < N; ++d) {
      double acc = 0.0;
      for (int i = 0; i + d < N; ++i) acc += std::abs(v[i + d] - v[i]);
      total += 2.0 * (abs_pair_weight_1d(d * h, h, s) / (d * h)) * acc;
    }
    // Coincident cells: |slope| times the exact coincident-cell mass.
    const double diag = abs_diag_coeff_1d(h, s);
    for (int i = 0; i < N; ++i) {
      double slope;
      if (i == 0)
        slope = (v[1] - v[0]) / h;
      else if (i == N - 1)
        slope = (v[N - 1] - v[N - 2]) / h;
      else
        slope = (v[i + 1] - v[i - 1]) / (2.0 * h);
      total += diag * std::abs(slope);
    }
    return total;
  }
  if (u.dom.dim == 2) {
    Kernel2D k(u.dom, s, 0.0, false);
    const int nx = k.nx(), ny = k.ny();
    const double* v = u.v.data();
    double total = 0.0;
    for (int q = 0; q < ny; ++q) {
      const int pstart = (q == 0) ? 1 : -(nx - 1);
      for (int p = pstart; p < nx; ++p) {
        double acc = 0.0;
        const int i0 = std::max(0, -p), i1 = nx - std::max(0, p);
        for (int j = 0; j + q < ny; ++j) {
          const double* r0 = v + static_cast<size_t>(j) * nx;
          const double* r1 = v + static_cast<size_t>(j + q) * nx + p;
          for (int i = i0; i < i1; ++i) acc += std::abs(r1[i] - r0[i]);
        }
        total += 2.0 * k.w(p, q) * acc;
      }
    }
    return total;
  }
  throw InvalidArgument("bbm_seminorm: 3D sampling is not supported");
}

}  // namespace nlphase
