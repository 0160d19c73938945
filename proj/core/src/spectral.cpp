#include "nlphase/spectral.hpp"

#include <fftw3.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <complex>
#include <mutex>

namespace nlphase {

namespace {

void require_spectral_field(const ScalarField& u) {
  u.dom.validate();
  u.dom.require_box("spectral_energy");
  if (u.dom.dim > 2)
    throw InvalidArgument("spectral_energy: 1D and 2D grids only");
  if (u.has_exterior())
    throw InvalidArgument(
        "spectral_energy: periodic fields carry no exterior datum");
  if (u.range != ValueRange::ZeroOne)
    throw InvalidArgument("spectral_energy: field range must be [0, 1]");
  u.validate_range();
  if (static_cast<long>(u.v.size()) != u.dom.num_cells())
    throw InvalidArgument("spectral_energy: field size mismatch");
}

// Signed integer frequency for index k on an n-point periodic axis.
int wrap_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

double box_volume(const Domain& d) {
  double vol = 1.0;
  for (int a = 0; a < d.dim; ++a) vol *= d.hi[a] - d.lo[a];
  return vol;
}

// |box| * sum over all modes of S(|xi|) |u_hat|^2 with u_hat = FFT(u)/N.
double quadratic_form_fft(const ScalarField& u, const SpectralGrid& g) {
  const Domain& d = u.dom;
  const long ntot = d.num_cells();
  const int nx = d.cells[0];
  const int ny = d.dim == 2 ? d.cells[1] : 1;
  const int nxh = nx / 2 + 1;
  std::vector<double> in(u.v.begin(), u.v.end());
  std::vector<std::complex<double>> out(static_cast<size_t>(ny) * nxh);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan =
        d.dim == 1
            ? fftw_plan_dft_r2c_1d(nx, in.data(),
                                   reinterpret_cast<fftw_complex*>(out.data()),
                                   FFTW_ESTIMATE)
            : fftw_plan_dft_r2c_2d(ny, nx, in.data(),
                                   reinterpret_cast<fftw_complex*>(out.data()),
                                   FFTW_ESTIMATE);
    // The planner may overwrite the input; re-fill before executing.
    std::copy(u.v.begin(), u.v.end(), in.begin());
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double inv_n = 1.0 / static_cast<double>(ntot);
  double acc = 0.0;
  for (size_t m = 0; m < out.size(); ++m) {
    const double a2 = std::norm(out[m] * inv_n);
    acc += g.mult[m] * g.S[m] * a2;
  }
  return box_volume(d) * acc;
}

}  // namespace

double multiplier_S(double s, double xi_mag) {
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgument("multiplier: s must lie in (0, 1)");
  if (!(xi_mag >= 0.0))
    throw InvalidArgument("multiplier: frequency magnitude must be >= 0");
  if (xi_mag == 0.0) return 0.0;
  const double x = xi_mag;
  if (x > 600.0) return std::pow(x, 2.0 * s);  // ratio is 1 to machine eps
  static std::once_flag off;
  std::call_once(off, [] { gsl_set_error_handler_off(); });
  const double nu = 1.0 - s;
  gsl_sf_result ri, rk;
  const int si = gsl_sf_bessel_Inu_scaled_e(nu, x, &ri);
  const int sk = gsl_sf_bessel_Knu_scaled_e(nu, x, &rk);
  if (si != GSL_SUCCESS || sk != GSL_SUCCESS)
    throw InvalidArgument("multiplier: Bessel evaluation failed");
  // I_{s-1}(x) = I_{1-s}(x) + (2/pi) sin((1-s) pi) K_{1-s}(x).
  const double denom =
      ri.val + M_2_PI * std::sin(nu * M_PI) * rk.val * std::exp(-2.0 * x);
  const double ratio = ri.val / denom;
  return ratio * std::pow(x, 2.0 * s);
}

SpectralGrid SpectralGrid::build(const Domain& dom, double s) {
  dom.validate();
  dom.require_box("spectral grid");
  if (dom.dim > 2)
    throw InvalidArgument("spectral grid: 1D and 2D grids only");
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgument("spectral grid: s must lie in (0, 1)");
  SpectralGrid g;
  g.dom = dom;
  g.s = s;
  const int nx = dom.cells[0];
  const int ny = dom.dim == 2 ? dom.cells[1] : 1;
  const int nxh = nx / 2 + 1;
  const double lx = dom.hi[0] - dom.lo[0];
  const double ly = dom.dim == 2 ? dom.hi[1] - dom.lo[1] : 1.0;
  g.xi_mag.reserve(static_cast<size_t>(ny) * nxh);
  g.S.reserve(g.xi_mag.capacity());
  g.mult.reserve(g.xi_mag.capacity());
  for (int j = 0; j < ny; ++j) {
    const double xiy =
        dom.dim == 2 ? 2.0 * M_PI * wrap_freq(j, ny) / ly : 0.0;
    for (int k = 0; k < nxh; ++k) {
      const double xix = 2.0 * M_PI * k / lx;
      const double mag = std::hypot(xix, xiy);
      g.xi_mag.push_back(mag);
      g.S.push_back(multiplier_S(s, mag));
      const bool edge = (k == 0) || (nx % 2 == 0 && k == nx / 2);
      g.mult.push_back(edge ? 1.0 : 2.0);
    }
  }
  return g;
}

EnergyBreakdown spectral_energy(const ScalarField& u, double eps, double s,
                                bool rescaled) {
  require_spectral_field(u);
  if (!(s > 0.0 && s < 1.0))
    throw InvalidArgument("spectral_energy: s must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0))
    throw InvalidArgument("spectral_energy: eps must lie in (0, 1)");
  const SpectralGrid g = SpectralGrid::build(u.dom, s);
  double kin = std::pow(eps, 2.0 * s) * quadratic_form_fft(u, g);
  const DoubleWell well = DoubleWell::zero_one();
  double pot = 0.0;
  for (double t : u.v) pot += well.value(t);
  pot *= u.dom.cell_volume();
  if (rescaled) {
    const double wt = regime_weights(s, eps).potential_full;
    kin *= wt;
    pot *= wt;
  }
  return make_breakdown(kin, pot, 0.0);
}

double spectral_quadratic_naive(const ScalarField& u, double s) {
  require_spectral_field(u);
  const Domain& d = u.dom;
  const int nx = d.cells[0];
  const int ny = d.dim == 2 ? d.cells[1] : 1;
  const long ntot = d.num_cells();
  const double lx = d.hi[0] - d.lo[0];
  const double ly = d.dim == 2 ? d.hi[1] - d.lo[1] : 1.0;
  const double inv_n = 1.0 / static_cast<double>(ntot);
  double acc = 0.0;
  for (int kj = 0; kj < ny; ++kj) {
    const double xiy = d.dim == 2 ? 2.0 * M_PI * wrap_freq(kj, ny) / ly : 0.0;
    for (int ki = 0; ki < nx; ++ki) {
      const double xix = 2.0 * M_PI * wrap_freq(ki, nx) / lx;
      std::complex<double> hat(0.0, 0.0);
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const double phase =
              -2.0 * M_PI *
              (static_cast<double>(ki) * i / nx +
               (d.dim == 2 ? static_cast<double>(kj) * j / ny : 0.0));
          hat += u.v[static_cast<size_t>(j) * nx + i] *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      hat *= inv_n;
      acc += multiplier_S(s, std::hypot(xix, xiy)) * std::norm(hat);
    }
  }
  return box_volume(d) * acc;
}

}  // namespace nlphase
