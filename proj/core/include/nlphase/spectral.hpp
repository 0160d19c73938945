#pragma once

// Fourier-multiplier energy on periodic grids. The symbol S_s interpolates
// between the Laplacian symbol at low frequency and the fractional-Laplacian
// symbol |xi|^{2s} at high frequency; the energy couples the resulting
// quadratic form with a [0,1]-ranged double well.

#include <vector>

#include "nlphase/energy.hpp"
#include "nlphase/model.hpp"

namespace nlphase {

// S_s(xi) = [I_{1-s}(x) / I_{s-1}(x)] x^{2s} at x = |xi|, the real positive
// branch of the Bessel-ratio symbol. S_s(0) = 0; S_s is nonnegative,
// increasing in |xi|, ~ |xi|^2 as xi -> 0 and ~ |xi|^{2s} as xi -> infinity.
// s in (0, 1); overflow-safe for large x (asymptotic ratio 1).
double multiplier_S(double s, double xi_mag);

// Precomputed half-spectrum tables (real-transform layout, row-major with
// the x-frequency axis halved): frequency magnitudes, multiplier values, and
// Hermitian multiplicities. Mode 0 comes first and carries S = 0.
struct SpectralGrid {
  Domain dom;
  double s = 0.25;
  std::vector<double> xi_mag;
  std::vector<double> S;
  std::vector<double> mult;

  static SpectralGrid build(const Domain& dom, double s);
};

// eps^{2s} |box| sum_modes S_s(|xi|) |u_hat|^2  +  integral of W(u) with the
// [0,1] well, u_hat normalized by the total cell count. The field is treated
// as one period: it must carry no exterior datum and must have [0,1] range.
// rescaled multiplies both terms by the regime weight (eps^{-2s} below
// s = 1/2, 1/(eps |log eps|) at s = 1/2, 1/eps above).
EnergyBreakdown spectral_energy(const ScalarField& u, double eps, double s,
                                bool rescaled);

// The same quadratic form |box| sum S |u_hat|^2 evaluated by direct
// discrete-transform double sums (no FFT); reference for Parseval tests.
double spectral_quadratic_naive(const ScalarField& u, double s);

}  // namespace nlphase
