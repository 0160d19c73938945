#pragma once

// Singular pair-interaction quadrature. Everything here evaluates truncated
// double integrals with kernel |x - y|^{-(n + 2s)}:
//   - set-set interaction energies,
//   - interior / exterior fractional perimeters of a set relative to a box,
//   - squared-difference field kernels (interior, exterior, full),
//   - the absolute-difference (L1 Gagliardo) seminorm.
// Cell pairs are weighted by exact closed forms in 1D and by tensor-Gauss
// quadrature with analytic radial integrals in 2D; prescribed data beyond the
// materialized margin enter through analytic ray / strip tails.

#include <array>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "nlphase/model.hpp"

namespace nlphase {

enum class KernelPart { Interior, Exterior, Full };

// ---------------------------------------------------------------------------
// KernelSpec: fractional order plus truncation margin (length units) beyond
// which exterior data are aggregated analytically. margin < 0 selects the
// default, four times the domain diameter.
// ---------------------------------------------------------------------------
struct KernelSpec {
  double s = 0.25;
  double margin = -1.0;
  double resolved_margin(const Domain& dom) const;
};

// --- closed-form 1D primitives (exposed for oracle tests) ------------------

// Exact mass of two width-h cells whose centers are d apart under the kernel
// t^{-(1+2s)}; finite for d >= h when s < 1/2 and for d >= 2h otherwise.
double pair_weight_1d(double d, double h, double s);
// Gradient-consistent near-field band replacing coincident + adjacent pairs
// for s >= 1/2 (per-edge coefficient multiplying (u_{i+1} - u_i)^2).
double band_coeff_1d(double h, double s);
// Mass of cell (a, b) against the ray beyond M (side +1: (M, inf) with
// b <= M; side -1: (-inf, M) with a >= M).
double ray_mass_1d(double a, double b, double M, double s, int side);
// Absolute-difference analogues under the kernel t^{-2s} (s < 1/2): the
// cell-pair mass and the coincident-cell mass (multiplying a local slope).
double abs_pair_weight_1d(double d, double h, double s);
double abs_diag_coeff_1d(double h, double s);

// --- 2D cell-pair integrals (exposed for oracle tests) ---------------------

// Dimensionless pair integral I(p, q) over two unit cells offset by (p, q)
// under |z|^{-(2+2s)}; the physical weight is h^{2-2s} I(p, q). Touching
// offsets (1,0) and (1,1) use polar coordinates with the analytic radial
// integral; all farther offsets use 4-panel tensor Gauss on the
// cell-autocorrelation ("tent") form. Requires s < 1/2 for touching offsets.
double cell_pair_integral_2d(int p, int q, double s);

// sqrt(pi) Gamma(s + 1/2) / Gamma(s + 1): integrating the 2D kernel over one
// full transverse axis leaves  B(s) |x1 - y1|^{-(1+2s)}.
double halfplane_reduction_const(double s);

// Mass of the cell [clo, chi] against the quadrant {x >= xi0, y >= eta0}
// located up-right of the cell (chi[0] <= xi0, chi[1] <= eta0).
double quadrant_mass_2d(const std::array<double, 2>& clo,
                        const std::array<double, 2>& chi, double xi0,
                        double eta0, double s);

// ---------------------------------------------------------------------------
// Kernel1D: assembled 1D machinery. Interior cells plus materialized margin
// cells on both sides, exact pair weights by integer offset on the union
// lattice, and analytic ray tails beyond the margins.
// ---------------------------------------------------------------------------
class Kernel1D {
 public:
  Kernel1D(const Domain& dom, double s, double margin_len);

  int n() const { return n_; }
  int mext() const { return mext_; }
  double h() const { return h_; }
  double s() const { return s_; }
  // Smallest offset covered by the pair-weight table (1, or 2 with a band).
  int kmin() const { return kmin_; }
  double w(int offset) const { return w_[static_cast<size_t>(offset)]; }
  bool has_band() const { return has_band_; }
  double band() const { return band_; }
  double cell_center(int i) const { return lo_ + (i + 0.5) * h_; }
  double margin_center_left(int j) const { return xl_[static_cast<size_t>(j)]; }
  double margin_center_right(int j) const { return xr_[static_cast<size_t>(j)]; }
  double tail_left(int i) const { return tail_l_[static_cast<size_t>(i)]; }
  double tail_right(int i) const { return tail_r_[static_cast<size_t>(i)]; }

  // Margin values and far phases captured from a field's exterior datum.
  struct ExteriorData {
    std::vector<double> gl, gr;  // margin cell values, ascending x
    double far_l = 0.0, far_r = 0.0;
  };
  ExteriorData materialize(const ScalarField& u) const;

  // Sum over ordered interior pairs of w |u_i - u_j|^2 (+ band edges).
  double K_int(const double* u) const;
  // Ordered pairs between interior cells and the exterior datum, margin cells
  // plus analytic tails (+ cross band edges).
  double K_ext(const double* u, const ExteriorData& ext) const;
  // g += coeff * d(K)/du for the corresponding sums.
  void add_grad_K_int(const double* u, double coeff, double* g) const;
  void add_grad_K_ext(const double* u, const ExteriorData& ext, double coeff,
                      double* g) const;

 private:
  int n_ = 0, mext_ = 0, kmin_ = 1;
  bool has_band_ = false;
  double h_ = 0, s_ = 0, lo_ = 0, hi_ = 0;
  double band_ = 0;
  double mleft_ = 0, mright_ = 0;  // margin outer edges
  std::vector<double> w_;          // by integer offset, 0..n+mext
  std::vector<double> xl_, xr_;    // margin cell centers
  std::vector<double> tail_l_, tail_r_;
};

// ---------------------------------------------------------------------------
// Kernel2D: pair-weight table by integer offset for the interior double sum,
// plus per-cell analytic exterior masses (face strips minus corner quadrants,
// and axis-aligned half-plane strips for set-valued data). Requires s < 1/2.
// ---------------------------------------------------------------------------
class Kernel2D {
 public:
  // with_exterior controls whether the per-cell masses against the box
  // complement are precomputed (needed for exterior parts only).
  Kernel2D(const Domain& dom, double s, double margin_len, bool with_exterior);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double s() const { return s_; }
  // Physical pair weight for cell offset (p, q), any signs.
  double w(int p, int q) const {
    return table_[static_cast<size_t>(std::abs(q)) * static_cast<size_t>(nx_) +
                  static_cast<size_t>(std::abs(p))];
  }
  // Per-cell mass against the whole box complement (row-major like fields).
  const std::vector<double>& mass_complement_total() const;
  // Per-cell mass against E ∩ (complement of the box). Supported shapes:
  // sets with no exterior part, and axis-aligned half-planes whose boundary
  // line does not cross the open box; anything else is rejected.
  std::vector<double> mass_exterior_set(const GeometricSet& set) const;

  struct ExteriorData {
    std::vector<double> m_set, m_comp;  // datum +1 region / -1 region masses
    double g_set = 1.0, g_comp = -1.0;
  };
  ExteriorData materialize(const ScalarField& u) const;

  double K_int(const double* u) const;
  double K_ext(const double* u, const ExteriorData& ext) const;
  void add_grad_K_int(const double* u, double coeff, double* g) const;
  void add_grad_K_ext(const double* u, const ExteriorData& ext, double coeff,
                      double* g) const;

 private:
  int nx_ = 0, ny_ = 0;
  double s_ = 0, hx_ = 0, hy_ = 0;
  std::array<double, 2> lo_{0, 0}, hi_{0, 0};
  double margin_ = 0;
  std::vector<double> table_;    // physical weights, (ny) x (nx), [q][p]
  std::vector<double> m_tot_;    // empty unless with_exterior
};

// ---------------------------------------------------------------------------
// Top-level evaluators
// ---------------------------------------------------------------------------

// Interaction energy of two disjoint sets sampled on the domain grid extended
// by the margin: sum over voxel pairs (one in E, one in F) of the pair
// weight. Symmetric in E and F; s in (0, 1/2).
double interaction(const GeometricSet& E, const GeometricSet& F,
                   const KernelSpec& spec, const Domain& dom);

// Fractional perimeter of E relative to the box: interior pairs the part of
// E inside the box against its inside complement; exterior pairs inside
// against outside wherever the indicator differs, margin-truncated with
// analytic tails. s in (0, 1/2).
double frac_perimeter(const GeometricSet& E, const Domain& omega, double s,
                      KernelPart part, double margin = -1.0);

// Squared-difference field kernel. Interior: double sum over the box.
// Exterior: twice the box-against-complement sum using the field's exterior
// datum (margin materialization + analytic tails). Full: their sum; the
// complement-complement contribution is always omitted. s in (0, 1) in 1D,
// s in (0, 1/2) in 2D.
double field_kernel(const ScalarField& u, double s, KernelPart part,
                    double margin = -1.0);

// Absolute-difference Gagliardo seminorm over the box, s in (0, 1/2). In 1D
// the near field uses the locally-linear reconstruction (exact for affine
// fields); in 2D the piecewise-constant pair sum with exact touching weights.
double bbm_seminorm(const ScalarField& u, double s);

// ---------------------------------------------------------------------------
// Optional on-disk pair-weight cache. Disabled unless a cache directory is
// set (NLPHASE_CACHE_DIR or set_cache_dir). Files are versioned and keyed by
// (dimension, extents, cells, s, margin, mode); any key change invalidates.
// ---------------------------------------------------------------------------
void set_cache_dir(const std::string& dir);  // "" disables
std::string cache_dir();                     // resolved (env or explicit)

}  // namespace nlphase
