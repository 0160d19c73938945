#pragma once

// Geometric and functional primitives shared by every energy evaluator:
// grid domains, analytic set descriptions, grid fields with prescribed
// exterior data, double-well potentials, and the optimal transition profile.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlphase/util.hpp"

namespace nlphase {

using Vec3 = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Domain: an axis-aligned box (or interval) carrying a uniform cell grid and
// an exterior margin on which prescribed exterior data are materialized for
// truncated nonlocal sums. A ball-shaped container is also supported: the
// grid then covers the bounding box and membership is tested against the
// inscribed ball. Grid-based energy evaluators accept box domains only;
// geometric measurements (perimeters, meshes) honor the ball shape.
// ---------------------------------------------------------------------------

struct Domain {
  int dim = 1;                      // 1, 2, or 3
  Vec3 lo{-1.0, 0.0, 0.0};
  Vec3 hi{1.0, 0.0, 0.0};
  std::array<int, 3> cells{0, 0, 0};
  double margin = 0.0;              // length units outside the box
  bool is_ball = false;             // container is the inscribed ball
  Vec3 ball_center{0.0, 0.0, 0.0};
  double ball_radius = 0.0;

  static Domain interval(double a, double b, int n, double margin = 0.0);
  static Domain box2(double ax, double bx, int nx, double ay, double by, int ny,
                     double margin = 0.0);
  // Ball container: grid covers [center - r, center + r]^dim with
  // cells_per_axis cells on every axis.
  static Domain ball(const Vec3& center, double radius, int dim,
                     int cells_per_axis, double margin = 0.0);

  void validate() const;            // throws InvalidArgument on violation
  // True when the point lies in the container (box interior or open ball).
  bool contains_point(const Vec3& x) const;
  // Throws unless the container is a box (grid-based evaluators).
  void require_box(const char* op) const;
  double spacing(int axis) const { return (hi[axis] - lo[axis]) / cells[axis]; }
  double cell_volume() const;
  long num_cells() const;
  // Center coordinate of cell index (i, j, k); unused axes ignored.
  double center(int axis, int index) const {
    return lo[axis] + (index + 0.5) * spacing(axis);
  }
  double diameter() const;
};

// ---------------------------------------------------------------------------
// GeometricSet: expression tree over half-spaces, boxes, and balls with
// union / intersection / complement nodes. Membership is total on R^n.
// Signed distance is exact for primitives and the usual min/max bound for
// boolean nodes (exact whenever the nearest primitive boundary is the true
// set boundary, which holds for every configuration used in the tests).
// ---------------------------------------------------------------------------

class GeometricSet {
 public:
  enum class Kind { Empty, Full, HalfSpace, Box, Ball, Union, Intersect, Complement };

  static GeometricSet empty();
  static GeometricSet full();
  // {x : x . normal < offset}; the normal need not be unit (normalized inside).
  static GeometricSet half_space(const Vec3& normal, double offset);
  // 1D half-line {x < c} or, with sign -1, {x > c}.
  static GeometricSet half_line(double c, int side = -1);
  static GeometricSet box(const Vec3& lo, const Vec3& hi, int dim);
  static GeometricSet ball(const Vec3& center, double radius);
  static GeometricSet unite(GeometricSet a, GeometricSet b);
  static GeometricSet intersect(GeometricSet a, GeometricSet b);
  static GeometricSet complement(GeometricSet a);

  Kind kind() const { return kind_; }
  bool contains(const Vec3& x, int dim) const;
  // Positive inside the set, negative outside.
  double signed_distance(const Vec3& x, int dim) const;

  // Primitive accessors (valid for the corresponding kind).
  const Vec3& normal() const { return a_; }
  double offset() const { return r_; }
  const Vec3& box_lo() const { return a_; }
  const Vec3& box_hi() const { return b_; }
  const Vec3& center() const { return a_; }
  double radius() const { return r_; }
  const GeometricSet& child(int i) const;

 private:
  Kind kind_ = Kind::Empty;
  Vec3 a_{0, 0, 0}, b_{0, 0, 0};
  double r_ = 0.0;
  std::shared_ptr<const GeometricSet> c0_, c1_;
};

// ---------------------------------------------------------------------------
// ScalarField: one real value per cell of a Domain, plus a prescribed
// exterior datum (an indicator-inducing set or a constant) used outside the
// box. The exterior datum is immutable under minimization.
// ---------------------------------------------------------------------------

enum class ValueRange { PlusMinusOne, ZeroOne };

struct ScalarField {
  Domain dom;
  std::vector<double> v;            // row-major, x fastest
  ValueRange range = ValueRange::PlusMinusOne;
  std::optional<GeometricSet> exterior_set;   // chi_E - chi_complement outside
  std::optional<double> exterior_const;

  static ScalarField constant(const Domain& d, double value,
                              ValueRange r = ValueRange::PlusMinusOne);

  bool has_exterior() const {
    return exterior_set.has_value() || exterior_const.has_value();
  }
  // Exterior value at a point outside the box (or anywhere, for datum query).
  double exterior_value(const Vec3& x) const;
  void validate_range() const;      // throws if a value leaves the range

  double& at(int i, int j = 0, int k = 0);
  double at(int i, int j = 0, int k = 0) const;
};

// Lossless field file I/O. Text header lines ("dim", "extents", "cells",
// "range"), then the raw values as little-endian 64-bit floats, row-major.
void write_field(const ScalarField& f, const std::string& path);
ScalarField read_field(const std::string& path);

// ---------------------------------------------------------------------------
// DoubleWell: potential with two nondegenerate zeros; evaluation, derivative,
// and the primitive H of 2*sqrt(W) normalized so H(zero1) = 0.
// ---------------------------------------------------------------------------

class DoubleWell {
 public:
  // W(t) = (1 - t^2)^2 / 4 with zeros -1, 1; H(t) = t - t^3/3 + 2/3.
  static DoubleWell quartic();
  // W(t) = t^2 (1 - t)^2 with zeros 0, 1 (the [0,1]-ranged model).
  static DoubleWell zero_one();
  // Arbitrary well; H computed by adaptive quadrature on demand.
  static DoubleWell custom(double zero1, double zero2, double (*w)(double),
                           double (*dw)(double));

  double zero1() const { return z1_; }
  double zero2() const { return z2_; }
  double value(double t) const;
  double derivative(double t) const;
  double primitive(double t) const;   // H(t), H(zero1) = 0
  // Second derivative at a zero (finite differences for custom wells).
  double curvature_at(double zero) const;

 private:
  double z1_ = -1.0, z2_ = 1.0;
  int tag_ = 0;  // 0 quartic, 1 zero_one, 2 custom
  double (*wc_)(double) = nullptr;
  double (*dwc_)(double) = nullptr;
};

enum class PotentialKind { Value, Derivative, Primitive };
double potential_eval(const DoubleWell& w, double t, PotentialKind kind);

// ---------------------------------------------------------------------------
// Optimal transition profile: the increasing solution of u' = sqrt(W(u))
// through the midpoint of the wells, tabulated with spline interpolation.
// Its 1D energy  int (u')^2 + W(u)  equals H(zero2) - H(zero1).
// ---------------------------------------------------------------------------

class OptimalProfile {
 public:
  explicit OptimalProfile(const DoubleWell& w);
  ~OptimalProfile();
  OptimalProfile(OptimalProfile&&) noexcept;
  OptimalProfile& operator=(OptimalProfile&&) noexcept;
  OptimalProfile(const OptimalProfile&) = delete;
  OptimalProfile& operator=(const OptimalProfile&) = delete;

  double operator()(double t) const;   // clamped to the asymptotes outside
  double energy() const;               // quadrature of (u')^2 + W(u)
  double half_width() const { return T_; }
  // Smallest t with u(t) >= value (monotone inverse; value in (mid, zero2)).
  double inverse(double value) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double T_ = 0.0;
};

// Voxelization: +1 where the cell center lies in the set, -1 otherwise;
// the exterior datum is the same set.
ScalarField voxelize(const GeometricSet& set, const Domain& domain);

}  // namespace nlphase
