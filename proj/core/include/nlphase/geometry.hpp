#pragma once

// Sharp-interface measurements: interface meshes of analytic sets, classical
// perimeter inside the container and on its boundary, sublevel regions of
// grid fields, one-sided Hausdorff distance, and density fractions in balls.

#include <string>
#include <vector>

#include "nlphase/model.hpp"

namespace nlphase {

// ---------------------------------------------------------------------------
// InterfaceMesh: the boundary of a set inside a container, as a list of
// facets. 1D facets are points carrying counting measure 1; 2D facets are
// segments carrying their length. Facets are tagged interior (strictly
// inside the container) or boundary (on the container boundary).
// ---------------------------------------------------------------------------

struct Facet {
  Vec3 center{0, 0, 0};
  double measure = 0.0;
  Vec3 normal{0, 0, 0};  // unit, pointing out of the set
  bool boundary = false;
};

struct InterfaceMesh {
  int dim = 1;
  std::vector<Facet> facets;
  // Set when the set boundary runs along the container boundary (positive
  // overlap measure or a tangent touch); such contacts are reported, not
  // resolved further.
  bool tangential_warning = false;

  bool empty() const { return facets.empty(); }
  double total_measure(bool boundary_part) const;
};

enum class PerimeterWhere { Interior, Boundary };

// Extracts the interface of the set within the container: exact root-finding
// on the signed distance in 1D, marching squares on the node-sampled signed
// distance in 2D (segments clipped to a ball container analytically).
// Boundary facets on the container boundary are computed analytically for
// primitive sets and by dense sampling otherwise.
InterfaceMesh extract_interface(const GeometricSet& E, const Domain& omega);

// Facet-measure sum of the requested part. If tangential_warning is non-null
// it receives the mesh's tangential-contact flag.
double classical_perimeter(const GeometricSet& E, const Domain& omega,
                           PerimeterWhere where,
                           bool* tangential_warning = nullptr);

// ---------------------------------------------------------------------------
// VoxelRegion: a subset of a domain's cells (flat row-major indices).
// ---------------------------------------------------------------------------

struct VoxelRegion {
  Domain dom;
  std::vector<long> cells;

  bool empty() const { return cells.empty(); }
  Vec3 cell_center(long flat) const;
};

// Cells with |value| < theta (strict); theta must lie in (0,1). On a ball
// container only cells whose centers lie in the ball participate.
VoxelRegion level_set_region(const ScalarField& u, double theta);

// One-sided: sup over cells of A of the distance from the cell center to the
// nearest facet of B. Empty A gives 0; empty B with nonempty A is infinite.
double hausdorff_distance(const VoxelRegion& A, const InterfaceMesh& B);

// Fraction of cells with value > theta2 among cells whose centers lie in
// B_R(center); the ball must lie within the sampled region.
double density_fraction(const ScalarField& u, double theta2,
                        const Vec3& center, double R);

// CSV export: one row per facet (center coordinates, measure, tag).
void write_mesh_csv(const InterfaceMesh& mesh, const std::string& path);

}  // namespace nlphase
