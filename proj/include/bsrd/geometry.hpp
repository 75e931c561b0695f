#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsrd {

/// Thrown when mesh parameters are degenerate or incompatible.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct PolarPoint {
  double r;
  double theta;
};

/// One interior face of the polar finite-volume mesh, oriented from
/// cell_a to cell_b. transmissibility = face_length / center_distance,
/// so the diffusive flux through the face is d * trans * (u_b - u_a).
struct InteriorFace {
  int cell_a;
  int cell_b;
  double face_length;
  double center_distance;
  double transmissibility;
};

/// Outer-boundary face of an outermost-ring cell.
struct BoundaryFace {
  int cell;
  double arc_length;
  double normal_angle;  // outward normal direction (radial), equals face center angle
};

/// Cell-centered polar finite-volume mesh of the disk of given radius.
///
/// Cells are annular sectors indexed cell = ring * n_theta + sector with
/// ring 0 innermost. Centers sit at r = (ring + 1/2) * dr, so no cell
/// center lands on the r = 0 coordinate singularity. Immutable after
/// construction.
struct BulkMesh {
  double radius = 0.0;
  int n_r = 0;
  int n_theta = 0;
  double dr = 0.0;
  double dtheta = 0.0;
  std::vector<PolarPoint> cell_centers;
  std::vector<double> cell_areas;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;

  int n_cells() const { return n_r * n_theta; }
  int cell_index(int ring, int sector) const { return ring * n_theta + sector; }
  double total_area() const;
};

/// Uniform periodic mesh of the boundary circle. Node angles match the
/// bulk mesh's sector center angles so boundary faces and surface nodes
/// pair one-to-one.
struct SurfaceMesh {
  double radius = 0.0;
  int n_theta = 0;
  double dtheta = 0.0;
  std::vector<double> node_angles;
  std::vector<double> node_weights;  // arc lengths, uniform

  int n_nodes() const { return n_theta; }
  double total_length() const;
};

/// Pairing of boundary faces with surface nodes plus the radial
/// extrapolation stencil that evaluates a bulk field on the boundary.
///
/// The stencil uses the two outermost cells of each sector; linear
/// extrapolation to r = radius gives weights (3/2, -1/2), exact for
/// fields linear in r.
struct TraceMap {
  int n_pairs = 0;
  std::vector<int> face_of_node;  // surface node -> boundary face index
  std::vector<int> node_of_face;  // boundary face -> surface node index
  struct Stencil {
    int cell_near;   // outermost ring
    int cell_far;    // second ring from the boundary
    double w_near;
    double w_far;
  };
  std::vector<Stencil> stencils;  // indexed by boundary face

  /// Boundary value of a per-cell field at the given boundary face.
  double trace(const std::vector<double>& cell_field, int face) const {
    const Stencil& s = stencils[face];
    return s.w_near * cell_field[s.cell_near] + s.w_far * cell_field[s.cell_far];
  }

  /// One-sided discrete outward normal derivative at the given face
  /// (slope of the same two-point radial stencil).
  double normal_derivative(const std::vector<double>& cell_field, int face,
                           double dr) const {
    const Stencil& s = stencils[face];
    return (cell_field[s.cell_near] - cell_field[s.cell_far]) / dr;
  }
};

BulkMesh build_disk_mesh(double radius, int n_r, int n_theta);
SurfaceMesh build_surface_mesh(double radius, int n_theta);
TraceMap build_trace_map(const BulkMesh& bulk, const SurfaceMesh& surface);

/// Mesh summary (counts, spacings, totals) as a JSON string for debugging.
std::string mesh_summary_json(const BulkMesh& bulk, const SurfaceMesh& surface);

}  // namespace bsrd
