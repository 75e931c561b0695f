#pragma once

#include <string>
#include <vector>

#include "bsrd/geometry.hpp"

namespace bsrd {

/// Sparse matrix in CSR form with the conventions used throughout:
/// row i of the bulk Laplacian holds (1/area_i) * sum of face fluxes,
/// so applying to a field approximates the Laplacian cell-wise.
struct SparseOperator {
  int dimension = 0;
  bool symmetric = false;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> apply(const std::vector<double>& x) const;
  double entry(int i, int j) const;

  /// Coordinate (row, col, value) text dump, one entry per line.
  std::string to_coordinate_text() const;
};

/// Per-boundary-face injection scale: flux density G on a face adds
/// G * arc_length / cell_area to the paired outermost cell.
struct FluxInjection {
  std::vector<int> cells;
  std::vector<double> scales;        // arc_length / cell_area
  std::vector<double> face_lengths;  // quadrature weights of the discrete boundary integral
};

/// Two-point-flux finite-volume Laplacian scaled by the diffusivity d.
/// Outer boundary faces contribute nothing; their flux is injected
/// separately (see apply_flux), so constants are in the kernel.
SparseOperator assemble_bulk_laplacian(const BulkMesh& mesh, double d);

/// Periodic second difference on the circle scaled by d_tilde / (R dtheta)^2.
SparseOperator assemble_laplace_beltrami(const SurfaceMesh& surface, double d_tilde);

FluxInjection make_flux_injection(const BulkMesh& mesh);

/// Adds the boundary-flux contribution of per-face values G to a bulk
/// increment field (units of a rate). Total injected mass rate is the
/// discrete boundary integral sum(face_length * G).
void apply_flux(const FluxInjection& inj, const std::vector<double>& g_faces,
                std::vector<double>& increment);

/// Total discrete boundary integral sum(face_length * G).
double injected_mass_rate(const FluxInjection& inj, const std::vector<double>& g_faces);

/// Symmetric positive-definite matrix for the implicit diffusion solve
/// (area-weighted backward Euler / Crank-Nicolson system):
///   W = diag(area) - coef * (flux form of the Laplacian), coef = dt*d
/// for backward Euler; the flux form has entries t_f on faces.
SparseOperator assemble_bulk_helmholtz(const BulkMesh& mesh, double d, double coef);

/// Same for the surface operator with unit node weights replaced by
/// the arc-length weights.
SparseOperator assemble_surface_helmholtz(const SurfaceMesh& surface, double d_tilde,
                                          double coef);

}  // namespace bsrd
