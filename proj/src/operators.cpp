#include "bsrd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace bsrd {

namespace {

/// Triplet accumulator that sums duplicates and emits CSR.
class TripletBuilder {
 public:
  explicit TripletBuilder(int dim) : dim_(dim), entries_(dim) {}

  void add(int i, int j, double v) { entries_[i][j] += v; }

  SparseOperator build(bool symmetric) const {
    SparseOperator op;
    op.dimension = dim_;
    op.symmetric = symmetric;
    op.row_ptr.resize(dim_ + 1, 0);
    for (int i = 0; i < dim_; ++i)
      op.row_ptr[i + 1] = op.row_ptr[i] + static_cast<int>(entries_[i].size());
    op.col.reserve(op.row_ptr[dim_]);
    op.val.reserve(op.row_ptr[dim_]);
    for (int i = 0; i < dim_; ++i) {
      for (const auto& [j, v] : entries_[i]) {
        op.col.push_back(j);
        op.val.push_back(v);
      }
    }
    return op;
  }

 private:
  int dim_;
  std::vector<std::map<int, double>> entries_;
};

}  // namespace

void SparseOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(dimension, 0.0);
  for (int i = 0; i < dimension; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

std::vector<double> SparseOperator::apply(const std::vector<double>& x) const {
  std::vector<double> y;
  apply(x, y);
  return y;
}

double SparseOperator::entry(int i, int j) const {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col[k] == j) return val[k];
  return 0.0;
}

std::string SparseOperator::to_coordinate_text() const {
  std::ostringstream os;
  os.precision(16);
  for (int i = 0; i < dimension; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      os << i << " " << col[k] << " " << val[k] << "\n";
  return os.str();
}

SparseOperator assemble_bulk_laplacian(const BulkMesh& mesh, double d) {
  TripletBuilder b(mesh.n_cells());
  for (const InteriorFace& f : mesh.interior_faces) {
    const double t = d * f.transmissibility;
    const double inv_a = 1.0 / mesh.cell_areas[f.cell_a];
    const double inv_b = 1.0 / mesh.cell_areas[f.cell_b];
    b.add(f.cell_a, f.cell_a, -t * inv_a);
    b.add(f.cell_a, f.cell_b, t * inv_a);
    b.add(f.cell_b, f.cell_b, -t * inv_b);
    b.add(f.cell_b, f.cell_a, t * inv_b);
  }
  return b.build(/*symmetric=*/false);
}

SparseOperator assemble_laplace_beltrami(const SurfaceMesh& surface, double d_tilde) {
  const int n = surface.n_nodes();
  const double h = surface.radius * surface.dtheta;
  const double c = d_tilde / (h * h);
  TripletBuilder b(n);
  for (int j = 0; j < n; ++j) {
    b.add(j, j, -2.0 * c);
    b.add(j, (j + 1) % n, c);
    b.add(j, (j + n - 1) % n, c);
  }
  return b.build(/*symmetric=*/true);
}

FluxInjection make_flux_injection(const BulkMesh& mesh) {
  FluxInjection inj;
  inj.cells.reserve(mesh.boundary_faces.size());
  inj.scales.reserve(mesh.boundary_faces.size());
  inj.face_lengths.reserve(mesh.boundary_faces.size());
  for (const BoundaryFace& f : mesh.boundary_faces) {
    inj.cells.push_back(f.cell);
    inj.scales.push_back(f.arc_length / mesh.cell_areas[f.cell]);
    inj.face_lengths.push_back(f.arc_length);
  }
  return inj;
}

void apply_flux(const FluxInjection& inj, const std::vector<double>& g_faces,
                std::vector<double>& increment) {
  for (size_t f = 0; f < inj.cells.size(); ++f)
    increment[inj.cells[f]] += inj.scales[f] * g_faces[f];
}

double injected_mass_rate(const FluxInjection& inj, const std::vector<double>& g_faces) {
  double s = 0.0;
  for (size_t f = 0; f < inj.cells.size(); ++f) s += inj.face_lengths[f] * g_faces[f];
  return s;
}

SparseOperator assemble_bulk_helmholtz(const BulkMesh& mesh, double d, double coef) {
  TripletBuilder b(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) b.add(c, c, mesh.cell_areas[c]);
  const double cd = coef * d;
  for (const InteriorFace& f : mesh.interior_faces) {
    const double t = cd * f.transmissibility;
    b.add(f.cell_a, f.cell_a, t);
    b.add(f.cell_b, f.cell_b, t);
    b.add(f.cell_a, f.cell_b, -t);
    b.add(f.cell_b, f.cell_a, -t);
  }
  return b.build(/*symmetric=*/true);
}

SparseOperator assemble_surface_helmholtz(const SurfaceMesh& surface, double d_tilde,
                                          double coef) {
  const int n = surface.n_nodes();
  const double h = surface.radius * surface.dtheta;
  TripletBuilder b(n);
  // Flux form: node weight w = h, transmissibility w_f = 1/h per link.
  const double t = coef * d_tilde / h;
  for (int j = 0; j < n; ++j) {
    b.add(j, j, surface.node_weights[j] + 2.0 * t);
    b.add(j, (j + 1) % n, -t);
    b.add(j, (j + n - 1) % n, -t);
  }
  return b.build(/*symmetric=*/true);
}

}  // namespace bsrd
