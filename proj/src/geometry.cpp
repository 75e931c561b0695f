#include "bsrd/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bsrd {

namespace {
constexpr double kPi = std::numbers::pi;
}

double BulkMesh::total_area() const {
  double s = 0.0;
  for (double a : cell_areas) s += a;
  return s;
}

double SurfaceMesh::total_length() const {
  double s = 0.0;
  for (double w : node_weights) s += w;
  return s;
}

BulkMesh build_disk_mesh(double radius, int n_r, int n_theta) {
  if (radius <= 0.0) throw ConfigError("build_disk_mesh: radius must be positive");
  if (n_r < 2) throw ConfigError("build_disk_mesh: n_r must be at least 2");
  if (n_theta < 4) throw ConfigError("build_disk_mesh: n_theta must be at least 4");

  BulkMesh mesh;
  mesh.radius = radius;
  mesh.n_r = n_r;
  mesh.n_theta = n_theta;
  mesh.dr = radius / n_r;
  mesh.dtheta = 2.0 * kPi / n_theta;

  const double dr = mesh.dr;
  const double dth = mesh.dtheta;

  mesh.cell_centers.resize(static_cast<size_t>(n_r) * n_theta);
  mesh.cell_areas.resize(static_cast<size_t>(n_r) * n_theta);
  for (int i = 0; i < n_r; ++i) {
    const double r_in = i * dr;
    const double r_out = (i + 1) * dr;
    const double area = 0.5 * (r_out * r_out - r_in * r_in) * dth;
    const double rc = (i + 0.5) * dr;
    for (int j = 0; j < n_theta; ++j) {
      const int c = mesh.cell_index(i, j);
      mesh.cell_centers[c] = {rc, (j + 0.5) * dth};
      mesh.cell_areas[c] = area;
    }
  }

  // Radial faces between ring i and i+1 sit at r = (i+1) dr.
  for (int i = 0; i + 1 < n_r; ++i) {
    const double r_f = (i + 1) * dr;
    const double len = r_f * dth;
    for (int j = 0; j < n_theta; ++j) {
      InteriorFace f;
      f.cell_a = mesh.cell_index(i, j);
      f.cell_b = mesh.cell_index(i + 1, j);
      f.face_length = len;
      f.center_distance = dr;
      f.transmissibility = len / dr;
      mesh.interior_faces.push_back(f);
    }
  }
  // Angular faces between sector j and j+1 (periodic) within each ring.
  // Center distance is the arc between cell centers at the ring radius.
  for (int i = 0; i < n_r; ++i) {
    const double rc = (i + 0.5) * dr;
    const double dist = rc * dth;
    for (int j = 0; j < n_theta; ++j) {
      InteriorFace f;
      f.cell_a = mesh.cell_index(i, j);
      f.cell_b = mesh.cell_index(i, (j + 1) % n_theta);
      f.face_length = dr;
      f.center_distance = dist;
      f.transmissibility = dr / dist;
      mesh.interior_faces.push_back(f);
    }
  }

  mesh.boundary_faces.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    BoundaryFace f;
    f.cell = mesh.cell_index(n_r - 1, j);
    f.arc_length = radius * dth;
    f.normal_angle = (j + 0.5) * dth;
    mesh.boundary_faces[j] = f;
  }
  return mesh;
}

SurfaceMesh build_surface_mesh(double radius, int n_theta) {
  if (radius <= 0.0) throw ConfigError("build_surface_mesh: radius must be positive");
  if (n_theta < 4) throw ConfigError("build_surface_mesh: n_theta must be at least 4");

  SurfaceMesh mesh;
  mesh.radius = radius;
  mesh.n_theta = n_theta;
  mesh.dtheta = 2.0 * kPi / n_theta;
  mesh.node_angles.resize(n_theta);
  mesh.node_weights.assign(n_theta, 2.0 * kPi * radius / n_theta);
  for (int j = 0; j < n_theta; ++j) mesh.node_angles[j] = (j + 0.5) * mesh.dtheta;
  return mesh;
}

TraceMap build_trace_map(const BulkMesh& bulk, const SurfaceMesh& surface) {
  if (bulk.n_theta != surface.n_theta)
    throw ConfigError("build_trace_map: bulk and surface n_theta differ (" +
                      std::to_string(bulk.n_theta) + " vs " +
                      std::to_string(surface.n_theta) + ")");
  if (bulk.radius != surface.radius)
    throw ConfigError("build_trace_map: bulk and surface radii differ");

  TraceMap map;
  map.n_pairs = bulk.n_theta;
  map.face_of_node.resize(map.n_pairs);
  map.node_of_face.resize(map.n_pairs);
  map.stencils.resize(map.n_pairs);
  for (int j = 0; j < map.n_pairs; ++j) {
    map.face_of_node[j] = j;
    map.node_of_face[j] = j;
    TraceMap::Stencil s;
    s.cell_near = bulk.cell_index(bulk.n_r - 1, j);
    s.cell_far = bulk.cell_index(bulk.n_r - 2, j);
    // Centers at R - dr/2 and R - 3dr/2; linear extrapolation to r = R.
    s.w_near = 1.5;
    s.w_far = -0.5;
    map.stencils[j] = s;
  }
  return map;
}

std::string mesh_summary_json(const BulkMesh& bulk, const SurfaceMesh& surface) {
  std::ostringstream os;
  os.precision(16);
  os << "{"
     << "\"radius\":" << bulk.radius << ","
     << "\"n_r\":" << bulk.n_r << ","
     << "\"n_theta\":" << bulk.n_theta << ","
     << "\"dr\":" << bulk.dr << ","
     << "\"dtheta\":" << bulk.dtheta << ","
     << "\"n_cells\":" << bulk.n_cells() << ","
     << "\"total_area\":" << bulk.total_area() << ","
     << "\"n_surface_nodes\":" << surface.n_nodes() << ","
     << "\"total_length\":" << surface.total_length()
     << "}";
  return os.str();
}

}  // namespace bsrd
