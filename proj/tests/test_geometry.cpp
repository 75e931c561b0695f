#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bsrd/geometry.hpp"

using namespace bsrd;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("disk mesh partitions the disk area exactly") {
  const BulkMesh mesh = build_disk_mesh(1.0, 4, 8);
  CHECK(mesh.n_cells() == 32);
  CHECK(mesh.total_area() == doctest::Approx(kPi).epsilon(1e-12));

  const BulkMesh mesh2 = build_disk_mesh(2.0, 10, 16);
  CHECK(mesh2.total_area() == doctest::Approx(4.0 * kPi).epsilon(1e-12));
}

TEST_CASE("boundary faces cover the circle uniformly") {
  const BulkMesh mesh = build_disk_mesh(1.0, 4, 8);
  CHECK(mesh.boundary_faces.size() == 8);
  for (const BoundaryFace& f : mesh.boundary_faces) {
    CHECK(f.arc_length == doctest::Approx(2.0 * kPi / 8).epsilon(1e-14));
    // every boundary face belongs to an outermost-ring cell
    CHECK(f.cell >= mesh.cell_index(3, 0));
  }
}

TEST_CASE("no cell center sits at the origin") {
  const BulkMesh mesh = build_disk_mesh(1.0, 4, 8);
  for (const PolarPoint& p : mesh.cell_centers) CHECK(p.r >= mesh.dr / 2 - 1e-15);
  CHECK(mesh.cell_centers[0].r == doctest::Approx(mesh.dr / 2));
}

TEST_CASE("degenerate mesh parameters are rejected") {
  CHECK_THROWS_AS(build_disk_mesh(1.0, 1, 8), ConfigError);
  CHECK_THROWS_AS(build_disk_mesh(1.0, 4, 3), ConfigError);
  CHECK_THROWS_AS(build_disk_mesh(-1.0, 4, 8), ConfigError);
  CHECK_THROWS_AS(build_surface_mesh(1.0, 3), ConfigError);
}

TEST_CASE("surface mesh weights sum to the circumference") {
  const SurfaceMesh mesh = build_surface_mesh(1.0, 8);
  CHECK(mesh.total_length() == doctest::Approx(2.0 * kPi).epsilon(1e-12));

  const SurfaceMesh mesh2 = build_surface_mesh(3.0, 12);
  for (double w : mesh2.node_weights) CHECK(w == doctest::Approx(kPi / 2).epsilon(1e-14));

  for (int j = 1; j < mesh.n_nodes(); ++j) CHECK(mesh.node_angles[j] > mesh.node_angles[j - 1]);
  CHECK(mesh.node_angles.back() < 2.0 * kPi);
}

TEST_CASE("trace map pairs faces and nodes angle-consistently") {
  const BulkMesh bulk = build_disk_mesh(1.0, 4, 8);
  const SurfaceMesh surface = build_surface_mesh(1.0, 8);
  const TraceMap map = build_trace_map(bulk, surface);
  CHECK(map.n_pairs == 8);
  for (int f = 0; f < map.n_pairs; ++f) {
    const int node = map.node_of_face[f];
    CHECK(map.face_of_node[node] == f);  // face -> node -> face is the identity
    CHECK(std::abs(bulk.boundary_faces[f].normal_angle - surface.node_angles[node]) <
          bulk.dtheta / 2);
    CHECK(map.stencils[f].w_near + map.stencils[f].w_far == doctest::Approx(1.0));
  }
}

TEST_CASE("trace map rejects mismatched meshes") {
  const BulkMesh bulk = build_disk_mesh(1.0, 4, 8);
  CHECK_THROWS_AS(build_trace_map(bulk, build_surface_mesh(1.0, 16)), ConfigError);
  CHECK_THROWS_AS(build_trace_map(bulk, build_surface_mesh(2.0, 8)), ConfigError);
}

TEST_CASE("trace reproduces constants and linear-in-r fields exactly") {
  const BulkMesh bulk = build_disk_mesh(1.0, 4, 8);
  const SurfaceMesh surface = build_surface_mesh(1.0, 8);
  const TraceMap map = build_trace_map(bulk, surface);

  std::vector<double> constant(bulk.n_cells(), 3.25);
  std::vector<double> linear(bulk.n_cells());
  for (int c = 0; c < bulk.n_cells(); ++c) linear[c] = bulk.cell_centers[c].r;

  for (int f = 0; f < map.n_pairs; ++f) {
    CHECK(map.trace(constant, f) == doctest::Approx(3.25).epsilon(1e-15));
    // linear extrapolation of f(r) = r to the boundary radius is exact
    CHECK(map.trace(linear, f) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(map.normal_derivative(linear, f, bulk.dr) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("mesh summary is valid JSON-ish with expected totals") {
  const BulkMesh bulk = build_disk_mesh(1.0, 4, 8);
  const SurfaceMesh surface = build_surface_mesh(1.0, 8);
  const std::string json = mesh_summary_json(bulk, surface);
  CHECK(json.find("\"n_cells\":32") != std::string::npos);
  CHECK(json.find("\"n_r\":4") != std::string::npos);
}
