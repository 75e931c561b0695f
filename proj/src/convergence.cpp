#include "bsrd/convergence.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bsrd/integrator.hpp"
#include "bsrd/linear_solver.hpp"
#include "bsrd/operators.hpp"
#include "bsrd/reaction_model.hpp"

namespace bsrd {

namespace {

constexpr double kPi = std::numbers::pi;

/// Backward Euler decay of the cos mode on the circle; returns the
/// max-norm error against the continuous solution exp(-t) cos(theta).
double surface_eigenmode_error(int n_theta, double dt, double t_end) {
  const SurfaceMesh surface = build_surface_mesh(1.0, n_theta);
  const SparseOperator w = assemble_surface_helmholtz(surface, 1.0, dt);
  std::vector<double> v(n_theta), b(n_theta);
  for (int j = 0; j < n_theta; ++j) v[j] = std::cos(surface.node_angles[j]);

  const long long n_steps = std::llround(t_end / dt);
  for (long long n = 0; n < n_steps; ++n) {
    for (int j = 0; j < n_theta; ++j) b[j] = surface.node_weights[j] * v[j];
    const CgResult res = solve_cg(w, b, v, 1e-13, 100000);
    if (!res.converged) throw std::runtime_error("surface eigenmode solve failed");
  }
  double err = 0.0;
  const double decay = std::exp(-t_end);
  for (int j = 0; j < n_theta; ++j)
    err = std::max(err, std::abs(v[j] - decay * std::cos(surface.node_angles[j])));
  return err;
}

/// Manufactured radial solution u*(r, t) = (1 + t) cos(a r^2) with
/// a = pi / (2 R^2); the source is taken at the new time level so the
/// linear-in-time factor makes backward Euler exact in time and the
/// ladder isolates the spatial order.
double bulk_manufactured_error(int n_r, double dt, double t_end) {
  const double radius = 1.0;
  const int n_theta = 8;
  const double a = kPi / (2.0 * radius * radius);
  const BulkMesh mesh = build_disk_mesh(radius, n_r, n_theta);
  const double d = 1.0;

  auto exact = [&](double r, double t) { return (1.0 + t) * std::cos(a * r * r); };
  auto laplacian_exact = [&](double r, double t) {
    return (1.0 + t) *
           (-4.0 * a * std::sin(a * r * r) - 4.0 * a * a * r * r * std::cos(a * r * r));
  };
  auto source = [&](double r, double t) {
    return std::cos(a * r * r) - d * laplacian_exact(r, t);
  };
  // d du*/dr at r = R: -(1+t) * 2 a R sin(a R^2).
  auto boundary_flux = [&](double t) {
    return -d * (1.0 + t) * 2.0 * a * radius * std::sin(a * radius * radius);
  };

  const SparseOperator w = assemble_bulk_helmholtz(mesh, d, dt);
  std::vector<double> u(mesh.n_cells()), b(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) u[c] = exact(mesh.cell_centers[c].r, 0.0);

  const long long n_steps = std::llround(t_end / dt);
  for (long long n = 0; n < n_steps; ++n) {
    const double t_new = (n + 1) * dt;
    for (int c = 0; c < mesh.n_cells(); ++c)
      b[c] = mesh.cell_areas[c] *
             (u[c] + dt * source(mesh.cell_centers[c].r, t_new));
    for (const BoundaryFace& f : mesh.boundary_faces)
      b[f.cell] += dt * f.arc_length * boundary_flux(t_new);
    const CgResult res = solve_cg(w, b, u, 1e-13, 100000);
    if (!res.converged) throw std::runtime_error("bulk manufactured solve failed");
  }
  double err = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c)
    err = std::max(err, std::abs(u[c] - exact(mesh.cell_centers[c].r, t_end)));
  return err;
}

/// Temporal self-convergence of the coupled toy system against a run
/// at one quarter of the finest ladder step.
double coupled_toy_error(double dt, double dt_ref, double t_end) {
  BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  const SampledInitialData data = sample_initial_data(model.initial, model.system, meshes.bulk,
                                                      meshes.surface);
  auto run_fixed = [&](double step_dt) {
    StepControl control;
    control.dt_init = step_dt;
    control.dt_min = step_dt;
    control.dt_max = step_dt;
    control.max_rel_change = 1e9;  // fixed-step run
    MonitorSpec spec;
    spec.snapshot_interval = t_end;
    const RunOutcome out = simulate(model.system, data, meshes, control, t_end, spec);
    if (out.status != RunStatus::Completed)
      throw std::runtime_error("coupled toy run did not complete");
    return out.trajectory.back();
  };
  const State ref = run_fixed(dt_ref);
  const State sol = run_fixed(dt);
  double err = 0.0;
  for (size_t s = 0; s < sol.u.size(); ++s)
    for (size_t c = 0; c < sol.u[s].size(); ++c)
      err = std::max(err, std::abs(sol.u[s][c] - ref.u[s][c]));
  for (size_t s = 0; s < sol.v.size(); ++s)
    for (size_t n = 0; n < sol.v[s].size(); ++n)
      err = std::max(err, std::abs(sol.v[s][n] - ref.v[s][n]));
  return err;
}

}  // namespace

std::string ConvergenceResult::to_json() const {
  std::ostringstream os;
  os.precision(16);
  os << "{\"h\":[";
  for (size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << "],\"errors\":[";
  for (size_t i = 0; i < errors.size(); ++i) os << (i ? "," : "") << errors[i];
  os << "],\"fitted_order\":" << fitted_order << ",\"fit_residual\":" << fit_residual
     << ",\"monotone\":" << (monotone ? "true" : "false") << "}";
  return os.str();
}

ConvergenceResult converge(const ConvergenceStudy& study) {
  if (study.levels.size() < 3)
    throw ConfigError("convergence ladder needs at least 3 levels (got " +
                      std::to_string(study.levels.size()) + ")");

  ConvergenceResult result;
  for (double level : study.levels) {
    double h = 0.0, err = 0.0;
    if (study.preset == "surface_eigenmode") {
      const int n = static_cast<int>(level);
      h = 2.0 * kPi / n;
      err = surface_eigenmode_error(n, study.dt, study.t_end);
    } else if (study.preset == "surface_eigenmode_dt") {
      h = level;
      err = surface_eigenmode_error(256, level, study.t_end);
    } else if (study.preset == "bulk_manufactured") {
      const int n = static_cast<int>(level);
      h = 1.0 / n;
      err = bulk_manufactured_error(n, study.dt, study.t_end);
    } else if (study.preset == "coupled_toy") {
      double dt_finest = study.levels.back();
      for (double l : study.levels) dt_finest = std::min(dt_finest, l);
      h = level;
      err = coupled_toy_error(level, 0.25 * dt_finest, study.t_end);
    } else {
      throw ConfigError("unknown convergence preset \"" + study.preset + "\"");
    }
    result.h.push_back(h);
    result.errors.push_back(err);
  }

  for (size_t i = 1; i < result.errors.size(); ++i)
    if (result.errors[i] >= result.errors[i - 1] && result.h[i] < result.h[i - 1])
      result.monotone = false;

  // Least-squares slope of log(error) vs log(h).
  const size_t n = result.h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(result.h[i]);
    const double y = std::log(std::max(result.errors[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  result.fitted_order = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - result.fitted_order * sx) / n;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pred = intercept + result.fitted_order * std::log(result.h[i]);
    const double res = std::log(std::max(result.errors[i], 1e-300)) - pred;
    ss += res * res;
  }
  result.fit_residual = std::sqrt(ss / n);
  return result;
}

}  // namespace bsrd
