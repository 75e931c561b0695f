#include "bsrd/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsrd/linear_solver.hpp"

namespace bsrd {

namespace {

double sup_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const std::vector<double>& x) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : x) m = std::min(m, v);
  return m;
}

double data_scale(const SampledInitialData& data) {
  double s = 1.0;
  for (const auto& f : data.u) s = std::max(s, sup_abs(f));
  for (const auto& f : data.v) s = std::max(s, sup_abs(f));
  return s;
}

double state_sup(const State& state) {
  double s = 0.0;
  for (const auto& f : state.u) s = std::max(s, sup_abs(f));
  for (const auto& f : state.v) s = std::max(s, sup_abs(f));
  return s;
}

/// Flux-form Laplacian application: out_c = sum over faces of
/// t_f (u_nbr - u_c), area-weighted (used by the Crank-Nicolson rhs).
void apply_flux_form(const BulkMesh& mesh, const std::vector<double>& u,
                     std::vector<double>& out) {
  out.assign(mesh.n_cells(), 0.0);
  for (const InteriorFace& f : mesh.interior_faces) {
    const double delta = f.transmissibility * (u[f.cell_b] - u[f.cell_a]);
    out[f.cell_a] += delta;
    out[f.cell_b] -= delta;
  }
}

void apply_flux_form_surface(const SurfaceMesh& surface, const std::vector<double>& v,
                             std::vector<double>& out) {
  const int n = surface.n_nodes();
  const double h = surface.radius * surface.dtheta;
  out.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double delta = (v[(j + 1) % n] - v[j]) / h;
    out[j] += delta;
    out[(j + 1) % n] -= delta;
  }
}

/// Explicit reaction data for one step, evaluated at the old state with
/// shared face/node quadrature so paired flux and surface gain cancel
/// exactly for conserved combinations.
struct ExplicitTerms {
  std::vector<std::vector<double>> H;       // [bulk species][cell]
  std::vector<std::vector<double>> G_face;  // [bulk species][boundary face]
  std::vector<std::vector<double>> F_node;  // [surface species][node]
  std::vector<std::vector<double>> trace_u; // [bulk species][face]
  std::vector<double> bulk_rate;            // per species: int H + boundary int G
  std::vector<double> surf_rate;            // per species: boundary int F
};

ExplicitTerms evaluate_explicit(const State& state, const ReactionSystem& sys,
                                const Meshes& meshes) {
  const int n_cells = meshes.bulk.n_cells();
  const int n_faces = static_cast<int>(meshes.bulk.boundary_faces.size());
  ExplicitTerms terms;
  terms.H.assign(sys.k, std::vector<double>(n_cells, 0.0));
  terms.G_face.assign(sys.k, std::vector<double>(n_faces, 0.0));
  terms.F_node.assign(sys.m, std::vector<double>(meshes.surface.n_nodes(), 0.0));
  terms.trace_u.assign(sys.k, std::vector<double>(n_faces, 0.0));
  terms.bulk_rate.assign(sys.k, 0.0);
  terms.surf_rate.assign(sys.m, 0.0);

  std::vector<double> u_point(sys.k), v_point(sys.m);
  for (int c = 0; c < n_cells; ++c) {
    for (int s = 0; s < sys.k; ++s) u_point[s] = state.u[s][c];
    const std::vector<double> h = sys.H(u_point);
    for (int s = 0; s < sys.k; ++s) {
      if (!std::isfinite(h[s]))
        throw ModelEvalError("non-finite H during step at cell " + std::to_string(c));
      terms.H[s][c] = h[s];
      terms.bulk_rate[s] += meshes.bulk.cell_areas[c] * h[s];
    }
  }
  for (int f = 0; f < n_faces; ++f) {
    const int node = meshes.trace.node_of_face[f];
    for (int s = 0; s < sys.k; ++s) {
      terms.trace_u[s][f] = meshes.trace.trace(state.u[s], f);
      u_point[s] = terms.trace_u[s][f];
    }
    for (int s = 0; s < sys.m; ++s) v_point[s] = state.v[s][node];
    const std::vector<double> g = sys.G(u_point, v_point);
    const std::vector<double> fv = sys.F(u_point, v_point);
    const double len = meshes.bulk.boundary_faces[f].arc_length;
    for (int s = 0; s < sys.k; ++s) {
      if (!std::isfinite(g[s]))
        throw ModelEvalError("non-finite G during step at face " + std::to_string(f));
      terms.G_face[s][f] = g[s];
      terms.bulk_rate[s] += len * g[s];
    }
    for (int s = 0; s < sys.m; ++s) {
      if (!std::isfinite(fv[s]))
        throw ModelEvalError("non-finite F during step at face " + std::to_string(f));
      terms.F_node[s][node] = fv[s];
      terms.surf_rate[s] += meshes.surface.node_weights[node] * fv[s];
    }
  }
  return terms;
}

/// Implicit diffusion operators for one (dt, scheme) setting.
struct ImplicitOperators {
  double dt = -1.0;
  TimeScheme scheme = TimeScheme::ImexBE;
  std::vector<SparseOperator> bulk;     // per bulk species
  std::vector<SparseOperator> surface;  // per surface species

  void rebuild(const ReactionSystem& sys, const Meshes& meshes, double new_dt,
               TimeScheme new_scheme) {
    if (new_dt == dt && new_scheme == scheme && !bulk.empty()) return;
    dt = new_dt;
    scheme = new_scheme;
    const double coef = (scheme == TimeScheme::ImexCN) ? 0.5 * dt : dt;
    bulk.clear();
    surface.clear();
    for (int s = 0; s < sys.k; ++s)
      bulk.push_back(assemble_bulk_helmholtz(meshes.bulk, sys.D[s], coef));
    for (int s = 0; s < sys.m; ++s)
      surface.push_back(assemble_surface_helmholtz(meshes.surface, sys.D_tilde[s], coef));
  }
};

State advance(const State& state, const ReactionSystem& sys, const Meshes& meshes, double dt,
              const StepControl& control, ImplicitOperators& ops, const ExplicitTerms& terms) {
  ops.rebuild(sys, meshes, dt, control.scheme);
  const int n_cells = meshes.bulk.n_cells();
  const int n_nodes = meshes.surface.n_nodes();
  State next;
  next.t = state.t + dt;
  next.u.assign(sys.k, std::vector<double>(n_cells, 0.0));
  next.v.assign(sys.m, std::vector<double>(n_nodes, 0.0));

  std::vector<double> b(n_cells), flux_old;
  for (int s = 0; s < sys.k; ++s) {
    for (int c = 0; c < n_cells; ++c)
      b[c] = meshes.bulk.cell_areas[c] * (state.u[s][c] + dt * terms.H[s][c]);
    for (size_t f = 0; f < meshes.bulk.boundary_faces.size(); ++f)
      b[meshes.bulk.boundary_faces[f].cell] +=
          dt * meshes.bulk.boundary_faces[f].arc_length * terms.G_face[s][f];
    if (control.scheme == TimeScheme::ImexCN) {
      apply_flux_form(meshes.bulk, state.u[s], flux_old);
      for (int c = 0; c < n_cells; ++c) b[c] += 0.5 * dt * sys.D[s] * flux_old[c];
    }
    next.u[s] = state.u[s];  // warm start
    const CgResult res = solve_cg(ops.bulk[s], b, next.u[s], control.cg_rel_tol,
                                  control.cg_max_iterations);
    if (!res.converged) {
      std::ostringstream os;
      os << "bulk implicit solve failed for species " << (s + 1) << " at t = " << state.t
         << " (dt = " << dt << ", residual = " << res.relative_residual << ")";
      throw std::runtime_error(os.str());
    }
  }

  std::vector<double> bs(n_nodes), flux_s;
  for (int s = 0; s < sys.m; ++s) {
    for (int n = 0; n < n_nodes; ++n)
      bs[n] = meshes.surface.node_weights[n] * (state.v[s][n] + dt * terms.F_node[s][n]);
    if (control.scheme == TimeScheme::ImexCN) {
      apply_flux_form_surface(meshes.surface, state.v[s], flux_s);
      for (int n = 0; n < n_nodes; ++n) bs[n] += 0.5 * dt * sys.D_tilde[s] * flux_s[n];
    }
    next.v[s] = state.v[s];
    const CgResult res = solve_cg(ops.surface[s], bs, next.v[s], control.cg_rel_tol,
                                  control.cg_max_iterations);
    if (!res.converged) {
      std::ostringstream os;
      os << "surface implicit solve failed for species " << (s + 1) << " at t = " << state.t;
      throw std::runtime_error(os.str());
    }
  }
  return next;
}

MonitorRow make_row(const State& new_state, const State& old_state, double dt,
                    const ReactionSystem& sys, const Meshes& meshes,
                    const ExplicitTerms& terms, const MonitorSpec& spec) {
  MonitorRow row;
  row.t = new_state.t;
  row.dt = dt;
  row.bulk_mass.resize(sys.k);
  row.bulk_mass_old.resize(sys.k);
  row.bulk_trace_old.resize(sys.k);
  row.surf_mass.resize(sys.m);
  row.surf_mass_old.resize(sys.m);
  row.bulk_reaction_rate = terms.bulk_rate;
  row.surf_reaction_rate = terms.surf_rate;

  for (int s = 0; s < sys.k; ++s) {
    double m_new = 0.0, m_old = 0.0;
    for (int c = 0; c < meshes.bulk.n_cells(); ++c) {
      m_new += meshes.bulk.cell_areas[c] * new_state.u[s][c];
      m_old += meshes.bulk.cell_areas[c] * old_state.u[s][c];
    }
    row.bulk_mass[s] = m_new;
    row.bulk_mass_old[s] = m_old;
    double tr = 0.0;
    for (size_t f = 0; f < meshes.bulk.boundary_faces.size(); ++f)
      tr += meshes.bulk.boundary_faces[f].arc_length * terms.trace_u[s][f];
    row.bulk_trace_old[s] = tr;
  }
  for (int s = 0; s < sys.m; ++s) {
    double m_new = 0.0, m_old = 0.0;
    for (int n = 0; n < meshes.surface.n_nodes(); ++n) {
      m_new += meshes.surface.node_weights[n] * new_state.v[s][n];
      m_old += meshes.surface.node_weights[n] * old_state.v[s][n];
    }
    row.surf_mass[s] = m_new;
    row.surf_mass_old[s] = m_old;
  }

  for (int s = 0; s < sys.k; ++s) {
    row.sup.push_back(sup_abs(new_state.u[s]));
    row.min.push_back(min_value(new_state.u[s]));
  }
  for (int s = 0; s < sys.m; ++s) {
    row.sup.push_back(sup_abs(new_state.v[s]));
    row.min.push_back(min_value(new_state.v[s]));
  }
  if (spec.record_conserved) {
    for (const auto& combo : sys.conserved)
      row.conserved.push_back(mass(new_state, meshes.bulk, meshes.surface, combo.cu, combo.cv));
  }
  if (!spec.lp_exponents.empty()) {
    row.lp_bulk.assign(sys.k, {});
    row.lp_surf.assign(sys.m, {});
    for (int s = 0; s < sys.k; ++s)
      for (double p : spec.lp_exponents)
        row.lp_bulk[s].push_back(lp_norm(new_state, meshes.bulk, meshes.surface, p, s, Domain::Bulk));
    for (int s = 0; s < sys.m; ++s)
      for (double p : spec.lp_exponents)
        row.lp_surf[s].push_back(
            lp_norm(new_state, meshes.bulk, meshes.surface, p, s, Domain::Surface));
  }
  return row;
}

}  // namespace

Meshes make_meshes(double radius, int n_r, int n_theta) {
  Meshes m;
  m.bulk = build_disk_mesh(radius, n_r, n_theta);
  m.surface = build_surface_mesh(radius, n_theta);
  m.trace = build_trace_map(m.bulk, m.surface);
  return m;
}

CompatibilityReport check_compatibility(const ReactionSystem& sys,
                                        const SampledInitialData& data, const Meshes& meshes,
                                        double tol) {
  CompatibilityReport report;
  std::vector<double> u_point(sys.k), v_point(sys.m);
  for (size_t f = 0; f < meshes.bulk.boundary_faces.size(); ++f) {
    const int node = meshes.trace.node_of_face[f];
    for (int s = 0; s < sys.k; ++s)
      u_point[s] = meshes.trace.trace(data.u[s], static_cast<int>(f));
    for (int s = 0; s < sys.m; ++s) v_point[s] = data.v[s][node];
    const std::vector<double> g = sys.G(u_point, v_point);
    for (int s = 0; s < sys.k; ++s) {
      const double dn = meshes.trace.normal_derivative(data.u[s], static_cast<int>(f),
                                                       meshes.bulk.dr);
      const double residual = std::abs(sys.D[s] * dn - g[s]);
      if (residual > report.max_residual) {
        report.max_residual = residual;
        report.worst_face = static_cast<int>(f);
        report.worst_species = s + 1;
      }
    }
  }
  report.within_tolerance = report.max_residual <= tol;
  return report;
}

State step(const State& state, const ReactionSystem& sys, const Meshes& meshes, double dt,
           const StepControl& control) {
  if (dt <= 0.0) throw ConfigError("step: dt must be positive");
  ImplicitOperators ops;
  const ExplicitTerms terms = evaluate_explicit(state, sys, meshes);
  return advance(state, sys, meshes, dt, control, ops, terms);
}

RunOutcome simulate(const ReactionSystem& sys, const SampledInitialData& data,
                    const Meshes& meshes, StepControl control, double t_end,
                    const MonitorSpec& monitor_spec) {
  RunOutcome outcome;
  const double scale = data_scale(data);
  if (control.blowup_threshold <= 0.0) control.blowup_threshold = 1e6 * scale;
  if (control.negativity_tol <= 0.0) control.negativity_tol = 1e-10 * scale;
  if (control.dt_init <= 0.0) {
    double dx_min = meshes.bulk.dr;
    dx_min = std::min(dx_min, meshes.bulk.cell_centers[0].r * meshes.bulk.dtheta);
    dx_min = std::min(dx_min, meshes.surface.radius * meshes.surface.dtheta);
    double d_max = 0.0;
    for (double d : sys.D) d_max = std::max(d_max, d);
    for (double d : sys.D_tilde) d_max = std::max(d_max, d);
    if (d_max <= 0.0) d_max = 1.0;
    control.dt_init = std::min(control.dt_max, control.safety * dx_min * dx_min / d_max);
  }
  control.dt_min = std::min(control.dt_min, control.dt_init);

  State state;
  state.t = 0.0;
  state.u = data.u;
  state.v = data.v;

  MonitorLog& log = outcome.monitor_log;
  log.lp_exponents = monitor_spec.lp_exponents;
  for (const auto& combo : sys.conserved) log.conserved_labels.push_back(combo.label);
  {
    ExplicitTerms t0 = evaluate_explicit(state, sys, meshes);
    log.rows.push_back(make_row(state, state, 0.0, sys, meshes, t0, monitor_spec));
  }

  const double snapshot_interval =
      monitor_spec.snapshot_interval > 0.0 ? monitor_spec.snapshot_interval : t_end / 10.0;
  outcome.trajectory.push_back(state);
  double next_snapshot = snapshot_interval;

  ImplicitOperators ops;
  double dt = control.dt_init;
  int quiet_steps = 0;
  const double rel_floor = 1e-12 * scale;

  while (state.t < t_end * (1.0 - 1e-14)) {
    const double dt_try = std::min(dt, t_end - state.t);
    ExplicitTerms terms;
    State candidate;
    try {
      terms = evaluate_explicit(state, sys, meshes);
      candidate = advance(state, sys, meshes, dt_try, control, ops, terms);
    } catch (const std::exception& e) {
      outcome.status = RunStatus::StepFailure;
      outcome.reason = e.what();
      outcome.t_est = state.t;
      log.events.push_back({state.t, "step_failure", e.what()});
      return outcome;
    }

    // Trigger (a): negative undershoot beyond tolerance on a model
    // declared quasi-positive. Trigger (b): relative change cap.
    bool negativity = false;
    if (sys.quasi_positive_declared) {
      for (const auto& f : candidate.u) negativity |= min_value(f) < -control.negativity_tol;
      for (const auto& f : candidate.v) negativity |= min_value(f) < -control.negativity_tol;
    }
    double rel_change = 0.0;
    for (int s = 0; s < sys.k; ++s) {
      double diff = 0.0;
      for (int c = 0; c < meshes.bulk.n_cells(); ++c)
        diff = std::max(diff, std::abs(candidate.u[s][c] - state.u[s][c]));
      rel_change = std::max(rel_change, diff / std::max(sup_abs(state.u[s]), rel_floor));
    }
    for (int s = 0; s < sys.m; ++s) {
      double diff = 0.0;
      for (int n = 0; n < meshes.surface.n_nodes(); ++n)
        diff = std::max(diff, std::abs(candidate.v[s][n] - state.v[s][n]));
      rel_change = std::max(rel_change, diff / std::max(sup_abs(state.v[s]), rel_floor));
    }
    const bool triggered = negativity || rel_change > control.max_rel_change;

    if (triggered && dt > control.dt_min * (1.0 + 1e-12)) {
      dt = std::max(control.dt_min, 0.5 * dt);
      ++outcome.rejected_steps;
      quiet_steps = 0;
      log.events.push_back({state.t, negativity ? "dt_halved_negativity" : "dt_halved_change",
                            "dt -> " + std::to_string(dt)});
      continue;
    }

    state = candidate;
    ++outcome.accepted_steps;
    log.rows.push_back(make_row(state, state, dt_try, sys, meshes, terms, monitor_spec));
    // Old-state mass columns come from the previous accepted row.
    MonitorRow& row = log.rows.back();
    const MonitorRow& prev = log.rows[log.rows.size() - 2];
    row.bulk_mass_old = prev.bulk_mass;
    row.surf_mass_old = prev.surf_mass;

    if (triggered) {
      log.events.push_back({state.t, "dt_min_accept", "triggered step accepted at dt_min"});
      quiet_steps = 0;
    } else {
      ++quiet_steps;
    }

    if (state_sup(state) > control.blowup_threshold &&
        dt <= control.dt_min * (1.0 + 1e-12)) {
      outcome.status = RunStatus::BlowupDetected;
      outcome.t_est = state.t;
      log.events.push_back({state.t, "blowup_detected",
                            "sup-norm above threshold with dt at dt_min"});
      outcome.trajectory.push_back(state);
      return outcome;
    }

    if (quiet_steps >= control.quiet_steps_before_double && dt < control.dt_max) {
      dt = std::min(control.dt_max, 2.0 * dt);
      quiet_steps = 0;
      log.events.push_back({state.t, "dt_doubled", "dt -> " + std::to_string(dt)});
    }

    if (state.t >= next_snapshot * (1.0 - 1e-12)) {
      outcome.trajectory.push_back(state);
      next_snapshot += snapshot_interval;
    }
  }
  if (outcome.trajectory.back().t != state.t) outcome.trajectory.push_back(state);
  return outcome;
}

NeumannReferenceResult solve_heat_neumann(
    const BulkMesh& mesh, double d, const std::function<double(double theta, double t)>& gamma,
    double t_end, double dt, const std::vector<double>& sample_times, double cg_rel_tol) {
  NeumannReferenceResult result;
  const int n_cells = mesh.n_cells();
  const SparseOperator w = assemble_bulk_helmholtz(mesh, d, dt);
  std::vector<double> u(n_cells, 0.0), b(n_cells);
  std::vector<bool> sampled(sample_times.size(), false);

  const long long n_steps = std::llround(t_end / dt);
  double t = 0.0;
  for (long long n = 0; n < n_steps; ++n) {
    const double t_new = (n + 1 == n_steps) ? t_end : (n + 1) * dt;
    const double step_dt = t_new - t;
    // Fixed-step driver: reassemble only if the final step is clipped.
    const SparseOperator* op = &w;
    SparseOperator clipped;
    if (std::abs(step_dt - dt) > 1e-15 * dt) {
      clipped = assemble_bulk_helmholtz(mesh, d, step_dt);
      op = &clipped;
    }
    for (int c = 0; c < n_cells; ++c) b[c] = mesh.cell_areas[c] * u[c];
    for (const BoundaryFace& f : mesh.boundary_faces)
      b[f.cell] += step_dt * f.arc_length * gamma(f.normal_angle, t_new);
    const CgResult res = solve_cg(*op, b, u, cg_rel_tol, 100000);
    if (!res.converged)
      throw std::runtime_error("solve_heat_neumann: CG failed at t = " + std::to_string(t));
    t = t_new;
    for (size_t s = 0; s < sample_times.size(); ++s) {
      if (!sampled[s] && t >= sample_times[s] - 0.5 * dt) {
        result.times.push_back(t);
        result.fields.push_back(u);
        sampled[s] = true;
      }
    }
  }
  return result;
}

BuiltinModel surface_ode_blowup_preset(double v0) {
  BuiltinModel model;
  ReactionSystem& sys = model.system;
  sys.k = 1;
  sys.m = 1;
  sys.D = {1.0};
  sys.D_tilde = {1.0};
  sys.name = "surface_ode_blowup";
  sys.quasi_positive_declared = true;
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.G = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  sys.F = [](const std::vector<double>&, const std::vector<double>& v) {
    return std::vector<double>{v[0] * v[0]};
  };
  model.initial.u0 = [](double, double) { return std::vector<double>{0.0}; };
  model.initial.v0 = [v0](double) { return std::vector<double>{v0}; };
  return model;
}

}  // namespace bsrd
