#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bsrd/integrator.hpp"

using namespace bsrd;

namespace {
constexpr double kPi = std::numbers::pi;

State make_state(const Meshes& meshes, int k, int m, double u_val, double v_val) {
  State s;
  s.u.assign(k, std::vector<double>(meshes.bulk.n_cells(), u_val));
  s.v.assign(m, std::vector<double>(meshes.surface.n_nodes(), v_val));
  return s;
}

}  // namespace

TEST_CASE("compatibility residual is zero for constant data with vanishing flux") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);

  SampledInitialData data;
  data.u = {std::vector<double>(meshes.bulk.n_cells(), 1.0)};
  data.v = {std::vector<double>(meshes.surface.n_nodes(), 0.0)};
  // G = -u^2 v^2 = 0 when v = 0, and du0/dn = 0: residual exactly zero.
  const CompatibilityReport rep = check_compatibility(model.system, data, meshes);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.within_tolerance);
}

TEST_CASE("compatibility residual reports the mismatch of 1 - r^2 data") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 16, 8);
  SampledInitialData data;
  data.u.assign(1, std::vector<double>(meshes.bulk.n_cells()));
  for (int c = 0; c < meshes.bulk.n_cells(); ++c) {
    const double r = meshes.bulk.cell_centers[c].r;
    data.u[0][c] = 1.0 - r * r;
  }
  data.v = {std::vector<double>(meshes.surface.n_nodes(), 1.0)};
  // Direct evaluation of the two sides: the one-sided slope of 1 - r^2
  // equals the exact derivative at the stencil midpoint, -2(R - dr),
  // and the trace is 0.75 dr^2, so G = -(0.75 dr^2)^2.
  const CompatibilityReport rep = check_compatibility(model.system, data, meshes, 1e-8);
  CHECK(!rep.within_tolerance);
  const double dr = meshes.bulk.dr;
  const double trace = 0.75 * dr * dr;
  const double expected = std::abs((-2.0 + 2.0 * dr) - (-trace * trace));
  CHECK(rep.max_residual == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("pure diffusion preserves a constant state to machine precision") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  ReactionSystem frozen = model.system;  // zero out all reactions
  frozen.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  frozen.F = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  frozen.G = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };

  State state = make_state(meshes, 1, 1, 1.0, 1.0);
  StepControl control;
  for (int n = 0; n < 20; ++n) state = step(state, frozen, meshes, 0.01, control);
  for (double x : state.u[0]) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : state.v[0]) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("surface eigenmode decays at the analytic rate") {
  const BuiltinModel model = builtin("toy_conserving");
  ReactionSystem frozen = model.system;
  frozen.F = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  frozen.G = frozen.F;
  frozen.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };

  const Meshes meshes = make_meshes(1.0, 4, 128);
  State state = make_state(meshes, 1, 1, 0.0, 0.0);
  for (int n = 0; n < meshes.surface.n_nodes(); ++n)
    state.v[0][n] = std::cos(meshes.surface.node_angles[n]);

  StepControl control;
  const double dt = 1e-3;
  const int steps = 500;
  for (int n = 0; n < steps; ++n) state = step(state, frozen, meshes, dt, control);

  const double t = dt * steps;
  double err = 0.0;
  for (int n = 0; n < meshes.surface.n_nodes(); ++n)
    err = std::max(err, std::abs(state.v[0][n] -
                                 std::exp(-t) * std::cos(meshes.surface.node_angles[n])));
  CHECK(err <= 5e-4);  // O(dtheta^2 + dt)
}

TEST_CASE("one toy_conserving step keeps total mass to machine precision") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  State state = make_state(meshes, 1, 1, 1.0, 1.0);
  StepControl control;

  const double mass0 = mass(state, meshes.bulk, meshes.surface, {1.0}, {1.0});
  const State next = step(state, model.system, meshes, 5e-3, control);
  const double mass1 = mass(next, meshes.bulk, meshes.surface, {1.0}, {1.0});
  CHECK(mass1 == doctest::Approx(mass0).epsilon(1e-12));
}

TEST_CASE("discrete mass ledger matches the injected reaction budget per step") {
  const BuiltinModel model = builtin("min_system");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);

  StepControl control;
  control.dt_max = 1e-2;
  MonitorSpec spec;
  const RunOutcome out = simulate(model.system, data, meshes, control, 0.05, spec);
  REQUIRE(out.status == RunStatus::Completed);
  for (size_t n = 1; n < out.monitor_log.rows.size(); ++n) {
    const MonitorRow& row = out.monitor_log.rows[n];
    for (size_t s = 0; s < row.bulk_mass.size(); ++s) {
      const double expected = row.bulk_mass_old[s] + row.dt * row.bulk_reaction_rate[s];
      CHECK(row.bulk_mass[s] == doctest::Approx(expected).epsilon(1e-10));
    }
    for (size_t s = 0; s < row.surf_mass.size(); ++s) {
      const double expected = row.surf_mass_old[s] + row.dt * row.surf_reaction_rate[s];
      CHECK(row.surf_mass[s] == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("simulate completes toy_conserving with tiny mass drift") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  StepControl control;
  const RunOutcome out = simulate(model.system, data, meshes, control, 1.0, {});
  CHECK(out.status == RunStatus::Completed);
  CHECK(out.monitor_log.conserved_drift(0) <= 1e-10);
  CHECK(out.monitor_log.rows.back().t == doctest::Approx(1.0));
}

TEST_CASE("uniform surface ODE blow-up is detected near the analytic time") {
  const BuiltinModel model = surface_ode_blowup_preset(2.0);
  const Meshes meshes = make_meshes(1.0, 4, 16);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  StepControl control;
  const RunOutcome out = simulate(model.system, data, meshes, control, 10.0, {});
  REQUIRE(out.status == RunStatus::BlowupDetected);
  // v' = v^2 from v0 = 2 blows up at t = 1/2.
  CHECK(out.t_est >= 0.45);
  CHECK(out.t_est <= 0.55);
}

TEST_CASE("toy_conserving never triggers the blow-up detector on [0, 10]") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 6, 12);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  StepControl control;
  const RunOutcome out = simulate(model.system, data, meshes, control, 10.0, {});
  CHECK(out.status == RunStatus::Completed);
}

TEST_CASE("trajectories are bitwise reproducible and stable to data perturbations") {
  const BuiltinModel model = builtin("min_system");
  const Meshes meshes = make_meshes(1.0, 6, 12);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  StepControl control;
  control.dt_max = 0.02;

  const RunOutcome a = simulate(model.system, data, meshes, control, 0.5, {});
  const RunOutcome b = simulate(model.system, data, meshes, control, 0.5, {});
  REQUIRE(a.status == RunStatus::Completed);
  for (size_t s = 0; s < a.trajectory.back().u.size(); ++s)
    for (size_t c = 0; c < a.trajectory.back().u[s].size(); ++c)
      CHECK(a.trajectory.back().u[s][c] == b.trajectory.back().u[s][c]);  // bitwise

  // Gronwall-type stability: an O(eps) data perturbation stays O(eps).
  const double eps = 1e-8;
  SampledInitialData perturbed = data;
  for (auto& f : perturbed.u)
    for (double& x : f) x += eps;
  const RunOutcome c = simulate(model.system, perturbed, meshes, control, 0.5, {});
  double diff = 0.0;
  for (size_t s = 0; s < a.trajectory.back().u.size(); ++s)
    for (size_t cc = 0; cc < a.trajectory.back().u[s].size(); ++cc)
      diff = std::max(diff,
                      std::abs(a.trajectory.back().u[s][cc] - c.trajectory.back().u[s][cc]));
  CHECK(diff <= 1e4 * eps);
  CHECK(diff > 0.0);
}

TEST_CASE("nonnegativity holds for quasi-positive built-ins with nonnegative data") {
  for (const std::string& name : {"min_system", "toy_conserving", "signaling"}) {
    const BuiltinModel model = builtin(name);
    const Meshes meshes = make_meshes(1.0, 6, 12);
    const SampledInitialData data =
        sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
    StepControl control;
    const RunOutcome out = simulate(model.system, data, meshes, control, 1.0, {});
    REQUIRE(out.status == RunStatus::Completed);
    CHECK(out.monitor_log.min_over_trajectory() >= -1e-9);
  }
}

TEST_CASE("Crank-Nicolson scheme also preserves the conserved total") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  const SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  StepControl control;
  control.scheme = TimeScheme::ImexCN;
  const RunOutcome out = simulate(model.system, data, meshes, control, 0.5, {});
  CHECK(out.status == RunStatus::Completed);
  CHECK(out.monitor_log.conserved_drift(0) <= 1e-10);
}

TEST_CASE("heat Neumann reference: uniform influx grows mass linearly") {
  const BulkMesh mesh = build_disk_mesh(1.0, 16, 16);
  const auto gamma = [](double, double) { return 1.0; };
  const NeumannReferenceResult ref = solve_heat_neumann(mesh, 1.0, gamma, 0.2, 1e-3, {0.1, 0.2});
  REQUIRE(ref.times.size() == 2);
  for (size_t i = 0; i < ref.times.size(); ++i) {
    double total = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) total += mesh.cell_areas[c] * ref.fields[i][c];
    // d/dt mass = boundary integral of gamma = 2 pi.
    CHECK(total == doctest::Approx(2.0 * kPi * ref.times[i]).epsilon(1e-9));
  }
}

TEST_CASE("step rejects nonpositive dt") {
  const BuiltinModel model = builtin("toy_conserving");
  const Meshes meshes = make_meshes(1.0, 4, 8);
  const State state = make_state(meshes, 1, 1, 1.0, 1.0);
  CHECK_THROWS_AS(step(state, model.system, meshes, 0.0, StepControl{}), ConfigError);
}

TEST_CASE("linear-solver starvation surfaces as a step failure with context") {
  const BuiltinModel model = builtin("min_system");
  const Meshes meshes = make_meshes(1.0, 8, 16);
  SampledInitialData data =
      sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
  // Perturb so the first implicit solve is not already converged.
  for (int c = 0; c < meshes.bulk.n_cells(); ++c)
    data.u[0][c] += 0.3 * std::sin(meshes.bulk.cell_centers[c].theta);
  StepControl control;
  control.cg_max_iterations = 1;
  const RunOutcome out = simulate(model.system, data, meshes, control, 0.1, {});
  CHECK(out.status == RunStatus::StepFailure);
  CHECK(out.reason.find("implicit solve failed") != std::string::npos);
}

TEST_CASE("monitor timestamps are strictly increasing over accepted steps") {
  const RunOutcome out = [] {
    const BuiltinModel model = builtin("signaling");
    const Meshes meshes = make_meshes(1.0, 6, 12);
    const SampledInitialData data =
        sample_initial_data(model.initial, model.system, meshes.bulk, meshes.surface);
    return simulate(model.system, data, meshes, StepControl{}, 0.5, {});
  }();
  REQUIRE(out.status == RunStatus::Completed);
  for (size_t n = 1; n < out.monitor_log.rows.size(); ++n)
    CHECK(out.monitor_log.rows[n].t > out.monitor_log.rows[n - 1].t);
}
