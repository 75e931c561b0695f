#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsrd/geometry.hpp"
#include "bsrd/monitors.hpp"
#include "bsrd/operators.hpp"
#include "bsrd/reaction_model.hpp"

namespace bsrd {

enum class TimeScheme { ImexBE, ImexCN };

/// Step-size control and run limits. Zero-valued thresholds are filled
/// in from the mesh and the initial data when the run starts:
///   dt_init          = min(dt_max, safety * dx_min^2 / d_max)
///   blowup_threshold = 1e6 * max(1, sup-norm of the initial data)
///   negativity_tol   = 1e-10 * max(1, sup-norm of the initial data)
struct StepControl {
  double dt_init = 0.0;
  double dt_min = 1e-8;
  double dt_max = 0.05;
  double safety = 0.1;
  double max_rel_change = 0.10;  // accepted-step relative change cap
  double blowup_threshold = 0.0;
  double negativity_tol = 0.0;
  int quiet_steps_before_double = 10;
  // Tighter than strictly needed for trajectory accuracy: the unsolved
  // residual is the only leak in the discrete mass ledger, and the
  // conservation budget of the conserving models is 1e-10 per run.
  double cg_rel_tol = 1e-12;
  int cg_max_iterations = 50000;
  TimeScheme scheme = TimeScheme::ImexBE;
};

enum class RunStatus { Completed, BlowupDetected, StepFailure };

struct RunOutcome {
  RunStatus status = RunStatus::Completed;
  double t_est = 0.0;         // blow-up detection time when applicable
  std::string reason;         // step failure context
  std::vector<State> trajectory;  // sampled snapshots, always includes first and last
  MonitorLog monitor_log;
  long long accepted_steps = 0;
  long long rejected_steps = 0;
};

struct MonitorSpec {
  std::vector<double> lp_exponents;          // per-species norms recorded each step
  double snapshot_interval = 0.0;            // 0 = ten snapshots over the run
  bool record_conserved = true;
};

struct CompatibilityReport {
  double max_residual = 0.0;
  int worst_face = -1;
  int worst_species = -1;
  bool within_tolerance = true;
};

struct Meshes {
  BulkMesh bulk;
  SurfaceMesh surface;
  TraceMap trace;
};

Meshes make_meshes(double radius, int n_r, int n_theta);

/// Residual of the compatibility condition D du0/dn = G(u0, v0) on the
/// boundary, using the same one-sided stencil as the coupling. Reports,
/// never aborts: the scheme tolerates mild incompatibility at the cost
/// of accuracy near t = 0.
CompatibilityReport check_compatibility(const ReactionSystem& sys,
                                        const SampledInitialData& data, const Meshes& meshes,
                                        double tol = 1e-8);

/// One IMEX step: diffusion implicit (backward Euler or Crank-Nicolson),
/// reactions H, F and boundary flux G explicit at the old state.
/// Throws on linear-solver failure.
State step(const State& state, const ReactionSystem& sys, const Meshes& meshes, double dt,
           const StepControl& control);

/// Adaptive time integration to t_end with blow-up detection per the
/// maximal-solution alternative: a blow-up is declared only when the
/// sup-norm exceeds the threshold while dt has been driven to dt_min.
RunOutcome simulate(const ReactionSystem& sys, const SampledInitialData& data,
                    const Meshes& meshes, StepControl control, double t_end,
                    const MonitorSpec& monitor_spec = {});

/// Linear heat problem with a prescribed boundary flux (time integration
/// of the pure Neumann problem): u_t = d Laplace(u), d du/dn = gamma on
/// the boundary, u(0) = 0. Fixed time step, backward Euler. Used as the
/// finite-volume reference for the boundary-integral solver.
struct NeumannReferenceResult {
  std::vector<double> times;
  std::vector<std::vector<double>> fields;  // per requested time, cell values
};
NeumannReferenceResult solve_heat_neumann(
    const BulkMesh& mesh, double d, const std::function<double(double theta, double t)>& gamma,
    double t_end, double dt, const std::vector<double>& sample_times, double cg_rel_tol = 1e-12);

/// Spatially uniform surface ODE preset (k = 1 inert bulk, m = 1,
/// F = v^2): finite-time blow-up fixture with v' = v^2.
BuiltinModel surface_ode_blowup_preset(double v0 = 2.0);

}  // namespace bsrd
