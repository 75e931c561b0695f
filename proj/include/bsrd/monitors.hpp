#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bsrd/geometry.hpp"
#include "bsrd/reaction_model.hpp"

namespace bsrd {

/// Paired bulk/surface field at one time instant. Species-major layout.
struct State {
  double t = 0.0;
  std::vector<std::vector<double>> u;  // [bulk species][cell]
  std::vector<std::vector<double>> v;  // [surface species][node]
};

enum class Domain { Bulk, Surface };

/// One accepted time step's worth of observables. Quantities suffixed
/// _old are evaluated at the step's starting state, matching the
/// explicit treatment of the reaction terms.
struct MonitorRow {
  double t = 0.0;
  double dt = 0.0;
  std::vector<double> bulk_mass;        // integral of u_j over the disk
  std::vector<double> surf_mass;        // integral of v_i over the circle
  std::vector<double> bulk_trace_old;   // boundary integral of traced u_j, old state
  std::vector<double> bulk_mass_old;
  std::vector<double> surf_mass_old;
  std::vector<double> bulk_reaction_rate;  // integral H_j + boundary integral G_j, old state
  std::vector<double> surf_reaction_rate;  // boundary integral F_i, old state
  std::vector<double> sup;              // per species, bulk then surface, new state
  std::vector<double> min;              // per species, bulk then surface, new state
  std::vector<double> conserved;        // conserved-combination values, new state
  std::vector<std::vector<double>> lp_bulk;  // [species][p index]
  std::vector<std::vector<double>> lp_surf;
};

struct MonitorEvent {
  double t = 0.0;
  std::string kind;
  std::string detail;
};

struct MonitorLog {
  std::vector<double> lp_exponents;  // configured p values for the lp columns
  std::vector<std::string> conserved_labels;
  std::vector<MonitorRow> rows;      // rows[0] is the initial state with dt = 0
  std::vector<MonitorEvent> events;

  double min_over_trajectory() const;
  /// Relative drift of conserved combination c: max |value - value0| / max(|value0|, eps).
  double conserved_drift(size_t c) const;
};

/// Quadrature of cu . u over the disk plus cv . v over the circle.
double mass(const State& state, const BulkMesh& bulk, const SurfaceMesh& surface,
            const std::vector<double>& cu, const std::vector<double>& cv);

/// Quadrature-weighted p-norm of one species on one domain; p may be
/// infinity.
double lp_norm(const State& state, const BulkMesh& bulk, const SurfaceMesh& surface,
               double p, int species, Domain domain);

struct GronwallReport {
  bool holds = true;
  bool envelope_holds = true;
  double first_violation_time = std::numeric_limits<double>::quiet_NaN();
  double max_excess = 0.0;          // worst (lhs - rhs) / scale over the log
  double max_envelope_ratio = 0.0;  // worst mass / envelope over the log
  int steps_checked = 0;

  std::string to_json() const;
};

/// Per-step discrete differential inequality behind the mass estimate:
///   d/dt [ int u_j + sigma int v_i ]
///     <= beta (int u_j + |Omega|) + alpha (int_M u_j + int_M v_i + |M|)
/// with the backward difference over each accepted step and right side
/// evaluated at the step's starting state, plus the integrated
/// exponential envelope E with E(0) = M(0) and
///   E' = (alpha + beta) E + beta |Omega| + alpha |M| + alpha T(t),
/// T the monitored boundary trace integral of u_j. Indices are 1-based.
GronwallReport assert_gronwall(const MonitorLog& log, int i, int j, double alpha, double beta,
                               double sigma, double area_omega, double length_m,
                               double rel_tol = 1e-8);

}  // namespace bsrd
