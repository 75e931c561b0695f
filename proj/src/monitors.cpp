#include "bsrd/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsrd {

double MonitorLog::min_over_trajectory() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : rows)
    for (double x : row.min) m = std::min(m, x);
  return m;
}

double MonitorLog::conserved_drift(size_t c) const {
  if (rows.empty() || c >= rows.front().conserved.size()) return 0.0;
  const double v0 = rows.front().conserved[c];
  const double scale = std::max(std::abs(v0), 1e-300);
  double drift = 0.0;
  for (const auto& row : rows)
    drift = std::max(drift, std::abs(row.conserved[c] - v0) / scale);
  return drift;
}

double mass(const State& state, const BulkMesh& bulk, const SurfaceMesh& surface,
            const std::vector<double>& cu, const std::vector<double>& cv) {
  double total = 0.0;
  for (size_t s = 0; s < cu.size(); ++s) {
    if (cu[s] == 0.0) continue;
    double acc = 0.0;
    for (int c = 0; c < bulk.n_cells(); ++c) acc += bulk.cell_areas[c] * state.u[s][c];
    total += cu[s] * acc;
  }
  for (size_t s = 0; s < cv.size(); ++s) {
    if (cv[s] == 0.0) continue;
    double acc = 0.0;
    for (int n = 0; n < surface.n_nodes(); ++n) acc += surface.node_weights[n] * state.v[s][n];
    total += cv[s] * acc;
  }
  return total;
}

double lp_norm(const State& state, const BulkMesh& bulk, const SurfaceMesh& surface,
               double p, int species, Domain domain) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1 or infinity");
  const std::vector<double>& field =
      domain == Domain::Bulk ? state.u[species] : state.v[species];
  const std::vector<double>& weights =
      domain == Domain::Bulk ? bulk.cell_areas : surface.node_weights;
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : field) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  for (size_t c = 0; c < field.size(); ++c) acc += weights[c] * std::pow(std::abs(field[c]), p);
  return std::pow(acc, 1.0 / p);
}

std::string GronwallReport::to_json() const {
  std::ostringstream os;
  os.precision(16);
  os << "{\"holds\":" << (holds ? "true" : "false") << ",\"envelope_holds\":"
     << (envelope_holds ? "true" : "false") << ",\"steps_checked\":" << steps_checked
     << ",\"max_excess\":" << max_excess << ",\"max_envelope_ratio\":" << max_envelope_ratio;
  if (!holds) os << ",\"first_violation_time\":" << first_violation_time;
  os << "}";
  return os.str();
}

GronwallReport assert_gronwall(const MonitorLog& log, int i, int j, double alpha, double beta,
                               double sigma, double area_omega, double length_m,
                               double rel_tol) {
  if (sigma <= 0.0 || alpha <= 0.0 || beta <= 0.0)
    throw ConfigError("assert_gronwall: alpha, beta, sigma must be positive");
  GronwallReport report;
  report.max_excess = -std::numeric_limits<double>::infinity();
  double envelope = log.rows.empty()
                        ? 0.0
                        : log.rows.front().bulk_mass[j - 1] +
                              sigma * log.rows.front().surf_mass[i - 1];
  for (size_t n = 1; n < log.rows.size(); ++n) {
    const MonitorRow& row = log.rows[n];
    if (row.dt <= 0.0) continue;
    const double mass_new = row.bulk_mass[j - 1] + sigma * row.surf_mass[i - 1];
    const double mass_old = row.bulk_mass_old[j - 1] + sigma * row.surf_mass_old[i - 1];
    const double lhs = (mass_new - mass_old) / row.dt;
    const double rhs = beta * (row.bulk_mass_old[j - 1] + area_omega) +
                       alpha * (row.bulk_trace_old[j - 1] + row.surf_mass_old[i - 1] + length_m);
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    const double excess = (lhs - rhs) / scale;
    report.max_excess = std::max(report.max_excess, excess);
    ++report.steps_checked;
    if (excess > rel_tol && report.holds) {
      report.holds = false;
      report.first_violation_time = row.t;
    }
    // Integrated envelope: explicit Euler on E' = c E + beta |Omega| +
    // alpha |M| + alpha T with c = max(beta, alpha / sigma), so that
    // c (B + sigma S) >= beta B + alpha S and the envelope dominates
    // the verified per-step inequality by induction.
    const double c_rate = std::max(beta, alpha / sigma);
    envelope += row.dt * (c_rate * envelope + beta * area_omega + alpha * length_m +
                          alpha * row.bulk_trace_old[j - 1]);
    const double env_ratio = mass_new / std::max(envelope, 1e-300);
    report.max_envelope_ratio = std::max(report.max_envelope_ratio, env_ratio);
    if (env_ratio > 1.0 + rel_tol) report.envelope_holds = false;
  }
  if (report.steps_checked == 0) report.max_excess = 0.0;
  return report;
}

}  // namespace bsrd
