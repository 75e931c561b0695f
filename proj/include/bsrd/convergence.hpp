#pragma once

#include <string>
#include <vector>

namespace bsrd {

/// Refinement-ladder study against an analytic or manufactured
/// solution. Presets:
///   surface_eigenmode     spatial ladder (levels = n_theta), cos mode decay
///   surface_eigenmode_dt  temporal ladder (levels = dt) on the same mode
///   bulk_manufactured     spatial ladder (levels = n_r), radial manufactured
///                         solution with implicit-consistent source
///   coupled_toy           temporal self-convergence of toy_conserving
struct ConvergenceStudy {
  std::string preset;
  std::vector<double> levels;
  double dt = 1e-4;      // fixed dt for spatial ladders
  double t_end = 0.5;
};

struct ConvergenceResult {
  std::vector<double> h;       // per level: mesh width or dt
  std::vector<double> errors;  // max-norm errors
  double fitted_order = 0.0;
  double fit_residual = 0.0;   // rms residual of the least-squares fit
  bool monotone = true;

  std::string to_json() const;
};

/// Runs the ladder and fits log(error) against log(h). Requires at
/// least three levels; flags non-monotone error sequences.
ConvergenceResult converge(const ConvergenceStudy& study);

}  // namespace bsrd
