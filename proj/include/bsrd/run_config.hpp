#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsrd/geometry.hpp"  // ConfigError

namespace bsrd {

struct GronwallSpec {
  int i = 1;
  int j = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double sigma = 1.0;
  double rel_tol = 1e-8;
};

/// Fully validated run configuration with defaults filled in and
/// per-key provenance (default vs user) recorded for the manifest.
struct RunConfig {
  std::string command;  // check | simulate | potential | converge

  std::string model = "toy_conserving";
  std::string model_file;
  std::map<std::string, double> rate_constants;

  double radius = 1.0;
  int n_r = 32;
  int n_theta = 64;
  int surface_n_theta = 0;  // 0 = same as n_theta

  double t_end = 1.0;
  double dt_init = 0.0;
  double dt_min = 1e-8;
  double dt_max = 0.05;
  std::string scheme = "imex_be";
  double max_rel_change = 0.10;
  double blowup_threshold = 0.0;
  double negativity_tol = 0.0;

  std::vector<std::string> initial_u;
  std::vector<std::string> initial_v;

  std::vector<double> lp_exponents;
  double conservation_rel_tol = 1e-8;
  double nonnegativity_tol_scale = 1e-9;
  std::optional<GronwallSpec> gronwall;
  double snapshot_interval = 0.0;

  std::vector<double> checker_boxes = {1.0, 10.0, 100.0, 1e3, 1e6};
  int checker_samples = 512;
  std::uint64_t checker_seed = 20240315;

  std::string gamma_preset = "cos_theta_step";
  int pot_n_theta = 64;
  int pot_n_steps = 250;
  double pot_t_end = 0.5;
  bool pot_compare_fv = true;
  int fv_n_r = 128;
  int fv_n_theta = 128;
  double fv_dt = 1e-4;
  std::vector<double> probe_radii = {0.3, 0.5, 0.7, 0.875};
  std::vector<double> probe_angles;  // empty = five uniform angles
  std::vector<double> probe_times;   // empty = five uniform times
  double agree_rel_tol = 0.03;

  std::string converge_preset = "surface_eigenmode";
  std::vector<double> converge_levels;
  double converge_dt = 1e-4;
  double converge_t_end = 0.5;
  double expected_order = 2.0;
  double order_tol = 0.3;

  std::string out_dir = "out";
  std::uint64_t seed = 1;

  std::map<std::string, std::string> provenance;  // dotted key -> "default" | "user"
  std::string raw_text;                           // configuration as given, echoed verbatim

  /// Effective config (defaults filled) echoed into the run manifest.
  std::string echo_json() const;
};

/// Parses and validates JSON configuration text. Strict mode: unknown
/// keys are rejected with a nearest-known-key suggestion; type errors
/// report the offending path.
RunConfig parse_config(const std::string& text);

RunConfig parse_config_file(const std::string& path);

}  // namespace bsrd
