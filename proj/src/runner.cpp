#include "bsrd/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bsrd/convergence.hpp"
#include "bsrd/expression.hpp"
#include "bsrd/hypothesis_checker.hpp"
#include "bsrd/integrator.hpp"
#include "bsrd/layer_potential.hpp"
#include "bsrd/monitors.hpp"
#include "bsrd/reaction_model.hpp"

namespace bsrd {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file " + path.string());
  out << content;
}

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  void add(const std::string& name, std::string content) {
    files.emplace_back(name, std::move(content));
  }
};

BuiltinModel resolve_model(const RunConfig& cfg) {
  if (!cfg.model_file.empty()) return model_from_file(cfg.model_file);
  if (cfg.model == "blowup_ode" || cfg.model == "surface_ode_blowup")
    return surface_ode_blowup_preset(2.0);
  return builtin(cfg.model, cfg.rate_constants);
}

void apply_initial_overrides(const RunConfig& cfg, BuiltinModel& model) {
  if (!cfg.initial_u.empty()) {
    if (static_cast<int>(cfg.initial_u.size()) != model.system.k)
      throw ConfigError("initial.u must list one expression per bulk species");
    std::vector<Expression> exprs;
    for (const auto& e : cfg.initial_u)
      exprs.push_back(Expression::parse(e, {"r", "theta"}, model.rate_constants));
    model.initial.u0 = [exprs](double r, double theta) {
      std::vector<double> out(exprs.size());
      const std::vector<double> args{r, theta};
      for (size_t i = 0; i < exprs.size(); ++i) out[i] = exprs[i].eval(args);
      return out;
    };
  }
  if (!cfg.initial_v.empty()) {
    if (static_cast<int>(cfg.initial_v.size()) != model.system.m)
      throw ConfigError("initial.v must list one expression per surface species");
    std::vector<Expression> exprs;
    for (const auto& e : cfg.initial_v)
      exprs.push_back(Expression::parse(e, {"theta"}, model.rate_constants));
    model.initial.v0 = [exprs](double theta) {
      std::vector<double> out(exprs.size());
      const std::vector<double> args{theta};
      for (size_t i = 0; i < exprs.size(); ++i) out[i] = exprs[i].eval(args);
      return out;
    };
  }
}

std::string monitors_csv(const MonitorLog& log, const ReactionSystem& sys) {
  std::ostringstream os;
  os.precision(17);
  os << "time,name,value\n";
  for (const MonitorRow& row : log.rows) {
    auto emit = [&](const std::string& name, double value) {
      os << row.t << "," << name << "," << value << "\n";
    };
    emit("dt", row.dt);
    for (int s = 0; s < sys.k; ++s) {
      emit("mass_u" + std::to_string(s + 1), row.bulk_mass[s]);
      emit("trace_integral_u" + std::to_string(s + 1), row.bulk_trace_old[s]);
      emit("sup_u" + std::to_string(s + 1), row.sup[s]);
      emit("min_u" + std::to_string(s + 1), row.min[s]);
    }
    for (int s = 0; s < sys.m; ++s) {
      emit("mass_v" + std::to_string(s + 1), row.surf_mass[s]);
      emit("sup_v" + std::to_string(s + 1), row.sup[sys.k + s]);
      emit("min_v" + std::to_string(s + 1), row.min[sys.k + s]);
    }
    for (size_t c = 0; c < row.conserved.size(); ++c)
      emit("conserved_" + log.conserved_labels[c], row.conserved[c]);
    for (size_t pi = 0; pi < log.lp_exponents.size(); ++pi) {
      std::ostringstream pname;
      pname << "lp" << log.lp_exponents[pi];
      for (int s = 0; s < sys.k; ++s)
        emit(pname.str() + "_u" + std::to_string(s + 1), row.lp_bulk[s][pi]);
      for (int s = 0; s < sys.m; ++s)
        emit(pname.str() + "_v" + std::to_string(s + 1), row.lp_surf[s][pi]);
    }
  }
  return os.str();
}

std::string snapshot_csv_bulk(const State& state, int species, const BulkMesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "r,theta,value\n";
  for (int c = 0; c < mesh.n_cells(); ++c)
    os << mesh.cell_centers[c].r << "," << mesh.cell_centers[c].theta << ","
       << state.u[species][c] << "\n";
  return os.str();
}

std::string snapshot_csv_surface(const State& state, int species, const SurfaceMesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "theta,value\n";
  for (int n = 0; n < mesh.n_nodes(); ++n)
    os << mesh.node_angles[n] << "," << state.v[species][n] << "\n";
  return os.str();
}

std::function<double(double, double)> gamma_preset_fn(const std::string& name, double t_end) {
  if (name == "cos_theta_step")
    return [](double theta, double) { return std::cos(theta); };
  if (name == "uniform_step") return [](double, double) { return 1.0; };
  if (name == "singular_point") {
    const double lambda = 0.36, theta0 = 0.25 * kPi, t0 = 0.8 * t_end;
    return [lambda, theta0, t0](double theta, double t) {
      double dth = std::fmod(std::abs(theta - theta0), 2.0 * kPi);
      dth = std::min(dth, 2.0 * kPi - dth);
      const double rho = dth + std::sqrt(std::abs(t - t0));
      return std::pow(std::max(rho, 1e-12), -lambda);
    };
  }
  throw ConfigError("unknown gamma preset \"" + name +
                    "\" (expected cos_theta_step, uniform_step or singular_point)");
}

json run_simulate(const RunConfig& cfg, Artifacts& artifacts, bool& all_passed) {
  BuiltinModel model = resolve_model(cfg);
  apply_initial_overrides(cfg, model);
  const ReactionSystem& sys = model.system;

  const Meshes meshes = make_meshes(cfg.radius, cfg.n_r, cfg.n_theta);
  const SampledInitialData data = sample_initial_data(model.initial, sys, meshes.bulk,
                                                      meshes.surface);
  const CompatibilityReport compat = check_compatibility(sys, data, meshes);

  StepControl control;
  control.dt_init = cfg.dt_init;
  control.dt_min = cfg.dt_min;
  control.dt_max = cfg.dt_max;
  control.max_rel_change = cfg.max_rel_change;
  control.blowup_threshold = cfg.blowup_threshold;
  control.negativity_tol = cfg.negativity_tol;
  control.scheme = cfg.scheme == "imex_cn" ? TimeScheme::ImexCN : TimeScheme::ImexBE;

  MonitorSpec spec;
  spec.lp_exponents = cfg.lp_exponents;
  spec.snapshot_interval = cfg.snapshot_interval;

  const RunOutcome outcome = simulate(sys, data, meshes, control, cfg.t_end, spec);

  json assertions = json::array();
  auto record_assertion = [&](const std::string& name, bool passed, double value, double tol) {
    assertions.push_back(
        {{"name", name}, {"passed", passed}, {"value", value}, {"tolerance", tol}});
    all_passed = all_passed && passed;
  };

  if (outcome.status == RunStatus::StepFailure) {
    all_passed = false;
  } else {
    if (outcome.status == RunStatus::Completed) {
      for (size_t c = 0; c < sys.conserved.size(); ++c) {
        const double drift = outcome.monitor_log.conserved_drift(c);
        record_assertion("conservation_" + sys.conserved[c].label,
                         drift <= cfg.conservation_rel_tol, drift, cfg.conservation_rel_tol);
      }
    }
    if (sys.quasi_positive_declared) {
      double scale = 1.0;
      for (const auto& f : data.u)
        for (double x : f) scale = std::max(scale, std::abs(x));
      for (const auto& f : data.v)
        for (double x : f) scale = std::max(scale, std::abs(x));
      const double floor = -cfg.nonnegativity_tol_scale * scale;
      const double min_seen = outcome.monitor_log.min_over_trajectory();
      record_assertion("nonnegativity", min_seen >= floor, min_seen, floor);
    }
    if (cfg.gronwall) {
      const GronwallSpec& g = *cfg.gronwall;
      const GronwallReport rep = assert_gronwall(
          outcome.monitor_log, g.i, g.j, g.alpha, g.beta, g.sigma,
          meshes.bulk.total_area(), meshes.surface.total_length(), g.rel_tol);
      record_assertion("gronwall_mass_inequality", rep.holds, rep.max_excess, g.rel_tol);
      record_assertion("gronwall_mass_envelope", rep.envelope_holds, rep.max_envelope_ratio,
                       1.0 + g.rel_tol);
    }
  }

  artifacts.add("monitors.csv", monitors_csv(outcome.monitor_log, sys));
  for (size_t snap = 0; snap < outcome.trajectory.size(); ++snap) {
    const State& s = outcome.trajectory[snap];
    for (int sp = 0; sp < sys.k; ++sp)
      artifacts.add("snapshot_u" + std::to_string(sp + 1) + "_" + std::to_string(snap) + ".csv",
                    snapshot_csv_bulk(s, sp, meshes.bulk));
    for (int sp = 0; sp < sys.m; ++sp)
      artifacts.add("snapshot_v" + std::to_string(sp + 1) + "_" + std::to_string(snap) + ".csv",
                    snapshot_csv_surface(s, sp, meshes.surface));
  }

  json out;
  out["mesh"] = json::parse(mesh_summary_json(meshes.bulk, meshes.surface));
  out["compatibility"] = {{"max_residual", compat.max_residual},
                          {"worst_face", compat.worst_face},
                          {"worst_species", compat.worst_species}};
  out["outcome"] = {
      {"status", outcome.status == RunStatus::Completed
                     ? "completed"
                     : (outcome.status == RunStatus::BlowupDetected ? "blowup_detected"
                                                                    : "step_failure")},
      {"t_est", outcome.t_est},
      {"reason", outcome.reason},
      {"accepted_steps", outcome.accepted_steps},
      {"rejected_steps", outcome.rejected_steps},
      {"final_time", outcome.trajectory.back().t}};
  json events = json::array();
  for (const auto& e : outcome.monitor_log.events)
    events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
  out["events"] = events;
  out["assertions"] = assertions;

  json summary;
  summary["min_over_trajectory"] = outcome.monitor_log.min_over_trajectory();
  json drifts = json::object();
  for (size_t c = 0; c < sys.conserved.size(); ++c)
    drifts[sys.conserved[c].label] = outcome.monitor_log.conserved_drift(c);
  summary["conserved_drift"] = drifts;
  if (!outcome.monitor_log.rows.empty()) {
    const MonitorRow& last = outcome.monitor_log.rows.back();
    summary["final_sup"] = last.sup;
    summary["final_bulk_mass"] = last.bulk_mass;
    summary["final_surf_mass"] = last.surf_mass;
  }
  out["monitor_summary"] = summary;
  return out;
}

json run_check(const RunConfig& cfg, Artifacts& artifacts, std::string& summary) {
  BuiltinModel model = resolve_model(cfg);
  const ReactionSystem& sys = model.system;

  CheckerOptions options;
  options.box_sweep = cfg.checker_boxes;
  options.samples = cfg.checker_samples;
  options.seed = cfg.checker_seed;

  const ConditionReport qp = check_quasi_positive(sys, options.box_sweep.back(),
                                                  options.samples, options.seed);
  const Verdict verdict = classify(sys, options);

  json report;
  report["model"] = sys.name;
  report["quasi_positive"] = json::parse(qp.to_json());
  report["verdict"] = json::parse(verdict.to_json());
  artifacts.add("checker_report.json", report.dump(2));

  std::ostringstream table;
  table << "model: " << sys.name << "\n";
  table << "quasi-positive: " << (qp.holds ? "holds-on-sampled-region" : "VIOLATED") << "\n";
  table << "verdict: " << (verdict.hypotheses_verified ? "hypotheses-verified" : "not-verified")
        << "\n";
  for (const auto& res : verdict.resolutions) {
    table << "  " << (res.is_bulk ? "u" : "v") << res.index << ": "
          << (res.route == ResolutionRoute::Paired
                  ? "paired with " + std::string(res.is_bulk ? "v" : "u") +
                        std::to_string(res.partner)
                  : (res.route == ResolutionRoute::BoundedG ? "bounded boundary flux"
                                                            : "polynomially bounded reaction"))
          << " (stage " << res.stage << ")\n";
  }
  table << "NOTE: \"holds-on-sampled-region\" is sampling evidence, not proof.\n";
  summary = table.str();
  return report;
}

json run_potential(const RunConfig& cfg, Artifacts& artifacts, bool& all_passed) {
  const SurfaceMesh surface = build_surface_mesh(cfg.radius, cfg.pot_n_theta);
  const auto gamma = gamma_preset_fn(cfg.gamma_preset, cfg.pot_t_end);
  HeatKernelParams params;
  const PotentialSolution sol = solve_neumann(gamma, surface, cfg.pot_n_steps, cfg.pot_t_end,
                                              params);

  std::ostringstream density;
  density.precision(17);
  density << "t,theta,g\n";
  for (int a = 0; a < sol.op.n_steps; ++a)
    for (int q = 0; q < sol.op.n_theta; ++q)
      density << (a + 1) * sol.op.dt << "," << sol.op.node_angles[q] << ","
              << sol.density[a][q] << "\n";
  artifacts.add("density.csv", density.str());

  json out;
  out["c_eff"] = sol.op.c_eff;

  if (cfg.pot_compare_fv) {
    const BulkMesh fv_mesh = build_disk_mesh(cfg.radius, cfg.fv_n_r, cfg.fv_n_theta);
    std::vector<double> times = cfg.probe_times;
    if (times.empty())
      for (int i = 1; i <= 5; ++i) times.push_back(cfg.pot_t_end * i / 5.0);
    std::vector<double> angles = cfg.probe_angles;
    if (angles.empty())
      for (int i = 0; i < 5; ++i) angles.push_back(2.0 * kPi * (i + 0.37) / 5.0);

    const NeumannReferenceResult ref =
        solve_heat_neumann(fv_mesh, params.d, gamma, cfg.pot_t_end, cfg.fv_dt, times);

    // Nearest-cell lookup on the reference mesh per probe.
    std::ostringstream probes;
    probes.precision(17);
    probes << "t,r,theta,phi_potential,phi_fv\n";
    double max_diff = 0.0, max_ref = 0.0;
    for (size_t ti = 0; ti < ref.times.size(); ++ti) {
      for (double r : cfg.probe_radii) {
        for (double th : angles) {
          const int ring = std::min(cfg.fv_n_r - 1,
                                    static_cast<int>(std::floor(r / fv_mesh.dr)));
          const int sector = static_cast<int>(std::floor(th / fv_mesh.dtheta)) % cfg.fv_n_theta;
          const int cell = fv_mesh.cell_index(ring, sector);
          const double rc = fv_mesh.cell_centers[cell].r;
          const double thc = fv_mesh.cell_centers[cell].theta;
          const Vec2 x{rc * std::cos(thc), rc * std::sin(thc)};
          const double phi_pot = sol.evaluate(x, ref.times[ti]);
          const double phi_fv = ref.fields[ti][cell];
          probes << ref.times[ti] << "," << rc << "," << thc << "," << phi_pot << "," << phi_fv
                 << "\n";
          max_diff = std::max(max_diff, std::abs(phi_pot - phi_fv));
          max_ref = std::max(max_ref, std::abs(phi_fv));
        }
      }
    }
    artifacts.add("probes.csv", probes.str());
    const double rel = max_ref > 0.0 ? max_diff / max_ref : max_diff;
    const bool passed = rel <= cfg.agree_rel_tol;
    all_passed = all_passed && passed;
    out["cross_solver"] = {{"rel_linf_discrepancy", rel},
                           {"tolerance", cfg.agree_rel_tol},
                           {"passed", passed}};
  }
  return out;
}

json run_converge(const RunConfig& cfg, Artifacts& artifacts, bool& all_passed) {
  ConvergenceStudy study;
  study.preset = cfg.converge_preset;
  study.dt = cfg.converge_dt;
  study.t_end = cfg.converge_t_end;
  study.levels = cfg.converge_levels;
  double expected = cfg.expected_order;
  double tol = cfg.order_tol;
  const bool user_expected = cfg.provenance.count("converge.expected_order") > 0;
  if (study.levels.empty()) {
    if (study.preset == "surface_eigenmode") study.levels = {16, 32, 64};
    if (study.preset == "surface_eigenmode_dt") {
      study.levels = {0.05, 0.025, 0.0125};
      if (!user_expected) {
        expected = 1.0;
        tol = 0.2;
      }
    }
    if (study.preset == "bulk_manufactured") study.levels = {8, 16, 32};
    if (study.preset == "coupled_toy") {
      study.levels = {4e-3, 2e-3, 1e-3};
      if (!user_expected) {
        expected = 1.0;
        tol = 0.5;
      }
    }
  } else if (!user_expected && (study.preset == "surface_eigenmode_dt" ||
                                study.preset == "coupled_toy")) {
    expected = 1.0;
    tol = study.preset == "coupled_toy" ? 0.5 : 0.2;
  }

  const ConvergenceResult result = converge(study);

  std::ostringstream csv;
  csv.precision(17);
  csv << "h,error\n";
  for (size_t i = 0; i < result.h.size(); ++i)
    csv << result.h[i] << "," << result.errors[i] << "\n";
  artifacts.add("orders.csv", csv.str());

  const bool order_ok = std::abs(result.fitted_order - expected) <= tol;
  all_passed = all_passed && order_ok && result.monotone;

  json out = json::parse(result.to_json());
  out["expected_order"] = expected;
  out["order_tol"] = tol;
  out["order_ok"] = order_ok;
  return out;
}

}  // namespace

RunResult run(const RunConfig& config) {
  if (config.command != "check" && config.command != "simulate" &&
      config.command != "potential" && config.command != "converge")
    throw ConfigError("run: no command selected (set \"command\" or use a CLI subcommand)");
  RunResult result;
  result.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);

  Artifacts artifacts;
  bool all_passed = true;
  json manifest;
  manifest["version"] = "bsrd 0.1.0";
  manifest["config"] = json::parse(config.echo_json());
  if (!config.raw_text.empty()) manifest["config_text"] = config.raw_text;
  std::string check_summary;

  try {
    if (config.command == "simulate") {
      manifest["result"] = run_simulate(config, artifacts, all_passed);
    } else if (config.command == "check") {
      // A not-verified verdict is a finding, not a failure.
      manifest["result"] = run_check(config, artifacts, check_summary);
    } else if (config.command == "potential") {
      manifest["result"] = run_potential(config, artifacts, all_passed);
    } else if (config.command == "converge") {
      manifest["result"] = run_converge(config, artifacts, all_passed);
    }
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    all_passed = false;
  }

  json names = json::array();
  for (const auto& [name, content] : artifacts.files) {
    (void)content;
    names.push_back(name);
  }
  manifest["artifacts"] = names;
  manifest["all_assertions_passed"] = all_passed;

  // Hash covers the manifest body (without the hash field) plus every
  // numeric artifact, in order. The output directory is a path, not a
  // numeric output, so it does not participate.
  json hashed = manifest;
  hashed["config"].erase("output");
  std::uint64_t h = fnv1a(hashed.dump(2));
  for (const auto& [name, content] : artifacts.files) {
    h = fnv1a(name, h);
    h = fnv1a(content, h);
  }
  manifest["output_hash"] = hex64(h);

  write_file(fs::path(config.out_dir) / "manifest.json", manifest.dump(2));
  for (const auto& [name, content] : artifacts.files)
    write_file(fs::path(config.out_dir) / name, content);

  std::ostringstream summary;
  if (!check_summary.empty()) summary << check_summary;
  if (manifest.contains("error")) summary << "error: " << manifest["error"].get<std::string>() << "\n";
  summary << "manifest: " << (fs::path(config.out_dir) / "manifest.json").string() << "\n";
  summary << "output_hash: " << hex64(h) << "\n";
  result.summary = summary.str();
  result.exit_status = all_passed ? 0 : 1;
  return result;
}

}  // namespace bsrd
