#include "bsrd/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsrd/geometry.hpp"
#include "strict_json.hpp"

namespace bsrd {

namespace {

using nlohmann::json;
using detail::reject_unknown_keys;

template <typename T>
T get_typed(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for \"" + (path.empty() ? key : path + "." + key) +
                      "\": " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");

  RunConfig cfg;
  auto mark = [&cfg](const std::string& key) { cfg.provenance[key] = "user"; };

  reject_unknown_keys(j, {"command", "model", "model_file", "rate_constants", "mesh", "time",
                          "initial", "monitors", "checker", "potential", "converge", "output",
                          "seed"},
                      "");

  if (j.contains("command")) {
    cfg.command = get_typed<std::string>(j, "command", "");
    mark("command");
  }
  // The CLI fills the command from its subcommand when the config omits it.
  if (!cfg.command.empty() && cfg.command != "check" && cfg.command != "simulate" &&
      cfg.command != "potential" && cfg.command != "converge")
    throw ConfigError("command must be one of check, simulate, potential, converge (got \"" +
                      cfg.command + "\")");

  if (j.contains("model")) {
    cfg.model = get_typed<std::string>(j, "model", "");
    mark("model");
  }
  if (j.contains("model_file")) {
    cfg.model_file = get_typed<std::string>(j, "model_file", "");
    mark("model_file");
    std::ifstream probe(cfg.model_file);
    if (!probe) throw ConfigError("model_file \"" + cfg.model_file + "\" does not exist");
  }
  if (j.contains("rate_constants")) {
    const json& rc = j["rate_constants"];
    if (!rc.is_object()) throw ConfigError("rate_constants must be an object");
    for (auto it = rc.begin(); it != rc.end(); ++it) {
      cfg.rate_constants[it.key()] = it.value().get<double>();
      mark("rate_constants." + it.key());
    }
  }

  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    reject_unknown_keys(m, {"radius", "n_r", "n_theta", "surface_n_theta"}, "mesh");
    if (m.contains("radius")) { cfg.radius = get_typed<double>(m, "radius", "mesh"); mark("mesh.radius"); }
    if (m.contains("n_r")) { cfg.n_r = get_typed<int>(m, "n_r", "mesh"); mark("mesh.n_r"); }
    if (m.contains("n_theta")) { cfg.n_theta = get_typed<int>(m, "n_theta", "mesh"); mark("mesh.n_theta"); }
    if (m.contains("surface_n_theta")) {
      cfg.surface_n_theta = get_typed<int>(m, "surface_n_theta", "mesh");
      mark("mesh.surface_n_theta");
    }
  }
  if (cfg.surface_n_theta == 0) cfg.surface_n_theta = cfg.n_theta;
  if (cfg.surface_n_theta != cfg.n_theta)
    throw ConfigError(
        "mesh.n_theta and mesh.surface_n_theta must agree (bulk boundary faces and surface "
        "nodes pair one-to-one): got " +
        std::to_string(cfg.n_theta) + " vs " + std::to_string(cfg.surface_n_theta));
  if (cfg.radius <= 0.0) throw ConfigError("mesh.radius must be positive");
  if (cfg.n_r < 2) throw ConfigError("mesh.n_r must be at least 2");
  if (cfg.n_theta < 4) throw ConfigError("mesh.n_theta must be at least 4");

  if (j.contains("time")) {
    const json& t = j["time"];
    reject_unknown_keys(t, {"t_end", "dt_init", "dt_min", "dt_max", "scheme", "max_rel_change",
                            "blowup_threshold", "negativity_tol"},
                        "time");
    if (t.contains("t_end")) { cfg.t_end = get_typed<double>(t, "t_end", "time"); mark("time.t_end"); }
    if (t.contains("dt_init")) { cfg.dt_init = get_typed<double>(t, "dt_init", "time"); mark("time.dt_init"); }
    if (t.contains("dt_min")) { cfg.dt_min = get_typed<double>(t, "dt_min", "time"); mark("time.dt_min"); }
    if (t.contains("dt_max")) { cfg.dt_max = get_typed<double>(t, "dt_max", "time"); mark("time.dt_max"); }
    if (t.contains("scheme")) { cfg.scheme = get_typed<std::string>(t, "scheme", "time"); mark("time.scheme"); }
    if (t.contains("max_rel_change")) {
      cfg.max_rel_change = get_typed<double>(t, "max_rel_change", "time");
      mark("time.max_rel_change");
    }
    if (t.contains("blowup_threshold")) {
      cfg.blowup_threshold = get_typed<double>(t, "blowup_threshold", "time");
      mark("time.blowup_threshold");
    }
    if (t.contains("negativity_tol")) {
      cfg.negativity_tol = get_typed<double>(t, "negativity_tol", "time");
      mark("time.negativity_tol");
    }
  }
  if (cfg.scheme != "imex_be" && cfg.scheme != "imex_cn")
    throw ConfigError("time.scheme must be imex_be or imex_cn");
  if (cfg.t_end <= 0.0) throw ConfigError("time.t_end must be positive");
  if (cfg.dt_min <= 0.0 || cfg.dt_max <= 0.0 || cfg.dt_min > cfg.dt_max)
    throw ConfigError("time.dt bounds must satisfy 0 < dt_min <= dt_max");

  if (j.contains("initial")) {
    const json& init = j["initial"];
    reject_unknown_keys(init, {"u", "v"}, "initial");
    if (init.contains("u")) {
      cfg.initial_u = get_typed<std::vector<std::string>>(init, "u", "initial");
      mark("initial.u");
    }
    if (init.contains("v")) {
      cfg.initial_v = get_typed<std::vector<std::string>>(init, "v", "initial");
      mark("initial.v");
    }
  }

  if (j.contains("monitors")) {
    const json& m = j["monitors"];
    reject_unknown_keys(m, {"lp", "conservation_rel_tol", "nonnegativity_tol_scale", "gronwall",
                            "snapshot_interval"},
                        "monitors");
    if (m.contains("lp")) { cfg.lp_exponents = get_typed<std::vector<double>>(m, "lp", "monitors"); mark("monitors.lp"); }
    if (m.contains("conservation_rel_tol")) {
      cfg.conservation_rel_tol = get_typed<double>(m, "conservation_rel_tol", "monitors");
      mark("monitors.conservation_rel_tol");
    }
    if (m.contains("nonnegativity_tol_scale")) {
      cfg.nonnegativity_tol_scale = get_typed<double>(m, "nonnegativity_tol_scale", "monitors");
      mark("monitors.nonnegativity_tol_scale");
    }
    if (m.contains("snapshot_interval")) {
      cfg.snapshot_interval = get_typed<double>(m, "snapshot_interval", "monitors");
      mark("monitors.snapshot_interval");
    }
    if (m.contains("gronwall")) {
      const json& g = m["gronwall"];
      reject_unknown_keys(g, {"i", "j", "alpha", "beta", "sigma", "rel_tol"}, "monitors.gronwall");
      GronwallSpec spec;
      if (g.contains("i")) spec.i = get_typed<int>(g, "i", "monitors.gronwall");
      if (g.contains("j")) spec.j = get_typed<int>(g, "j", "monitors.gronwall");
      if (g.contains("alpha")) spec.alpha = get_typed<double>(g, "alpha", "monitors.gronwall");
      if (g.contains("beta")) spec.beta = get_typed<double>(g, "beta", "monitors.gronwall");
      if (g.contains("sigma")) spec.sigma = get_typed<double>(g, "sigma", "monitors.gronwall");
      if (g.contains("rel_tol")) spec.rel_tol = get_typed<double>(g, "rel_tol", "monitors.gronwall");
      cfg.gronwall = spec;
      mark("monitors.gronwall");
    }
  }

  if (j.contains("checker")) {
    const json& c = j["checker"];
    reject_unknown_keys(c, {"boxes", "samples", "seed"}, "checker");
    if (c.contains("boxes")) { cfg.checker_boxes = get_typed<std::vector<double>>(c, "boxes", "checker"); mark("checker.boxes"); }
    if (c.contains("samples")) { cfg.checker_samples = get_typed<int>(c, "samples", "checker"); mark("checker.samples"); }
    if (c.contains("seed")) { cfg.checker_seed = get_typed<std::uint64_t>(c, "seed", "checker"); mark("checker.seed"); }
    if (cfg.checker_samples < 1) throw ConfigError("checker.samples must be at least 1");
    for (double b : cfg.checker_boxes)
      if (b <= 0.0) throw ConfigError("checker.boxes entries must be positive");
  }

  if (j.contains("potential")) {
    const json& p = j["potential"];
    reject_unknown_keys(p, {"gamma", "n_theta", "n_steps", "t_end", "compare_fv", "fv_n_r",
                            "fv_n_theta", "fv_dt", "probe_radii", "probe_angles", "probe_times",
                            "agree_rel_tol"},
                        "potential");
    if (p.contains("gamma")) { cfg.gamma_preset = get_typed<std::string>(p, "gamma", "potential"); mark("potential.gamma"); }
    if (p.contains("n_theta")) { cfg.pot_n_theta = get_typed<int>(p, "n_theta", "potential"); mark("potential.n_theta"); }
    if (p.contains("n_steps")) { cfg.pot_n_steps = get_typed<int>(p, "n_steps", "potential"); mark("potential.n_steps"); }
    if (p.contains("t_end")) { cfg.pot_t_end = get_typed<double>(p, "t_end", "potential"); mark("potential.t_end"); }
    if (p.contains("compare_fv")) { cfg.pot_compare_fv = get_typed<bool>(p, "compare_fv", "potential"); mark("potential.compare_fv"); }
    if (p.contains("fv_n_r")) { cfg.fv_n_r = get_typed<int>(p, "fv_n_r", "potential"); mark("potential.fv_n_r"); }
    if (p.contains("fv_n_theta")) { cfg.fv_n_theta = get_typed<int>(p, "fv_n_theta", "potential"); mark("potential.fv_n_theta"); }
    if (p.contains("fv_dt")) { cfg.fv_dt = get_typed<double>(p, "fv_dt", "potential"); mark("potential.fv_dt"); }
    if (p.contains("probe_radii")) { cfg.probe_radii = get_typed<std::vector<double>>(p, "probe_radii", "potential"); mark("potential.probe_radii"); }
    if (p.contains("probe_angles")) { cfg.probe_angles = get_typed<std::vector<double>>(p, "probe_angles", "potential"); mark("potential.probe_angles"); }
    if (p.contains("probe_times")) { cfg.probe_times = get_typed<std::vector<double>>(p, "probe_times", "potential"); mark("potential.probe_times"); }
    if (p.contains("agree_rel_tol")) { cfg.agree_rel_tol = get_typed<double>(p, "agree_rel_tol", "potential"); mark("potential.agree_rel_tol"); }
  }

  if (j.contains("converge")) {
    const json& c = j["converge"];
    reject_unknown_keys(c, {"preset", "levels", "dt", "t_end", "expected_order", "order_tol"},
                        "converge");
    if (c.contains("preset")) { cfg.converge_preset = get_typed<std::string>(c, "preset", "converge"); mark("converge.preset"); }
    if (c.contains("levels")) { cfg.converge_levels = get_typed<std::vector<double>>(c, "levels", "converge"); mark("converge.levels"); }
    if (c.contains("dt")) { cfg.converge_dt = get_typed<double>(c, "dt", "converge"); mark("converge.dt"); }
    if (c.contains("t_end")) { cfg.converge_t_end = get_typed<double>(c, "t_end", "converge"); mark("converge.t_end"); }
    if (c.contains("expected_order")) { cfg.expected_order = get_typed<double>(c, "expected_order", "converge"); mark("converge.expected_order"); }
    if (c.contains("order_tol")) { cfg.order_tol = get_typed<double>(c, "order_tol", "converge"); mark("converge.order_tol"); }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown_keys(o, {"dir"}, "output");
    if (o.contains("dir")) { cfg.out_dir = get_typed<std::string>(o, "dir", "output"); mark("output.dir"); }
  }
  if (j.contains("seed")) {
    cfg.seed = get_typed<std::uint64_t>(j, "seed", "");
    mark("seed");
  }
  cfg.raw_text = text;
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string RunConfig::echo_json() const {
  using nlohmann::json;
  json j;
  j["command"] = command;
  j["model"] = model;
  if (!model_file.empty()) j["model_file"] = model_file;
  j["rate_constants"] = rate_constants;
  j["mesh"] = {{"radius", radius}, {"n_r", n_r}, {"n_theta", n_theta},
               {"surface_n_theta", surface_n_theta}};
  j["time"] = {{"t_end", t_end},
               {"dt_init", dt_init},
               {"dt_min", dt_min},
               {"dt_max", dt_max},
               {"scheme", scheme},
               {"max_rel_change", max_rel_change},
               {"blowup_threshold", blowup_threshold},
               {"negativity_tol", negativity_tol}};
  j["initial"] = {{"u", initial_u}, {"v", initial_v}};
  json monitors = {{"lp", lp_exponents},
                   {"conservation_rel_tol", conservation_rel_tol},
                   {"nonnegativity_tol_scale", nonnegativity_tol_scale},
                   {"snapshot_interval", snapshot_interval}};
  if (gronwall)
    monitors["gronwall"] = {{"i", gronwall->i},       {"j", gronwall->j},
                            {"alpha", gronwall->alpha}, {"beta", gronwall->beta},
                            {"sigma", gronwall->sigma}, {"rel_tol", gronwall->rel_tol}};
  j["monitors"] = monitors;
  j["checker"] = {{"boxes", checker_boxes}, {"samples", checker_samples}, {"seed", checker_seed}};
  j["potential"] = {{"gamma", gamma_preset},
                    {"n_theta", pot_n_theta},
                    {"n_steps", pot_n_steps},
                    {"t_end", pot_t_end},
                    {"compare_fv", pot_compare_fv},
                    {"fv_n_r", fv_n_r},
                    {"fv_n_theta", fv_n_theta},
                    {"fv_dt", fv_dt},
                    {"probe_radii", probe_radii},
                    {"probe_angles", probe_angles},
                    {"probe_times", probe_times},
                    {"agree_rel_tol", agree_rel_tol}};
  j["converge"] = {{"preset", converge_preset},
                   {"levels", converge_levels},
                   {"dt", converge_dt},
                   {"t_end", converge_t_end},
                   {"expected_order", expected_order},
                   {"order_tol", order_tol}};
  j["output"] = {{"dir", out_dir}};
  j["seed"] = seed;
  j["provenance"] = provenance;
  return j.dump(2);
}

}  // namespace bsrd
