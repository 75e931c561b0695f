#include "bsrd/reaction_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsrd/expression.hpp"
#include "strict_json.hpp"

namespace bsrd {

namespace {

double get(const std::map<std::string, double>& consts, const std::string& name) {
  auto it = consts.find(name);
  return it == consts.end() ? 1.0 : it->second;
}

std::map<std::string, double> with_defaults(const std::vector<std::string>& names,
                                            const std::map<std::string, double>& overrides) {
  std::map<std::string, double> consts;
  for (const auto& n : names) consts[n] = 1.0;
  for (const auto& [n, v] : overrides) {
    if (!consts.count(n))
      throw ConfigError("unknown rate constant '" + n + "' for this model");
    consts[n] = v;
  }
  return consts;
}

void check_finite(const std::vector<double>& vals, const char* which,
                  const std::vector<double>& u, const std::vector<double>& v) {
  for (double x : vals) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "non-finite " << which << " value at u = (";
      for (size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
      os << "), v = (";
      for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      os << ")";
      throw ModelEvalError(os.str());
    }
  }
}

BuiltinModel make_min_system(const std::map<std::string, double>& overrides) {
  // Species: u = (D_cyt_ATP, D_cyt_ADP, E_cyt), v = (D_mem_ATP, E:D_mem_ATP).
  // Reaction rates:
  //   R_exc  = k1 u2      R_Dcyt = k2 u1      R_Dmem = k3 v1 u1
  //   R_Ecyt = k4 u3 v1   R_Emem = k5 v1 u3 v2^2   R_exp = k6 v2
  auto consts = with_defaults({"k1", "k2", "k3", "k4", "k5", "k6"}, overrides);
  const double k1 = get(consts, "k1"), k2 = get(consts, "k2"), k3 = get(consts, "k3"),
               k4 = get(consts, "k4"), k5 = get(consts, "k5"), k6 = get(consts, "k6");

  BuiltinModel model;
  model.rate_constants = consts;
  ReactionSystem& sys = model.system;
  sys.k = 3;
  sys.m = 2;
  sys.D = {1.0, 1.0, 1.0};
  sys.D_tilde = {1.0, 1.0};
  sys.name = "min_system";
  sys.quasi_positive_declared = true;
  sys.H = [k1](const std::vector<double>& u) {
    return std::vector<double>{k1 * u[1], -k1 * u[1], 0.0};
  };
  sys.G = [k2, k3, k4, k5, k6](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{-k2 * u[0] - k3 * v[0] * u[0], k6 * v[1],
                               k6 * v[1] - k4 * u[2] * v[0] - k5 * v[0] * u[2] * v[1] * v[1]};
  };
  sys.F = [k2, k3, k4, k5, k6](const std::vector<double>& u, const std::vector<double>& v) {
    const double gain = k2 * u[0] + k3 * v[0] * u[0];
    const double bind = k4 * u[2] * v[0] + k5 * v[0] * u[2] * v[1] * v[1];
    return std::vector<double>{gain - bind, -k6 * v[1] + bind};
  };
  sys.conserved = {
      {{1.0, 1.0, 0.0}, {1.0, 1.0}, "total_MinD"},
      {{0.0, 0.0, 1.0}, {0.0, 1.0}, "total_MinE"},
  };
  // Known pairings: (i=2, j=3) with F2 + G3 = 0, and (i=1, j=1) with F1 + G1 <= 0.
  sys.declared_properties[{2, 3}] = {1.0, 1.0, 1.0, k6, k4 + k5, 4};
  sys.declared_properties[{1, 1}] = {1.0, 1.0, k1, k2 + k3, k2 + k3, 2};

  model.initial.u0 = [](double, double) { return std::vector<double>{1.0, 1.0, 1.0}; };
  model.initial.v0 = [](double) { return std::vector<double>{1.0, 1.0}; };
  return model;
}

BuiltinModel make_signaling(const std::map<std::string, double>& overrides) {
  // Membrane signaling model with k = 1, m = 2:
  //   q  = b6 * area_ratio * u * max0(c_max - v1 - v2) - bm6 * v2
  //   G  = -q,  H = 0
  //   F1 =  k1 v2 g0 (1 - K5 v1 g0 / (1 + K5 v1)) + k2 v2 K5 v1 g0 / (1 + K5 v1)
  //         - k3 v1 / (v1 + k4)
  //   F2 = -F1 + q
  auto consts = with_defaults({"k1", "k2", "k3", "k4", "K5", "g0", "c_max", "b6", "bm6",
                               "area_ratio"},
                              overrides);
  const double k1 = get(consts, "k1"), k2 = get(consts, "k2"), k3 = get(consts, "k3"),
               k4 = get(consts, "k4"), K5 = get(consts, "K5"), g0 = get(consts, "g0"),
               cmax = get(consts, "c_max"), b6 = get(consts, "b6"),
               bm6 = get(consts, "bm6"), ratio = get(consts, "area_ratio");

  auto q_of = [b6, bm6, cmax, ratio](double u, double v1, double v2) {
    return b6 * ratio * u * std::max(cmax - v1 - v2, 0.0) - bm6 * v2;
  };

  BuiltinModel model;
  model.rate_constants = consts;
  ReactionSystem& sys = model.system;
  sys.k = 1;
  sys.m = 2;
  sys.D = {1.0};
  sys.D_tilde = {1.0, 1.0};
  sys.name = "signaling";
  sys.quasi_positive_declared = true;
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.G = [q_of](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{-q_of(u[0], v[0], v[1])};
  };
  sys.F = [k1, k2, k3, k4, K5, g0, q_of](const std::vector<double>& u,
                                         const std::vector<double>& v) {
    const double frac = K5 * v[0] * g0 / (1.0 + K5 * v[0]);
    const double exchange =
        k1 * v[1] * g0 * (1.0 - frac) + k2 * v[1] * frac - k3 * v[0] / (v[0] + k4);
    const double q = q_of(u[0], v[0], v[1]);
    return std::vector<double>{exchange, -exchange + q};
  };
  sys.declared_properties[{2, 1}] = {1.0, k3, 1.0, bm6, k3 + b6 * ratio * cmax, 2};

  model.initial.u0 = [](double, double) { return std::vector<double>{1.0}; };
  model.initial.v0 = [](double) { return std::vector<double>{0.25, 0.25}; };
  return model;
}

BuiltinModel make_toy_conserving(const std::map<std::string, double>& overrides) {
  auto consts = with_defaults({}, overrides);
  BuiltinModel model;
  model.rate_constants = consts;
  ReactionSystem& sys = model.system;
  sys.k = 1;
  sys.m = 1;
  sys.D = {1.0};
  sys.D_tilde = {1.0};
  sys.name = "toy_conserving";
  sys.quasi_positive_declared = true;
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.F = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{u[0] * u[0] * v[0] * v[0]};
  };
  sys.G = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{-u[0] * u[0] * v[0] * v[0]};
  };
  sys.conserved = {{{1.0}, {1.0}, "total_mass"}};
  sys.declared_properties[{1, 1}] = {1.0, 1.0, 1.0, 1.0, 1.0, 4};
  model.initial.u0 = [](double, double) { return std::vector<double>{1.0}; };
  model.initial.v0 = [](double) { return std::vector<double>{1.0}; };
  return model;
}

BuiltinModel make_toy_open(const std::map<std::string, double>& overrides) {
  auto consts = with_defaults({}, overrides);
  BuiltinModel model;
  model.rate_constants = consts;
  ReactionSystem& sys = model.system;
  sys.k = 1;
  sys.m = 1;
  sys.D = {1.0};
  sys.D_tilde = {1.0};
  sys.name = "toy_open";
  sys.quasi_positive_declared = true;
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.F = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{-u[0] * u[0] * v[0] * v[0]};
  };
  sys.G = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::vector<double>{u[0] * u[0] * v[0] * v[0]};
  };
  model.initial.u0 = [](double, double) { return std::vector<double>{1.0}; };
  model.initial.v0 = [](double) { return std::vector<double>{1.0}; };
  return model;
}

}  // namespace

ReactionValues eval_reactions(const ReactionSystem& sys, const std::vector<double>& u,
                              const std::vector<double>& v) {
  if (static_cast<int>(u.size()) != sys.k || static_cast<int>(v.size()) != sys.m)
    throw ModelEvalError("eval_reactions: argument sizes do not match (k, m)");
  ReactionValues out;
  out.H = sys.H(u);
  out.F = sys.F(u, v);
  out.G = sys.G(u, v);
  if (static_cast<int>(out.H.size()) != sys.k || static_cast<int>(out.G.size()) != sys.k ||
      static_cast<int>(out.F.size()) != sys.m)
    throw ModelEvalError("eval_reactions: evaluator returned wrong dimension");
  check_finite(out.H, "H", u, v);
  check_finite(out.F, "F", u, v);
  check_finite(out.G, "G", u, v);
  return out;
}

BuiltinModel builtin(const std::string& name,
                     const std::map<std::string, double>& rate_overrides) {
  if (name == "min_system") return make_min_system(rate_overrides);
  if (name == "signaling") return make_signaling(rate_overrides);
  if (name == "toy_conserving") return make_toy_conserving(rate_overrides);
  if (name == "toy_open") return make_toy_open(rate_overrides);
  throw ConfigError("unknown built-in model '" + name +
                    "' (expected min_system, signaling, toy_conserving or toy_open)");
}

std::vector<std::string> builtin_names() {
  return {"min_system", "signaling", "toy_conserving", "toy_open"};
}

std::vector<ConservedCombination> conserved_combinations(const ReactionSystem& sys) {
  return sys.conserved;
}

SampledInitialData sample_initial_data(const InitialData& data, const ReactionSystem& sys,
                                       const BulkMesh& bulk, const SurfaceMesh& surface) {
  SampledInitialData out;
  out.u.assign(sys.k, std::vector<double>(bulk.n_cells(), 0.0));
  out.v.assign(sys.m, std::vector<double>(surface.n_nodes(), 0.0));
  for (int c = 0; c < bulk.n_cells(); ++c) {
    const auto vals = data.u0(bulk.cell_centers[c].r, bulk.cell_centers[c].theta);
    if (static_cast<int>(vals.size()) != sys.k)
      throw ModelEvalError("initial bulk data has wrong component count");
    for (int s = 0; s < sys.k; ++s) out.u[s][c] = vals[s];
  }
  for (int n = 0; n < surface.n_nodes(); ++n) {
    const auto vals = data.v0(surface.node_angles[n]);
    if (static_cast<int>(vals.size()) != sys.m)
      throw ModelEvalError("initial surface data has wrong component count");
    for (int s = 0; s < sys.m; ++s) out.v[s][n] = vals[s];
  }
  return out;
}

BuiltinModel model_from_json_text(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }

  detail::reject_unknown_keys(j, {"name", "species", "D", "D_tilde", "params", "H", "F", "G",
                                  "quasi_positive", "conserved", "initial"},
                              "");
  BuiltinModel model;
  ReactionSystem& sys = model.system;
  sys.name = j.value("name", "user_model");
  if (!j.contains("species"))
    throw ConfigError("model file: missing \"species\" object with bulk/surface name lists");
  detail::reject_unknown_keys(j["species"], {"bulk", "surface"}, "species");
  const auto bulk_names = j["species"].at("bulk").get<std::vector<std::string>>();
  const auto surf_names = j["species"].at("surface").get<std::vector<std::string>>();
  sys.k = static_cast<int>(bulk_names.size());
  sys.m = static_cast<int>(surf_names.size());
  sys.D = j.at("D").get<std::vector<double>>();
  sys.D_tilde = j.at("D_tilde").get<std::vector<double>>();
  if (static_cast<int>(sys.D.size()) != sys.k || static_cast<int>(sys.D_tilde.size()) != sys.m)
    throw ConfigError("model file: diffusivity counts do not match species counts");
  for (double d : sys.D)
    if (d <= 0.0) throw ConfigError("model file: bulk diffusivities must be positive");
  for (double d : sys.D_tilde)
    if (d <= 0.0) throw ConfigError("model file: surface diffusivities must be positive");

  std::map<std::string, double> params;
  if (j.contains("params"))
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
      params[it.key()] = it.value().get<double>();
  model.rate_constants = params;

  std::vector<std::string> uv_vars = bulk_names;
  uv_vars.insert(uv_vars.end(), surf_names.begin(), surf_names.end());
  std::vector<std::string> u_vars = bulk_names;

  auto parse_list = [&params](const json& arr, const std::vector<std::string>& vars,
                              size_t expected, const char* which) {
    if (!arr.is_array() || arr.size() != expected)
      throw ConfigError(std::string("model file: ") + which + " must list " +
                        std::to_string(expected) + " expressions");
    std::vector<Expression> exprs;
    for (const auto& e : arr) exprs.push_back(Expression::parse(e.get<std::string>(), vars, params));
    return exprs;
  };

  auto h_exprs = parse_list(j.at("H"), u_vars, sys.k, "H");
  auto f_exprs = parse_list(j.at("F"), uv_vars, sys.m, "F");
  auto g_exprs = parse_list(j.at("G"), uv_vars, sys.k, "G");

  const int k = sys.k, m = sys.m;
  sys.H = [h_exprs, k](const std::vector<double>& u) {
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = h_exprs[i].eval(u);
    return out;
  };
  auto eval_uv = [k, m](const std::vector<Expression>& exprs, const std::vector<double>& u,
                        const std::vector<double>& v) {
    std::vector<double> args = u;
    args.insert(args.end(), v.begin(), v.end());
    std::vector<double> out(exprs.size());
    for (size_t i = 0; i < exprs.size(); ++i) out[i] = exprs[i].eval(args);
    return out;
  };
  sys.F = [f_exprs, eval_uv](const std::vector<double>& u, const std::vector<double>& v) {
    return eval_uv(f_exprs, u, v);
  };
  sys.G = [g_exprs, eval_uv](const std::vector<double>& u, const std::vector<double>& v) {
    return eval_uv(g_exprs, u, v);
  };

  sys.quasi_positive_declared = j.value("quasi_positive", false);
  if (j.contains("conserved")) {
    for (const auto& c : j["conserved"]) {
      ConservedCombination combo;
      combo.cu = c.at("cu").get<std::vector<double>>();
      combo.cv = c.at("cv").get<std::vector<double>>();
      combo.label = c.value("label", "combination");
      if (static_cast<int>(combo.cu.size()) != sys.k ||
          static_cast<int>(combo.cv.size()) != sys.m)
        throw ConfigError("model file: conserved combination has wrong weight counts");
      sys.conserved.push_back(combo);
    }
  }

  // Initial data defaults to 1 everywhere; expressions in (r, theta) / theta override.
  std::vector<Expression> u0_exprs, v0_exprs;
  if (j.contains("initial")) {
    const auto& init = j["initial"];
    detail::reject_unknown_keys(init, {"u", "v"}, "initial");
    if (init.contains("u"))
      for (const auto& e : init["u"])
        u0_exprs.push_back(Expression::parse(e.get<std::string>(), {"r", "theta"}, params));
    if (init.contains("v"))
      for (const auto& e : init["v"])
        v0_exprs.push_back(Expression::parse(e.get<std::string>(), {"theta"}, params));
    if (!u0_exprs.empty() && static_cast<int>(u0_exprs.size()) != sys.k)
      throw ConfigError("model file: initial.u must list one expression per bulk species");
    if (!v0_exprs.empty() && static_cast<int>(v0_exprs.size()) != sys.m)
      throw ConfigError("model file: initial.v must list one expression per surface species");
  }
  if (u0_exprs.empty()) {
    model.initial.u0 = [k](double, double) { return std::vector<double>(k, 1.0); };
  } else {
    model.initial.u0 = [u0_exprs](double r, double theta) {
      std::vector<double> out(u0_exprs.size());
      const std::vector<double> args{r, theta};
      for (size_t i = 0; i < u0_exprs.size(); ++i) out[i] = u0_exprs[i].eval(args);
      return out;
    };
  }
  if (v0_exprs.empty()) {
    model.initial.v0 = [m](double) { return std::vector<double>(m, 1.0); };
  } else {
    model.initial.v0 = [v0_exprs](double theta) {
      std::vector<double> out(v0_exprs.size());
      const std::vector<double> args{theta};
      for (size_t i = 0; i < v0_exprs.size(); ++i) out[i] = v0_exprs[i].eval(args);
      return out;
    };
  }
  return model;
}

BuiltinModel model_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

}  // namespace bsrd
