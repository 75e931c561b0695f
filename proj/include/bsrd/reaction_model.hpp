#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsrd/geometry.hpp"

namespace bsrd {

/// Thrown when a reaction evaluator produces a non-finite value; carries
/// the offending inputs in the message.
class ModelEvalError : public std::runtime_error {
 public:
  explicit ModelEvalError(const std::string& what) : std::runtime_error(what) {}
};

/// Weighted combination of species whose total integral is constant in
/// time: cu . H == 0 and cu . G + cv . F == 0 identically.
struct ConservedCombination {
  std::vector<double> cu;
  std::vector<double> cv;
  std::string label;
};

/// Declared condition parameters for a bulk/surface index pair, used as
/// search hints by the hypothesis checker.
struct DeclaredConditionParams {
  double sigma = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double k_g = 1.0;
  double k_f = 1.0;
  int l = 1;
};

/// A bulk-surface reaction system: k bulk species u with diffusivities D
/// reacting through H in the bulk, m surface species v with diffusivities
/// D_tilde reacting through F on the boundary, coupled by the boundary
/// flux law D du/dn = G(u, v). Immutable and reentrant.
struct ReactionSystem {
  int k = 0;
  int m = 0;
  std::vector<double> D;
  std::vector<double> D_tilde;
  std::function<std::vector<double>(const std::vector<double>&)> H;
  std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)> F;
  std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)> G;
  std::string name;
  bool quasi_positive_declared = false;
  std::vector<ConservedCombination> conserved;
  std::map<std::pair<int, int>, DeclaredConditionParams> declared_properties;  // (i, j)
};

/// Initial fields as evaluators: bulk u0 over (r, theta), surface v0 over theta.
struct InitialData {
  std::function<std::vector<double>(double r, double theta)> u0;
  std::function<std::vector<double>(double theta)> v0;
};

struct ReactionValues {
  std::vector<double> H;
  std::vector<double> F;
  std::vector<double> G;
};

/// Pointwise reaction values at (u, v). Pure; throws ModelEvalError on
/// non-finite output.
ReactionValues eval_reactions(const ReactionSystem& sys, const std::vector<double>& u,
                              const std::vector<double>& v);

struct BuiltinModel {
  ReactionSystem system;
  InitialData initial;
  std::map<std::string, double> rate_constants;
};

/// Built-in systems:
///   min_system     k=3, m=2  Min protein cycle (six reactions, five species)
///   signaling      k=1, m=2  GTPase membrane signaling model
///   toy_conserving k=1, m=1  F = u^2 v^2, G = -u^2 v^2, H = 0
///   toy_open       k=1, m=1  F = -u^2 v^2, G = u^2 v^2, H = 0
/// Rate constants default to 1 and can be overridden by name.
BuiltinModel builtin(const std::string& name,
                     const std::map<std::string, double>& rate_overrides = {});

std::vector<std::string> builtin_names();

/// Known conserved combinations of a system (empty when none declared).
std::vector<ConservedCombination> conserved_combinations(const ReactionSystem& sys);

/// Discrete initial state sampled on meshes: per-species cell values and
/// node values.
struct SampledInitialData {
  std::vector<std::vector<double>> u;  // [species][cell]
  std::vector<std::vector<double>> v;  // [species][node]
};
SampledInitialData sample_initial_data(const InitialData& data, const ReactionSystem& sys,
                                       const BulkMesh& bulk, const SurfaceMesh& surface);

/// User-defined model from a JSON description (see README for the schema).
BuiltinModel model_from_json_text(const std::string& json_text);
BuiltinModel model_from_file(const std::string& path);

}  // namespace bsrd
