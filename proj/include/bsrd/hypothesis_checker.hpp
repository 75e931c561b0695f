#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsrd/reaction_model.hpp"

namespace bsrd {

enum class Condition { QuasiPositive, V1, V2, V3 };

std::string condition_name(Condition c);

/// A point in the nonnegative orthant, split into bulk and surface parts.
struct OrthantPoint {
  std::vector<double> zeta;  // bulk, size k
  std::vector<double> nu;    // surface, size m
};

/// Witness of a violated inequality: the sample point plus both sides.
struct Witness {
  OrthantPoint point;
  double lhs = 0.0;
  double rhs = 0.0;
  int component = -1;  // zeroed coordinate for quasi-positivity checks
};

/// Outcome of one structured sampling check. "holds_on_sampled_region"
/// is sampling evidence, never a proof; "violated" carries a witness
/// that re-evaluates to a failure of more than 1e-9 absolute.
struct ConditionReport {
  Condition condition = Condition::V1;
  int i = 0;  // surface index (1-based), 0 when not applicable
  int j = 0;  // bulk index (1-based), 0 when not applicable
  double sigma = 0.0, alpha = 0.0, beta = 0.0, k_g = 0.0, k_f = 0.0;
  int l = 0;
  bool holds = true;
  std::optional<Witness> witness;
  double box_max = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::string note;

  std::string to_json() const;
};

/// How a species was discharged by the staged certificate search:
///   Paired      full condition pair (V1 + V2 + V3) against a partner index
///   BoundedG    bulk species with G growing at most linearly in itself
///               and already-discharged species
///   PolyF       surface species with F polynomially bounded by
///               already-discharged species, uniformly in the rest
enum class ResolutionRoute { Paired, BoundedG, PolyF };

struct SpeciesResolution {
  bool is_bulk = false;
  int index = 0;    // 1-based
  ResolutionRoute route = ResolutionRoute::Paired;
  int partner = 0;  // paired index on the other side, 0 for non-paired routes
  int stage = 0;    // fixpoint round in which the species was discharged
};

struct Verdict {
  bool hypotheses_verified = false;
  std::vector<SpeciesResolution> resolutions;
  std::vector<ConditionReport> reports;

  /// Paired partner k_j for bulk species j, or 0 when resolved otherwise.
  int paired_surface_of_bulk(int j) const;
  /// Paired partner l_i for surface species i, or 0 when resolved otherwise.
  int paired_bulk_of_surface(int i) const;

  std::string to_json() const;
};

struct CheckerOptions {
  std::vector<double> box_sweep = {1.0, 10.0, 100.0, 1e3, 1e6};
  int samples = 512;
  std::uint64_t seed = 20240315;
  std::vector<double> sigma_grid = {1.0, 2.0, 0.5};
  std::vector<double> coeff_grid = {1.0, 10.0, 100.0, 1e3, 1e4, 1e6};  // alpha, beta, K_g, K_f
  std::vector<int> l_grid = {1, 2, 3, 4, 6, 8};
  long long search_budget = 50'000'000;  // cap on reaction evaluations
};

/// Deterministic stratified sample of [0, box_max]^(k+m) plus all box
/// corners. Identical (dimensions, samples, seed) give identical points;
/// the same seed at a smaller box yields the same points scaled down.
std::vector<OrthantPoint> sample_box(int k, int m, double box_max, int samples,
                                     std::uint64_t seed);

ConditionReport check_quasi_positive(const ReactionSystem& sys, double box_max, int samples,
                                     std::uint64_t seed);

/// (V_ij1): sigma F_i + G_j <= alpha (zeta_j + nu_i + 1) and
///          H_j <= beta (zeta_j + 1) on the sampled box.
ConditionReport check_V1(const ReactionSystem& sys, int i, int j, double sigma, double alpha,
                         double beta, double box_max, int samples, std::uint64_t seed);

/// (V_ij2): G_j <= K_g (zeta_j + nu_i + 1) on the sampled box.
ConditionReport check_V2(const ReactionSystem& sys, int i, int j, double k_g, double box_max,
                         int samples, std::uint64_t seed);

/// (V_i3): F_i <= K_f (|zeta| + |nu| + 1)^l on the sampled box.
ConditionReport check_V3(const ReactionSystem& sys, int i, double k_f, int l, double box_max,
                         int samples, std::uint64_t seed);

/// Staged certificate search for the global-existence hypothesis
/// pattern. Stage one pairs species through full V conditions; later
/// stages discharge remaining bulk species whose boundary flux is
/// linearly bounded by resolved quantities and remaining surface species
/// whose reaction is polynomially bounded by resolved quantities. A
/// "not verified" verdict is evidence of a missing certificate, never a
/// proof of blow-up.
Verdict classify(const ReactionSystem& sys, const CheckerOptions& options = {});

}  // namespace bsrd
