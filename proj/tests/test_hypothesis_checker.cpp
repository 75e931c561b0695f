#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsrd/hypothesis_checker.hpp"

using namespace bsrd;

namespace {

ReactionSystem constant_negative_g() {
  ReactionSystem sys;
  sys.k = 1;
  sys.m = 1;
  sys.D = {1.0};
  sys.D_tilde = {1.0};
  sys.name = "constant_negative_g";
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.F = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  sys.G = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{-1.0};
  };
  return sys;
}

ReactionSystem exponential_f() {
  ReactionSystem sys;
  sys.k = 1;
  sys.m = 1;
  sys.D = {1.0};
  sys.D_tilde = {1.0};
  sys.name = "exponential_f";
  sys.H = [](const std::vector<double>&) { return std::vector<double>{0.0}; };
  sys.F = [](const std::vector<double>& u, const std::vector<double>&) {
    return std::vector<double>{std::exp(std::min(u[0], 700.0))};
  };
  sys.G = [](const std::vector<double>&, const std::vector<double>&) {
    return std::vector<double>{0.0};
  };
  return sys;
}

}  // namespace

TEST_CASE("sampling is deterministic and scales with the box") {
  const auto a = sample_box(2, 1, 10.0, 64, 42);
  const auto b = sample_box(2, 1, 10.0, 64, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].zeta == b[i].zeta);
    CHECK(a[i].nu == b[i].nu);
  }
  // Same seed at a smaller box: the same points scaled down.
  const auto c = sample_box(2, 1, 1.0, 64, 42);
  for (size_t i = 0; i < a.size(); ++i)
    for (int s = 0; s < 2; ++s)
      CHECK(c[i].zeta[s] == doctest::Approx(0.1 * a[i].zeta[s]).epsilon(1e-13));
  // Corners of the box are present.
  bool has_origin = false, has_far_corner = false;
  for (const auto& p : a) {
    if (p.zeta[0] == 0.0 && p.zeta[1] == 0.0 && p.nu[0] == 0.0) has_origin = true;
    if (p.zeta[0] == 10.0 && p.zeta[1] == 10.0 && p.nu[0] == 10.0) has_far_corner = true;
  }
  CHECK(has_origin);
  CHECK(has_far_corner);
}

TEST_CASE("quasi-positivity verdicts") {
  const BuiltinModel toy = builtin("toy_conserving");
  CHECK(check_quasi_positive(toy.system, 100.0, 256, 7).holds);

  const BuiltinModel min_model = builtin("min_system");
  CHECK(check_quasi_positive(min_model.system, 100.0, 256, 7).holds);

  const ConditionReport bad = check_quasi_positive(constant_negative_g(), 100.0, 256, 7);
  CHECK(!bad.holds);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->point.zeta[0] == 0.0);  // witness zeroes the bulk species
  CHECK(bad.witness->rhs == doctest::Approx(-1.0));
}

TEST_CASE("V1 on the worked pairings") {
  const BuiltinModel toy = builtin("toy_conserving");
  CHECK(check_V1(toy.system, 1, 1, 1.0, 1.0, 1.0, 100.0, 256, 3).holds);

  // min system, i = 2, j = 3: sigma F2 + G3 = 0 at sigma = 1.
  const BuiltinModel min_model = builtin("min_system");
  CHECK(check_V1(min_model.system, 2, 3, 1.0, 1.0, 1.0, 1e3, 256, 3).holds);

  // signaling, i = 2, j = 1: G + F2 <= k3, so alpha = k3 works.
  const BuiltinModel sig = builtin("signaling");
  CHECK(check_V1(sig.system, 2, 1, 1.0, 1.0, 1.0, 1e3, 256, 3).holds);

  CHECK_THROWS_AS(check_V1(toy.system, 1, 1, -1.0, 1.0, 1.0, 10.0, 16, 3), ConfigError);
}

TEST_CASE("V2 verdicts including the open-problem violation") {
  const BuiltinModel toy = builtin("toy_conserving");
  CHECK(check_V2(toy.system, 1, 1, 1.0, 100.0, 256, 3).holds);  // G <= 0

  // toy_open at box 100: the deterministic far corner u = v = 100 gives
  // G = 1e8 > K_g (u + v + 1) = 1e4 * 201.
  const BuiltinModel open = builtin("toy_open");
  const ConditionReport rep = check_V2(open.system, 1, 1, 1e4, 100.0, 256, 3);
  CHECK(!rep.holds);
  REQUIRE(rep.witness.has_value());
  const double z = rep.witness->point.zeta[0];
  const double n = rep.witness->point.nu[0];
  CHECK(rep.witness->lhs == doctest::Approx(z * z * n * n));
  CHECK(rep.witness->lhs > rep.witness->rhs + 1e-9);
  // Re-evaluating the witness reproduces the failure.
  const ReactionValues vals = eval_reactions(open.system, {z}, {n});
  CHECK(vals.G[0] > 1e4 * (z + n + 1.0) + 1e-9);

  // min system j = 2 must pair with i = 2: G2 = k6 v2.
  const BuiltinModel min_model = builtin("min_system");
  CHECK(check_V2(min_model.system, 2, 2, 1.0, 1e3, 256, 3).holds);
  CHECK(!check_V2(min_model.system, 1, 2, 1.0, 1e3, 256, 3).holds);
}

TEST_CASE("V3 verdicts") {
  const BuiltinModel toy = builtin("toy_conserving");
  CHECK(check_V3(toy.system, 1, 1.0, 4, 1e3, 256, 3).holds);  // u^2 v^2 <= (u+v+1)^4

  const BuiltinModel min_model = builtin("min_system");
  CHECK(check_V3(min_model.system, 2, 2.0 + 1e-9, 4, 1e3, 256, 3).holds);  // K_f = k4 + k5

  // Exponential growth escapes any fixed polynomial bound at large box.
  const ConditionReport rep = check_V3(exponential_f(), 1, 1e4, 8, 1e3, 256, 3);
  CHECK(!rep.holds);
  REQUIRE(rep.witness.has_value());
}

TEST_CASE("classify reproduces the worked verdicts") {
  CheckerOptions options;
  options.samples = 256;

  SUBCASE("toy_conserving is verified through the single pair") {
    const Verdict v = classify(builtin("toy_conserving").system, options);
    CHECK(v.hypotheses_verified);
    CHECK(v.paired_surface_of_bulk(1) == 1);
    CHECK(v.paired_bulk_of_surface(1) == 1);
  }

  SUBCASE("toy_open is not verified and carries a V2 violation witness") {
    const Verdict v = classify(builtin("toy_open").system, options);
    CHECK(!v.hypotheses_verified);
    bool found_v2_violation = false;
    for (const ConditionReport& rep : v.reports) {
      if (rep.condition == Condition::V2 && !rep.holds && rep.witness) {
        found_v2_violation = true;
        const double z = rep.witness->point.zeta[0];
        const double n = rep.witness->point.nu[0];
        const ReactionValues vals =
            eval_reactions(builtin("toy_open").system, {z}, {n});
        CHECK(vals.G[0] > rep.k_g * (z + n + 1.0) + 1e-9);
      }
    }
    CHECK(found_v2_violation);
    // The surface species is still discharged (v is uniformly bounded).
    bool v1_poly = false;
    for (const auto& res : v.resolutions)
      if (!res.is_bulk && res.index == 1 && res.route == ResolutionRoute::PolyF) v1_poly = true;
    CHECK(v1_poly);
  }

  SUBCASE("min_system is verified with the worked pairings") {
    const Verdict v = classify(builtin("min_system").system, options);
    CHECK(v.hypotheses_verified);
    CHECK(v.paired_surface_of_bulk(3) == 2);  // (j = 3, i = 2)
    CHECK(v.paired_surface_of_bulk(1) == 1);  // (j = 1, i = 1)
    // u2 is discharged through its bounded boundary flux, not a pair.
    bool u2_bounded = false;
    for (const auto& res : v.resolutions)
      if (res.is_bulk && res.index == 2 && res.route == ResolutionRoute::BoundedG)
        u2_bounded = true;
    CHECK(u2_bounded);
  }

  SUBCASE("signaling is verified") {
    const Verdict v = classify(builtin("signaling").system, options);
    CHECK(v.hypotheses_verified);
    CHECK(v.paired_bulk_of_surface(2) == 1);  // (i = 2, j = 1)
    bool v1_poly = false;
    for (const auto& res : v.resolutions)
      if (!res.is_bulk && res.index == 1 && res.route == ResolutionRoute::PolyF) v1_poly = true;
    CHECK(v1_poly);
  }
}

TEST_CASE("determinism: identical inputs give identical reports") {
  const BuiltinModel open = builtin("toy_open");
  const ConditionReport a = check_V2(open.system, 1, 1, 1e4, 1e3, 256, 99);
  const ConditionReport b = check_V2(open.system, 1, 1, 1e4, 1e3, 256, 99);
  REQUIRE(a.witness.has_value());
  REQUIRE(b.witness.has_value());
  CHECK(a.witness->point.zeta[0] == b.witness->point.zeta[0]);
  CHECK(a.witness->lhs == b.witness->lhs);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("monotonicity: a condition holding with margin on a box holds on sub-boxes") {
  // G of the min system at the (2, 2) pairing is monotone in its
  // arguments, so the scaled-down sample points cannot violate.
  const BuiltinModel min_model = builtin("min_system");
  for (double box : {1000.0, 100.0, 10.0, 1.0})
    CHECK(check_V2(min_model.system, 2, 2, 2.0, box, 256, 5).holds);
}

TEST_CASE("verdict JSON is self-describing") {
  CheckerOptions options;
  options.samples = 128;
  const Verdict v = classify(builtin("toy_conserving").system, options);
  const std::string json = v.to_json();
  CHECK(json.find("hypotheses-verified") != std::string::npos);
  CHECK(json.find("\"route\":\"paired\"") != std::string::npos);
}
