#include "bsrd/hypothesis_checker.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace bsrd {

namespace {

constexpr double kWitnessTol = 1e-9;

double orthant_sum(const OrthantPoint& p, const std::vector<bool>& resolved_bulk,
                   const std::vector<bool>& resolved_surf) {
  double s = 0.0;
  for (size_t j = 0; j < p.zeta.size(); ++j)
    if (resolved_bulk[j + 1]) s += p.zeta[j];
  for (size_t i = 0; i < p.nu.size(); ++i)
    if (resolved_surf[i + 1]) s += p.nu[i];
  return s;
}

double euclidean_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::string point_to_string(const OrthantPoint& p) {
  std::ostringstream os;
  os << "zeta=(";
  for (size_t i = 0; i < p.zeta.size(); ++i) os << (i ? "," : "") << p.zeta[i];
  os << "), nu=(";
  for (size_t i = 0; i < p.nu.size(); ++i) os << (i ? "," : "") << p.nu[i];
  os << ")";
  return os.str();
}

/// Precomputed reaction values at a sample set, shared across the
/// parameter grid sweeps of classify.
struct SampledValues {
  std::vector<OrthantPoint> points;
  std::vector<ReactionValues> values;
};

SampledValues evaluate_samples(const ReactionSystem& sys, double box_max, int samples,
                               std::uint64_t seed, long long* budget) {
  SampledValues out;
  out.points = sample_box(sys.k, sys.m, box_max, samples, seed);
  out.values.reserve(out.points.size());
  for (const auto& p : out.points) {
    if (budget) {
      if (*budget <= 0) throw ConfigError("hypothesis checker: search budget exhausted");
      --*budget;
    }
    out.values.push_back(eval_reactions(sys, p.zeta, p.nu));
  }
  return out;
}

}  // namespace

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::QuasiPositive: return "quasi_positive";
    case Condition::V1: return "V1";
    case Condition::V2: return "V2";
    case Condition::V3: return "V3";
  }
  return "?";
}

std::vector<OrthantPoint> sample_box(int k, int m, double box_max, int samples,
                                     std::uint64_t seed) {
  if (box_max <= 0.0) throw ConfigError("sample_box: box_max must be positive");
  if (samples < 1) throw ConfigError("sample_box: samples must be at least 1");
  const int dim = k + m;
  std::vector<OrthantPoint> points;

  // Deterministic corners first (all coordinates at 0 or box_max).
  if (dim <= 12) {
    for (int mask = 0; mask < (1 << dim); ++mask) {
      OrthantPoint p;
      p.zeta.resize(k);
      p.nu.resize(m);
      for (int c = 0; c < dim; ++c) {
        const double v = (mask >> c) & 1 ? box_max : 0.0;
        if (c < k)
          p.zeta[c] = v;
        else
          p.nu[c - k] = v;
      }
      points.push_back(std::move(p));
    }
  }

  // Stratified interior points: per-coordinate shuffled strata, jittered.
  // Fractions depend only on (dim, samples, seed), so shrinking the box
  // shrinks the same point set.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> strata(dim);
  for (int c = 0; c < dim; ++c) {
    strata[c].resize(samples);
    for (int s = 0; s < samples; ++s) strata[c][s] = s;
    std::shuffle(strata[c].begin(), strata[c].end(), rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    OrthantPoint p;
    p.zeta.resize(k);
    p.nu.resize(m);
    for (int c = 0; c < dim; ++c) {
      const double frac = (strata[c][s] + unit(rng)) / samples;
      const double v = frac * box_max;
      if (c < k)
        p.zeta[c] = v;
      else
        p.nu[c - k] = v;
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::string ConditionReport::to_json() const {
  std::ostringstream os;
  os.precision(16);
  os << "{\"condition\":\"" << condition_name(condition) << "\"";
  if (i > 0) os << ",\"i\":" << i;
  if (j > 0) os << ",\"j\":" << j;
  if (condition == Condition::V1)
    os << ",\"sigma\":" << sigma << ",\"alpha\":" << alpha << ",\"beta\":" << beta;
  if (condition == Condition::V2) os << ",\"K_g\":" << k_g;
  if (condition == Condition::V3) os << ",\"K_f\":" << k_f << ",\"l\":" << l;
  os << ",\"status\":\"" << (holds ? "holds-on-sampled-region" : "violated") << "\"";
  os << ",\"box_max\":" << box_max << ",\"samples\":" << samples << ",\"seed\":" << seed;
  if (witness) {
    os << ",\"witness\":{\"point\":\"" << point_to_string(witness->point)
       << "\",\"lhs\":" << witness->lhs << ",\"rhs\":" << witness->rhs;
    if (witness->component >= 0) os << ",\"component\":" << witness->component;
    os << "}";
  }
  if (!note.empty()) os << ",\"note\":\"" << note << "\"";
  os << "}";
  return os.str();
}

ConditionReport check_quasi_positive(const ReactionSystem& sys, double box_max, int samples,
                                     std::uint64_t seed) {
  ConditionReport report;
  report.condition = Condition::QuasiPositive;
  report.box_max = box_max;
  report.samples = samples;
  report.seed = seed;

  double worst = 0.0;
  const auto points = sample_box(sys.k, sys.m, box_max, samples, seed);
  for (const auto& p : points) {
    for (int c = 0; c < sys.k + sys.m; ++c) {
      OrthantPoint q = p;
      if (c < sys.k)
        q.zeta[c] = 0.0;
      else
        q.nu[c - sys.k] = 0.0;
      const ReactionValues vals = eval_reactions(sys, q.zeta, q.nu);
      double value;
      std::string which;
      if (c < sys.k) {
        // Both G_j and H_j must be nonnegative when zeta_j = 0.
        if (vals.G[c] < vals.H[c]) {
          value = vals.G[c];
          which = "G" + std::to_string(c + 1);
        } else {
          value = vals.H[c];
          which = "H" + std::to_string(c + 1);
        }
      } else {
        value = vals.F[c - sys.k];
        which = "F" + std::to_string(c - sys.k + 1);
      }
      if (value < -kWitnessTol && value < worst) {
        worst = value;
        report.holds = false;
        Witness w;
        w.point = q;
        w.lhs = 0.0;
        w.rhs = value;
        w.component = c;
        report.witness = w;
        report.note = which + " negative with own species zero";
      }
    }
  }
  return report;
}

ConditionReport check_V1(const ReactionSystem& sys, int i, int j, double sigma, double alpha,
                         double beta, double box_max, int samples, std::uint64_t seed) {
  if (sigma <= 0.0 || alpha <= 0.0 || beta <= 0.0)
    throw ConfigError("check_V1: sigma, alpha, beta must be positive");
  ConditionReport report;
  report.condition = Condition::V1;
  report.i = i;
  report.j = j;
  report.sigma = sigma;
  report.alpha = alpha;
  report.beta = beta;
  report.box_max = box_max;
  report.samples = samples;
  report.seed = seed;

  double worst_margin = 0.0;
  const auto points = sample_box(sys.k, sys.m, box_max, samples, seed);
  for (const auto& p : points) {
    const ReactionValues vals = eval_reactions(sys, p.zeta, p.nu);
    const double lhs_fg = sigma * vals.F[i - 1] + vals.G[j - 1];
    const double rhs_fg = alpha * (p.zeta[j - 1] + p.nu[i - 1] + 1.0);
    const double lhs_h = vals.H[j - 1];
    const double rhs_h = beta * (p.zeta[j - 1] + 1.0);
    const double margin = std::max(lhs_fg - rhs_fg, lhs_h - rhs_h);
    if (margin > kWitnessTol && margin > worst_margin) {
      worst_margin = margin;
      report.holds = false;
      Witness w;
      w.point = p;
      if (lhs_fg - rhs_fg >= lhs_h - rhs_h) {
        w.lhs = lhs_fg;
        w.rhs = rhs_fg;
        report.note = "sigma F_i + G_j exceeds alpha (zeta_j + nu_i + 1)";
      } else {
        w.lhs = lhs_h;
        w.rhs = rhs_h;
        report.note = "H_j exceeds beta (zeta_j + 1)";
      }
      report.witness = w;
    }
  }
  return report;
}

ConditionReport check_V2(const ReactionSystem& sys, int i, int j, double k_g, double box_max,
                         int samples, std::uint64_t seed) {
  if (k_g <= 0.0) throw ConfigError("check_V2: K_g must be positive");
  ConditionReport report;
  report.condition = Condition::V2;
  report.i = i;
  report.j = j;
  report.k_g = k_g;
  report.box_max = box_max;
  report.samples = samples;
  report.seed = seed;

  double worst_margin = 0.0;
  const auto points = sample_box(sys.k, sys.m, box_max, samples, seed);
  for (const auto& p : points) {
    const ReactionValues vals = eval_reactions(sys, p.zeta, p.nu);
    const double lhs = vals.G[j - 1];
    const double rhs = k_g * (p.zeta[j - 1] + p.nu[i - 1] + 1.0);
    const double margin = lhs - rhs;
    if (margin > kWitnessTol && margin > worst_margin) {
      worst_margin = margin;
      report.holds = false;
      Witness w;
      w.point = p;
      w.lhs = lhs;
      w.rhs = rhs;
      report.witness = w;
    }
  }
  return report;
}

ConditionReport check_V3(const ReactionSystem& sys, int i, double k_f, int l, double box_max,
                         int samples, std::uint64_t seed) {
  if (k_f <= 0.0 || l < 1) throw ConfigError("check_V3: K_f must be positive and l >= 1");
  ConditionReport report;
  report.condition = Condition::V3;
  report.i = i;
  report.k_f = k_f;
  report.l = l;
  report.box_max = box_max;
  report.samples = samples;
  report.seed = seed;

  double worst_margin = 0.0;
  const auto points = sample_box(sys.k, sys.m, box_max, samples, seed);
  for (const auto& p : points) {
    const ReactionValues vals = eval_reactions(sys, p.zeta, p.nu);
    const double lhs = vals.F[i - 1];
    const double base = euclidean_norm(p.zeta) + euclidean_norm(p.nu) + 1.0;
    const double rhs = k_f * std::pow(base, l);
    const double margin = lhs - rhs;
    if (margin > kWitnessTol && margin > worst_margin) {
      worst_margin = margin;
      report.holds = false;
      Witness w;
      w.point = p;
      w.lhs = lhs;
      w.rhs = rhs;
      report.witness = w;
    }
  }
  return report;
}

int Verdict::paired_surface_of_bulk(int j) const {
  for (const auto& r : resolutions)
    if (r.is_bulk && r.index == j && r.route == ResolutionRoute::Paired) return r.partner;
  return 0;
}

int Verdict::paired_bulk_of_surface(int i) const {
  for (const auto& r : resolutions)
    if (!r.is_bulk && r.index == i && r.route == ResolutionRoute::Paired) return r.partner;
  return 0;
}

std::string Verdict::to_json() const {
  std::ostringstream os;
  os << "{\"status\":\"" << (hypotheses_verified ? "hypotheses-verified" : "not-verified")
     << "\",\"resolutions\":[";
  for (size_t r = 0; r < resolutions.size(); ++r) {
    const auto& res = resolutions[r];
    os << (r ? "," : "") << "{\"species\":\"" << (res.is_bulk ? "u" : "v") << res.index
       << "\",\"route\":\""
       << (res.route == ResolutionRoute::Paired
               ? "paired"
               : (res.route == ResolutionRoute::BoundedG ? "bounded_G" : "poly_F"))
       << "\"";
    if (res.partner > 0) os << ",\"partner\":\"" << (res.is_bulk ? "v" : "u") << res.partner << "\"";
    os << ",\"stage\":" << res.stage << "}";
  }
  os << "],\"reports\":[";
  for (size_t r = 0; r < reports.size(); ++r) os << (r ? "," : "") << reports[r].to_json();
  os << "]}";
  return os.str();
}

namespace {

/// Classify works on reaction values precomputed per box so the
/// parameter grid sweeps cost nothing extra.
struct BoxData {
  double box_max;
  SampledValues sampled;
};

struct PairCertificate {
  bool found = false;
  double sigma = 0, alpha = 0, beta = 0, k_g = 0, k_f = 0;
  int l = 0;
  ConditionReport failure;  // most informative failing report when !found
};

double smallest_grid_at_least(const std::vector<double>& grid, double needed) {
  double best = -1.0;
  for (double g : grid)
    if (g >= needed && (best < 0.0 || g < best)) best = g;
  return best;  // negative when the grid cannot cover the requirement
}

}  // namespace

Verdict classify(const ReactionSystem& sys, const CheckerOptions& options) {
  Verdict verdict;
  long long budget = options.search_budget;

  std::vector<BoxData> boxes;
  for (double b : options.box_sweep)
    boxes.push_back({b, evaluate_samples(sys, b, options.samples, options.seed, &budget)});

  std::vector<bool> resolved_bulk(sys.k + 1, false);
  std::vector<bool> resolved_surf(sys.m + 1, false);

  // Needed coefficient for lhs <= coeff * weight over every box sample;
  // also returns the worst point for witness reporting.
  struct Needed {
    double coeff = 0.0;
    const OrthantPoint* worst_point = nullptr;
    double worst_lhs = 0.0, worst_weight = 1.0;
  };
  auto needed_coeff = [&](auto&& lhs_fn, auto&& weight_fn) {
    Needed n;
    for (const auto& box : boxes) {
      for (size_t s = 0; s < box.sampled.points.size(); ++s) {
        const double lhs = lhs_fn(box.sampled.points[s], box.sampled.values[s]);
        const double w = weight_fn(box.sampled.points[s]);
        const double c = lhs / w;
        if (c > n.coeff) {
          n.coeff = c;
          n.worst_point = &box.sampled.points[s];
          n.worst_lhs = lhs;
          n.worst_weight = w;
        }
      }
    }
    return n;
  };

  auto make_violation = [&](Condition cond, int i, int j, const Needed& n, double coeff_used,
                            const std::string& note) {
    ConditionReport rep;
    rep.condition = cond;
    rep.i = i;
    rep.j = j;
    rep.holds = false;
    rep.box_max = boxes.back().box_max;
    rep.samples = options.samples;
    rep.seed = options.seed;
    rep.note = note;
    if (cond == Condition::V2) rep.k_g = coeff_used;
    if (cond == Condition::V3) rep.k_f = coeff_used;
    if (cond == Condition::V1) rep.alpha = coeff_used;
    if (n.worst_point) {
      Witness w;
      w.point = *n.worst_point;
      w.lhs = n.worst_lhs;
      w.rhs = coeff_used * n.worst_weight;
      rep.witness = w;
    }
    return rep;
  };

  const double coeff_cap = options.coeff_grid.back();

  // Full condition pair (V1 + V2 + V3) for surface i against bulk j.
  // The H bound may lean on already resolved bulk species, mirroring the
  // staged bootstrap of the worked examples.
  auto try_pair = [&](int i, int j) {
    PairCertificate cert;
    // V2 first: it is the binding constraint for the open problem.
    Needed n_g = needed_coeff(
        [&](const OrthantPoint&, const ReactionValues& v) { return v.G[j - 1]; },
        [&](const OrthantPoint& p) { return p.zeta[j - 1] + p.nu[i - 1] + 1.0; });
    const double kg = smallest_grid_at_least(options.coeff_grid, std::max(n_g.coeff, 1.0));
    if (kg < 0.0) {
      cert.failure = make_violation(Condition::V2, i, j, n_g, coeff_cap,
                                    "G_j not linearly bounded in (zeta_j, nu_i)");
      return cert;
    }

    for (double sigma : options.sigma_grid) {
      Needed n_fg = needed_coeff(
          [&](const OrthantPoint&, const ReactionValues& v) {
            return sigma * v.F[i - 1] + v.G[j - 1];
          },
          [&](const OrthantPoint& p) { return p.zeta[j - 1] + p.nu[i - 1] + 1.0; });
      const double alpha = smallest_grid_at_least(options.coeff_grid, std::max(n_fg.coeff, 1.0));
      if (alpha < 0.0) {
        if (!cert.failure.witness)
          cert.failure = make_violation(Condition::V1, i, j, n_fg, coeff_cap,
                                        "mass-control inequality fails at sigma = " +
                                            std::to_string(sigma));
        continue;
      }
      Needed n_h = needed_coeff(
          [&](const OrthantPoint&, const ReactionValues& v) { return v.H[j - 1]; },
          [&](const OrthantPoint& p) {
            return p.zeta[j - 1] + orthant_sum(p, resolved_bulk, resolved_surf) + 1.0;
          });
      const double beta = smallest_grid_at_least(options.coeff_grid, std::max(n_h.coeff, 1.0));
      if (beta < 0.0) {
        if (!cert.failure.witness)
          cert.failure = make_violation(Condition::V1, i, j, n_h, coeff_cap,
                                        "H_j not linearly bounded in zeta_j and resolved species");
        continue;
      }
      // V3 with the smallest workable degree.
      for (int l : options.l_grid) {
        Needed n_f = needed_coeff(
            [&](const OrthantPoint&, const ReactionValues& v) { return v.F[i - 1]; },
            [&](const OrthantPoint& p) {
              return std::pow(euclidean_norm(p.zeta) + euclidean_norm(p.nu) + 1.0, l);
            });
        const double kf = smallest_grid_at_least(options.coeff_grid, std::max(n_f.coeff, 1.0));
        if (kf >= 0.0) {
          cert.found = true;
          cert.sigma = sigma;
          cert.alpha = alpha;
          cert.beta = beta;
          cert.k_g = kg;
          cert.k_f = kf;
          cert.l = l;
          return cert;
        }
        if (l == options.l_grid.back() && !cert.failure.witness)
          cert.failure = make_violation(Condition::V3, i, 0, n_f, coeff_cap,
                                        "F_i not polynomially bounded within the degree grid");
      }
    }
    return cert;
  };

  int stage = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    ++stage;

    // Stage pair search over unresolved (i, j).
    for (int j = 1; j <= sys.k; ++j) {
      if (resolved_bulk[j]) continue;
      for (int i = 1; i <= sys.m; ++i) {
        if (resolved_surf[i]) continue;
        PairCertificate cert = try_pair(i, j);
        if (!cert.found) {
          if (cert.failure.witness) verdict.reports.push_back(cert.failure);
          continue;
        }
        resolved_bulk[j] = true;
        resolved_surf[i] = true;
        verdict.resolutions.push_back({true, j, ResolutionRoute::Paired, i, stage});
        verdict.resolutions.push_back({false, i, ResolutionRoute::Paired, j, stage});
        ConditionReport r1, r2, r3;
        r1.condition = Condition::V1;
        r1.i = i;
        r1.j = j;
        r1.sigma = cert.sigma;
        r1.alpha = cert.alpha;
        r1.beta = cert.beta;
        r2.condition = Condition::V2;
        r2.i = i;
        r2.j = j;
        r2.k_g = cert.k_g;
        r3.condition = Condition::V3;
        r3.i = i;
        r3.k_f = cert.k_f;
        r3.l = cert.l;
        for (ConditionReport* r : {&r1, &r2, &r3}) {
          r->holds = true;
          r->box_max = boxes.back().box_max;
          r->samples = options.samples;
          r->seed = options.seed;
        }
        verdict.reports.push_back(r1);
        verdict.reports.push_back(r2);
        verdict.reports.push_back(r3);
        progress = true;
        break;
      }
    }

    // Remaining bulk species with boundary flux linearly bounded by the
    // species itself plus resolved quantities (and H likewise).
    for (int j = 1; j <= sys.k; ++j) {
      if (resolved_bulk[j]) continue;
      Needed n_g = needed_coeff(
          [&](const OrthantPoint&, const ReactionValues& v) { return v.G[j - 1]; },
          [&](const OrthantPoint& p) {
            return p.zeta[j - 1] + orthant_sum(p, resolved_bulk, resolved_surf) + 1.0;
          });
      const double kg = smallest_grid_at_least(options.coeff_grid, std::max(n_g.coeff, 1.0));
      if (kg < 0.0) continue;
      Needed n_h = needed_coeff(
          [&](const OrthantPoint&, const ReactionValues& v) { return v.H[j - 1]; },
          [&](const OrthantPoint& p) {
            return p.zeta[j - 1] + orthant_sum(p, resolved_bulk, resolved_surf) + 1.0;
          });
      const double beta = smallest_grid_at_least(options.coeff_grid, std::max(n_h.coeff, 1.0));
      if (beta < 0.0) continue;
      resolved_bulk[j] = true;
      verdict.resolutions.push_back({true, j, ResolutionRoute::BoundedG, 0, stage});
      ConditionReport rep;
      rep.condition = Condition::V2;
      rep.j = j;
      rep.k_g = kg;
      rep.beta = beta;
      rep.holds = true;
      rep.box_max = boxes.back().box_max;
      rep.samples = options.samples;
      rep.seed = options.seed;
      rep.note = "boundary flux bounded by resolved species; discharged without a pair";
      verdict.reports.push_back(rep);
      progress = true;
    }

    // Remaining surface species with reaction polynomially bounded by
    // resolved quantities, uniformly in every unresolved coordinate.
    for (int i = 1; i <= sys.m; ++i) {
      if (resolved_surf[i]) continue;
      bool found = false;
      for (int l : options.l_grid) {
        Needed n_f = needed_coeff(
            [&](const OrthantPoint&, const ReactionValues& v) { return v.F[i - 1]; },
            [&](const OrthantPoint& p) {
              return std::pow(orthant_sum(p, resolved_bulk, resolved_surf) + 1.0, l);
            });
        const double kf = smallest_grid_at_least(options.coeff_grid, std::max(n_f.coeff, 1.0));
        if (kf < 0.0) continue;
        resolved_surf[i] = true;
        verdict.resolutions.push_back({false, i, ResolutionRoute::PolyF, 0, stage});
        ConditionReport rep;
        rep.condition = Condition::V3;
        rep.i = i;
        rep.k_f = kf;
        rep.l = l;
        rep.holds = true;
        rep.box_max = boxes.back().box_max;
        rep.samples = options.samples;
        rep.seed = options.seed;
        rep.note = "surface reaction bounded by resolved species; discharged without a pair";
        verdict.reports.push_back(rep);
        progress = true;
        found = true;
        break;
      }
      (void)found;
    }
  }

  bool all = true;
  for (int j = 1; j <= sys.k; ++j) all = all && resolved_bulk[j];
  for (int i = 1; i <= sys.m; ++i) all = all && resolved_surf[i];
  verdict.hypotheses_verified = all;
  return verdict;
}

}  // namespace bsrd
