#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bsrd/geometry.hpp"

namespace bsrd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist2(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct HeatKernelParams {
  int n = 2;       // space dimension; only 2 is supported
  double d = 1.0;  // diffusivity; handled by rescaling time by d
};

/// Unnormalized heat kernel W(tau, x, Q) = exp(-|x-Q|^2 / (4 tau)) / tau
/// (the n = 2 case; note there is no (4 pi)^{n/2} factor, which is why
/// the jump constant below is 2 pi rather than 1/2).
double eval_W(const Vec2& x, const Vec2& q, double tau);

/// <y - Q, eta_Q> for boundary points of the circle of given radius;
/// equals -|y - Q|^2 / (2 radius) identically (chord identity).
double chord_inner_product(const Vec2& y, const Vec2& q, double radius);

/// Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.
double expint_e1(double x);

/// Flat-boundary limit of the outward normal derivative of the single
/// layer potential with unit density, computed by product integration
/// on a discrete panel grid: time integral exact per slab, arctangent
/// panel integrals exact in space. Converges to 2 pi as h -> 0.
double half_space_jump(int n_panels, double panel_width, double window, double h);

/// Discrete space-time boundary operator: block lower triangular in
/// time with circulant spatial blocks (the grid is uniform in both).
/// Entries are time-slab integrals of the kernel
///   j(Q, y, tau) = (|Q - y|^2 / (2 R)) exp(-|Q - y|^2/(4 tau)) / tau^2
/// including node quadrature weights. The density solves
///   (c_eff I - J) g = 2 gamma
/// slab by slab (equivalently g = -2 [ -c_eff I + J ]^{-1} gamma with
/// the signs fixed by the jump-constant calibration; c_eff ~ 4 pi).
struct VolterraOperator {
  double radius = 0.0;
  int n_theta = 0;
  int n_steps = 0;
  double dt = 0.0;                 // internal (diffusivity-rescaled) slab width
  double c_eff = 0.0;
  std::vector<double> node_angles;
  double node_weight = 0.0;
  // lag_kernel[L][dj]: weighted kernel integral for source slab L slabs
  // behind the collocation time and node separation dj.
  std::vector<std::vector<double>> lag_kernel;

  /// Dense block J_{ab} (1-based time indices); zero block when b > a.
  std::vector<double> block(int a, int b) const;  // row-major n_theta x n_theta

  /// out += J_lag * g for one spatial slice.
  void apply_lag(int lag, const std::vector<double>& g, std::vector<double>& out) const;

  /// Applies the full operator to a space-time density (time-major).
  std::vector<std::vector<double>> apply(const std::vector<std::vector<double>>& g) const;
};

/// Assembles the discrete operator on a uniform time grid over the
/// internal time interval [0, t_span]; c_eff comes from the half-space
/// calibration. Throws AssemblyError on non-finite blocks.
VolterraOperator assemble_J(const SurfaceMesh& surface, int n_steps, double t_span);

class AssemblyError : public std::runtime_error {
 public:
  explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

/// Density plus evaluator for the pure Neumann heat problem
///   phi_t = d Laplace(phi), d dphi/dn = gamma, phi(., 0) = 0
/// on the disk. The evaluator integrates the single layer potential
/// with exact-in-time quadrature (exponential integrals), so it is
/// defined at any interior point and any time in (0, t_end].
struct PotentialSolution {
  VolterraOperator op;
  double d = 1.0;
  double t_end = 0.0;                     // physical horizon
  std::vector<std::vector<double>> density;  // [slab][node]

  double evaluate(const Vec2& x, double t) const;
  /// Collocation-time boundary density at (node, slab), for inspection.
  double density_at(int slab, int node) const { return density[slab][node]; }
};

PotentialSolution solve_neumann(const std::function<double(double theta, double t)>& gamma,
                                const SurfaceMesh& surface, int n_steps, double t_end,
                                const HeatKernelParams& params);

/// Discrete L_p norm of boundary data on the collocation grid.
double boundary_lp_norm(const std::function<double(double, double)>& gamma,
                        const SurfaceMesh& surface, int n_steps, double t_end, double p);

/// One space-time probe pair for the parabolic Holder quotient.
struct ProbePair {
  Vec2 x;
  double t_x = 0.0;
  Vec2 y;
  double t_y = 0.0;
};

struct HolderEstimate {
  double value = 0.0;
  bool admissible = false;  // a < 1 - (n+1)/p
  double p = 0.0;
  double a = 0.0;
};

/// max over pairs of |phi(x,T) - phi(y,tau)| / (|T-tau|^{1/2} + |x-y|)^a,
/// the discrete parabolic Holder quotient. The exponent a is not
/// restricted: inadmissible exponents are what the sharpness probe uses.
HolderEstimate holder_probe(const PotentialSolution& solution, double p,
                            const std::vector<ProbePair>& pairs, double a);

/// Probe pairs graded geometrically toward the boundary anchor point
/// (radius, anchor_theta): generation k sits at distance h0 / grade^k
/// with matching tangential and parabolic-time separations. Used to
/// watch the Holder quotient stabilize (admissible exponent) or grow
/// (inadmissible) under refinement toward the boundary.
std::vector<ProbePair> holder_probe_generation(double radius, double anchor_theta,
                                               double probe_time, double h0, double grade,
                                               int generation);

/// Power-iteration estimate of the operator norm on the discrete
/// L2(M x (0, T)) space (uniform weights cancel).
double operator_norm_estimate(const VolterraOperator& op, int iterations = 30);

}  // namespace bsrd
