#include "bsrd/layer_potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <complex>

namespace bsrd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT (inverse when sign = +1; caller
/// divides by n). Used to diagonalize the circulant spatial blocks.
void fft(std::vector<std::complex<double>>& a, int sign) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/// Real eigenvalues of the symmetric circulant with the given first row.
std::vector<double> circulant_spectrum(const std::vector<double>& first_row_half, int n) {
  std::vector<std::complex<double>> col(n);
  for (int q = 0; q < n; ++q) {
    int dj = std::min(q, n - q);
    col[q] = first_row_half[dj];
  }
  fft(col, -1);
  std::vector<double> eig(n);
  for (int k = 0; k < n; ++k) eig[k] = col[k].real();
  return eig;
}

/// Dense LU with partial pivoting for the (c_eff I - J_0) diagonal
/// block; the block is the same for every slab on a uniform grid.
struct DenseLU {
  int n = 0;
  std::vector<double> a;  // row-major, factored in place
  std::vector<int> piv;

  void factor(std::vector<double> m, int dim) {
    n = dim;
    a = std::move(m);
    piv.resize(n);
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(a[k * n + k]);
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(a[i * n + k]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best < 1e-300)
        throw AssemblyError(
            "singular diagonal block in the boundary operator (jump constant calibration "
            "failed)");
      piv[k] = p;
      if (p != k)
        for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      const double inv = 1.0 / a[k * n + k];
      for (int i = k + 1; i < n; ++i) {
        const double l = a[i * n + k] * inv;
        a[i * n + k] = l;
        for (int j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
      }
    }
  }

  void solve(std::vector<double>& b) const {
    for (int k = 0; k < n; ++k) {
      if (piv[k] != k) std::swap(b[k], b[piv[k]]);
      for (int i = k + 1; i < n; ++i) b[i] -= a[i * n + k] * b[k];
    }
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) b[i] -= a[i * n + j] * b[j];
      b[i] /= a[i * n + i];
    }
  }
};

}  // namespace

double eval_W(const Vec2& x, const Vec2& q, double tau) {
  if (tau <= 0.0) throw std::domain_error("eval_W: elapsed time must be positive");
  return std::exp(-dist2(x, q) / (4.0 * tau)) / tau;
}

double chord_inner_product(const Vec2& y, const Vec2& q, double radius) {
  // eta_Q = Q / radius on the circle centered at the origin.
  return ((y.x - q.x) * q.x + (y.y - q.y) * q.y) / radius;
}

double expint_e1(double x) {
  if (x <= 0.0) throw std::domain_error("expint_e1: argument must be positive");
  if (x < 1.0) {
    // Power series around 0.
    double sum = -kEulerGamma - std::log(x);
    double term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -x / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-17 * (1.0 + std::abs(sum))) break;
    }
    return sum;
  }
  if (x > 700.0) return 0.0;  // underflows after the exp factor
  // Continued fraction, modified Lentz.
  double b = x + 1.0;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 300; ++k) {
    const double ak = -static_cast<double>(k) * k;
    b += 2.0;
    d = 1.0 / (ak * d + b);
    c = b + ak / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

double half_space_jump(int n_panels, double panel_width, double window, double h) {
  if (h <= 0.0 || window <= 0.0 || panel_width <= 0.0 || n_panels < 2)
    throw std::domain_error("half_space_jump: invalid parameters");
  // One panel is centered on the field point so the concentrating
  // arctangent mass multiplies exp(0); the panel layout matches the
  // node-centered boundary grid.
  double total = 0.0;
  for (int j = 0; j < n_panels; ++j) {
    const double y = (j - 0.5 * n_panels) * panel_width;
    const double lo = y - 0.5 * panel_width;
    const double hi = y + 0.5 * panel_width;
    const double panel = 2.0 * (std::atan(hi / h) - std::atan(lo / h));
    total += panel * std::exp(-(h * h + y * y) / (4.0 * window));
  }
  return total;
}

std::vector<double> VolterraOperator::block(int a, int b) const {
  std::vector<double> m(static_cast<size_t>(n_theta) * n_theta, 0.0);
  if (b > a || a < 1 || b < 1 || a > n_steps) return m;
  const int lag = a - b;
  for (int p = 0; p < n_theta; ++p)
    for (int q = 0; q < n_theta; ++q) {
      int dj = std::abs(p - q);
      dj = std::min(dj, n_theta - dj);
      m[static_cast<size_t>(p) * n_theta + q] = lag_kernel[lag][dj];
    }
  return m;
}

void VolterraOperator::apply_lag(int lag, const std::vector<double>& g,
                                 std::vector<double>& out) const {
  const std::vector<double>& row = lag_kernel[lag];
  for (int p = 0; p < n_theta; ++p) {
    double s = 0.0;
    for (int q = 0; q < n_theta; ++q) {
      int dj = std::abs(p - q);
      dj = std::min(dj, n_theta - dj);
      s += row[dj] * g[q];
    }
    out[p] += s;
  }
}

std::vector<std::vector<double>> VolterraOperator::apply(
    const std::vector<std::vector<double>>& g) const {
  std::vector<std::vector<double>> out(n_steps, std::vector<double>(n_theta, 0.0));
  for (int a = 1; a <= n_steps; ++a)
    for (int b = 1; b <= a; ++b) apply_lag(a - b, g[b - 1], out[a - 1]);
  return out;
}

VolterraOperator assemble_J(const SurfaceMesh& surface, int n_steps, double t_span) {
  if (surface.n_nodes() < 16)
    throw AssemblyError("assemble_J: n_theta must be at least 16 for quadrature sanity");
  if (n_steps < 1 || t_span <= 0.0) throw AssemblyError("assemble_J: bad time grid");

  VolterraOperator op;
  op.radius = surface.radius;
  op.n_theta = surface.n_nodes();
  op.n_steps = n_steps;
  op.dt = t_span / n_steps;
  op.node_angles = surface.node_angles;
  op.node_weight = surface.node_weights[0];

  // Jump constant from the half-space limit on a matching panel grid.
  const double w = op.node_weight;
  const double window = std::max(t_span, 100.0 * op.dt);
  const double jump = half_space_jump(op.n_theta, w, window, 1e-5 * w);
  op.c_eff = 2.0 * jump;

  // Chord lengths |Q_p - Q_q| depend only on the index separation.
  const int half = op.n_theta / 2;
  std::vector<double> z2(half + 1);
  for (int dj = 0; dj <= half; ++dj) {
    const double s = std::sin(0.5 * dj * surface.dtheta);
    z2[dj] = 4.0 * surface.radius * surface.radius * s * s;
  }

  // Slab integrals of the kernel: exact in time. Lag 0 uses the
  // continuous-in-space representative (value 2/R at zero separation),
  // which is the correct quadrature of the weakly singular slab.
  op.lag_kernel.assign(n_steps, std::vector<double>(half + 1, 0.0));
  const double two_over_r = 2.0 / surface.radius;
  for (int lag = 0; lag < n_steps; ++lag) {
    const double tau_lo = lag * op.dt;
    const double tau_hi = (lag + 1) * op.dt;
    for (int dj = 0; dj <= half; ++dj) {
      double v;
      if (lag == 0) {
        v = two_over_r * std::exp(-z2[dj] / (4.0 * tau_hi));
      } else {
        v = two_over_r *
            (std::exp(-z2[dj] / (4.0 * tau_hi)) - std::exp(-z2[dj] / (4.0 * tau_lo)));
      }
      const double entry = w * v;
      if (!std::isfinite(entry))
        throw AssemblyError("assemble_J: non-finite block entry at lag " + std::to_string(lag));
      op.lag_kernel[lag][dj] = entry;
    }
  }
  return op;
}

PotentialSolution solve_neumann(const std::function<double(double theta, double t)>& gamma,
                                const SurfaceMesh& surface, int n_steps, double t_end,
                                const HeatKernelParams& params) {
  if (params.n != 2) throw AssemblyError("solve_neumann: only n = 2 is supported");
  if (params.d <= 0.0) throw AssemblyError("solve_neumann: diffusivity must be positive");

  PotentialSolution sol;
  sol.d = params.d;
  sol.t_end = t_end;
  // Internal clock runs at tau = d * t; boundary data rescales by 1/d.
  sol.op = assemble_J(surface, n_steps, params.d * t_end);
  const VolterraOperator& op = sol.op;
  const int n = op.n_theta;

  auto sample_rhs = [&](int a, std::vector<double>& rhs) {
    const double t_phys = (a * op.dt) / params.d;
    for (int p = 0; p < n; ++p) {
      const double g = gamma(op.node_angles[p], t_phys) / params.d;
      if (!std::isfinite(g))
        throw AssemblyError("solve_neumann: non-finite boundary data at slab " +
                            std::to_string(a));
      rhs[p] = 2.0 * g;
    }
  };

  sol.density.assign(n_steps, std::vector<double>(n, 0.0));

  if (is_power_of_two(n)) {
    // Circulant blocks are diagonal in Fourier space, so the forward
    // substitution runs per spatial mode.
    std::vector<std::vector<double>> spectra(n_steps);
    for (int lag = 0; lag < n_steps; ++lag)
      spectra[lag] = circulant_spectrum(op.lag_kernel[lag], n);
    for (int k = 0; k < n; ++k)
      if (std::abs(op.c_eff - spectra[0][k]) < 1e-12)
        throw AssemblyError(
            "singular diagonal block in the boundary operator (jump constant calibration "
            "failed)");

    std::vector<std::vector<std::complex<double>>> g_hat(
        n_steps, std::vector<std::complex<double>>(n));
    std::vector<double> rhs(n);
    std::vector<std::complex<double>> work(n);
    for (int a = 1; a <= n_steps; ++a) {
      sample_rhs(a, rhs);
      for (int p = 0; p < n; ++p) work[p] = rhs[p];
      fft(work, -1);
      for (int b = 1; b < a; ++b) {
        const std::vector<double>& lam = spectra[a - b];
        const std::vector<std::complex<double>>& gb = g_hat[b - 1];
        for (int k = 0; k < n; ++k) work[k] += lam[k] * gb[k];
      }
      for (int k = 0; k < n; ++k) work[k] /= (op.c_eff - spectra[0][k]);
      g_hat[a - 1] = work;
      fft(work, +1);
      for (int p = 0; p < n; ++p) sol.density[a - 1][p] = work[p].real() / n;
    }
    return sol;
  }

  // Dense fallback: factor the diagonal block c_eff I - J_0 once.
  std::vector<double> diag_block(static_cast<size_t>(n) * n, 0.0);
  {
    const std::vector<double> j0 = op.block(1, 1);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const size_t idx = static_cast<size_t>(p) * n + q;
        diag_block[idx] = (p == q ? op.c_eff : 0.0) - j0[idx];
      }
  }
  DenseLU lu;
  lu.factor(std::move(diag_block), n);

  std::vector<double> rhs(n);
  for (int a = 1; a <= n_steps; ++a) {
    sample_rhs(a, rhs);
    for (int b = 1; b < a; ++b) op.apply_lag(a - b, sol.density[b - 1], rhs);
    lu.solve(rhs);
    sol.density[a - 1] = rhs;
  }
  return sol;
}

double PotentialSolution::evaluate(const Vec2& x, double t) const {
  if (t <= 0.0) return 0.0;
  const double tau_now = d * t;  // internal clock
  double phi = 0.0;
  for (int b = 1; b <= op.n_steps; ++b) {
    const double slab_lo = (b - 1) * op.dt;
    if (slab_lo >= tau_now) break;
    const double slab_hi = std::min(static_cast<double>(b) * op.dt, tau_now);
    const double tau_hi = tau_now - slab_lo;   // upper limit of the kernel clock
    const double tau_lo = tau_now - slab_hi;   // lower limit (0 for the last slab)
    const std::vector<double>& g = density[b - 1];
    for (int q = 0; q < op.n_theta; ++q) {
      const Vec2 node{op.radius * std::cos(op.node_angles[q]),
                      op.radius * std::sin(op.node_angles[q])};
      const double c = dist2(x, node) / 4.0;
      if (c <= 0.0) continue;        // evaluation exactly on a node is undefined
      if (c > 40.0 * tau_hi) continue;  // E1 below 1e-19, outside the kernel reach
      double slab_integral = expint_e1(c / tau_hi);
      if (tau_lo > 0.0) slab_integral -= expint_e1(c / tau_lo);
      phi += op.node_weight * g[q] * slab_integral;
    }
  }
  return phi;
}

double boundary_lp_norm(const std::function<double(double, double)>& gamma,
                        const SurfaceMesh& surface, int n_steps, double t_end, double p) {
  const double dt = t_end / n_steps;
  double acc = 0.0;
  for (int a = 1; a <= n_steps; ++a) {
    const double t = a * dt;
    for (int q = 0; q < surface.n_nodes(); ++q)
      acc += surface.node_weights[q] * dt * std::pow(std::abs(gamma(surface.node_angles[q], t)), p);
  }
  return std::pow(acc, 1.0 / p);
}

HolderEstimate holder_probe(const PotentialSolution& solution, double p,
                            const std::vector<ProbePair>& pairs, double a) {
  if (a <= 0.0) throw std::domain_error("holder_probe: exponent must be positive");
  HolderEstimate est;
  est.p = p;
  est.a = a;
  est.admissible = a < 1.0 - 3.0 / p;
  for (const ProbePair& pair : pairs) {
    const double phi_x = solution.evaluate(pair.x, pair.t_x);
    const double phi_y = solution.evaluate(pair.y, pair.t_y);
    const double denom =
        std::pow(std::sqrt(std::abs(pair.t_x - pair.t_y)) + std::sqrt(dist2(pair.x, pair.y)), a);
    if (denom <= 0.0) continue;
    est.value = std::max(est.value, std::abs(phi_x - phi_y) / denom);
  }
  return est;
}

std::vector<ProbePair> holder_probe_generation(double radius, double anchor_theta,
                                               double probe_time, double h0, double grade,
                                               int generation) {
  std::vector<ProbePair> pairs;
  const double h = h0 / std::pow(grade, generation);
  const Vec2 er{std::cos(anchor_theta), std::sin(anchor_theta)};
  const Vec2 et{-std::sin(anchor_theta), std::cos(anchor_theta)};
  auto at = [&](double depth, double side) {
    return Vec2{(radius - depth) * er.x + side * et.x, (radius - depth) * er.y + side * et.y};
  };
  // Space-like pairs at scale h (asymmetric about the anchor: the data
  // is even there and symmetric pairs would cancel), a radial pair, a
  // diagonal pair, and parabolically scaled time-like pairs.
  const double t2 = std::max(probe_time - h * h, 0.5 * probe_time);
  const double t3 = std::max(probe_time - 2.0 * h * h, 0.5 * probe_time);
  pairs.push_back({at(h, 0.0), probe_time, at(h, h), probe_time});
  pairs.push_back({at(h, -0.5 * h), probe_time, at(h, h), probe_time});
  pairs.push_back({at(h, 0.0), probe_time, at(2.0 * h, 0.0), probe_time});
  pairs.push_back({at(h, 0.5 * h), probe_time, at(2.0 * h, -0.5 * h), probe_time});
  pairs.push_back({at(h, 0.0), probe_time, at(h, 0.0), t2});
  pairs.push_back({at(h, 0.5 * h), probe_time, at(h, 0.5 * h), t3});
  return pairs;
}

double operator_norm_estimate(const VolterraOperator& op, int iterations) {
  // Power iteration on J^T J; uniform grid weights cancel in the
  // Rayleigh quotient. Deterministic start.
  const int nt = op.n_steps, ns = op.n_theta;
  std::vector<std::vector<double>> g(nt, std::vector<double>(ns));
  double seed = 0.5;
  for (int b = 0; b < nt; ++b)
    for (int q = 0; q < ns; ++q) {
      seed = std::fmod(seed * 997.0 + 0.123456789, 1.0);
      g[b][q] = seed - 0.5;
    }
  double norm = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<double>> jg = op.apply(g);
    // adjoint: (J^T y)_b = sum_{a >= b} J_{a-b}^T y_a; blocks are symmetric.
    std::vector<std::vector<double>> jtjg(nt, std::vector<double>(ns, 0.0));
    for (int b = 1; b <= nt; ++b)
      for (int a = b; a <= nt; ++a) op.apply_lag(a - b, jg[a - 1], jtjg[b - 1]);
    double nrm2 = 0.0;
    for (const auto& slab : jtjg)
      for (double v : slab) nrm2 += v * v;
    const double nrm = std::sqrt(nrm2);
    if (nrm == 0.0) return 0.0;
    double dot_g = 0.0, dot_gg = 0.0;
    for (int b = 0; b < nt; ++b)
      for (int q = 0; q < ns; ++q) {
        dot_g += jtjg[b][q] * g[b][q];
        dot_gg += g[b][q] * g[b][q];
      }
    norm = std::sqrt(std::max(dot_g / dot_gg, 0.0));
    for (int b = 0; b < nt; ++b)
      for (int q = 0; q < ns; ++q) g[b][q] = jtjg[b][q] / nrm;
  }
  return norm;
}

}  // namespace bsrd
