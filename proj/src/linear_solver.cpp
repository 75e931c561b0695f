#include "bsrd/linear_solver.hpp"

#include <cmath>

namespace bsrd {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgResult solve_cg(const SparseOperator& a, const std::vector<double>& b,
                  std::vector<double>& x, double rel_tol, int max_iterations) {
  const int n = a.dimension;
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);

  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) {
    double d = a.entry(i, i);
    inv_diag[i] = (d != 0.0) ? 1.0 / d : 1.0;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.apply(x, ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];

  const double b_norm = std::sqrt(dot(b, b));
  const double stop = rel_tol * (b_norm > 0.0 ? b_norm : 1.0);

  CgResult res;
  double r_norm = std::sqrt(dot(r, r));
  if (r_norm <= stop) {
    res.converged = true;
    res.relative_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
    return res;
  }

  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= max_iterations; ++it) {
    a.apply(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // loss of positive definiteness
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    r_norm = std::sqrt(dot(r, r));
    res.iterations = it;
    if (r_norm <= stop) {
      res.converged = true;
      break;
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.relative_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
  return res;
}

}  // namespace bsrd
