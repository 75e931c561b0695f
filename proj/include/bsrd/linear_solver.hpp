#pragma once

#include <vector>

#include "bsrd/operators.hpp"

namespace bsrd {

struct CgResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// definite systems. x holds the initial guess on entry (warm start)
/// and the solution on exit. Convergence: ||b - Ax|| <= rel_tol ||b||.
CgResult solve_cg(const SparseOperator& a, const std::vector<double>& b,
                  std::vector<double>& x, double rel_tol = 1e-10,
                  int max_iterations = 10000);

}  // namespace bsrd
