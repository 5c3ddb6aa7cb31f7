#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace metamat {

using CVector = std::vector<std::complex<double>>;

// y = A x for a square operator of fixed size.
using LinearOperator = std::function<void(std::span<const std::complex<double>>, std::span<std::complex<double>>)>;

struct GmresResult {
  CVector x;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;  // ||b - A x||_2 after every inner step
};

/// Restarted GMRES(restart) with modified Gram-Schmidt and Givens rotations,
/// starting from x = 0.  Stops when the residual 2-norm falls to abs_tol or
/// after max_iterations inner steps.  The residual history is non-increasing.
GmresResult gmres(const LinearOperator& op, std::span<const std::complex<double>> rhs, double abs_tol,
                  int max_iterations, int restart = 60);

/// Pairwise (cascade) sum; rounding error grows as log n.
std::complex<double> pairwise_sum(std::span<const std::complex<double>> values);

}  // namespace metamat
