#include "metamat/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace metamat {

using Complex = std::complex<double>;

std::complex<double> pairwise_sum(std::span<const Complex> values) {
  constexpr std::size_t block = 32;
  if (values.size() <= block) {
    Complex s = 0.0;
    for (const Complex& v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

double norm2(std::span<const Complex> v) {
  double scale = 0.0;
  double ssq = 1.0;
  for (const Complex& c : v) {
    for (double part : {c.real(), c.imag()}) {
      if (part == 0.0) continue;
      const double a = std::abs(part);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// Rotation zeroing b in (a, b).
void givens(Complex a, Complex b, double& c, Complex& s) {
  const double na = std::abs(a);
  if (na == 0.0) {
    c = 0.0;
    s = 1.0;
    return;
  }
  const double nrm = std::hypot(na, std::abs(b));
  c = na / nrm;
  s = (a / na) * std::conj(b) / nrm;
}

}  // namespace

GmresResult gmres(const LinearOperator& op, std::span<const Complex> rhs, double abs_tol, int max_iterations,
                  int restart) {
  const std::size_t n = rhs.size();
  GmresResult result;
  result.x.assign(n, Complex(0.0));
  restart = std::max(1, std::min<int>(restart, static_cast<int>(std::max<std::size_t>(n, 1))));

  CVector r(rhs.begin(), rhs.end());
  double beta = norm2(r);
  result.history.push_back(beta);
  if (beta <= abs_tol) {
    result.converged = true;
    return result;
  }

  std::vector<CVector> V(static_cast<std::size_t>(restart) + 1, CVector(n));
  std::vector<CVector> H(static_cast<std::size_t>(restart) + 1, CVector(static_cast<std::size_t>(restart)));
  std::vector<double> cs(static_cast<std::size_t>(restart));
  CVector sn(static_cast<std::size_t>(restart));
  CVector g(static_cast<std::size_t>(restart) + 1);
  CVector w(n);

  while (result.iterations < max_iterations) {
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), Complex(0.0));
    g[0] = beta;

    int j = 0;
    double res = beta;
    for (; j < restart && result.iterations < max_iterations; ++j) {
      ++result.iterations;
      op(V[j], w);
      for (int i = 0; i <= j; ++i) {
        const Complex hij = dot(V[i], w);
        H[i][j] = hij;
        for (std::size_t q = 0; q < n; ++q) w[q] -= hij * V[i][q];
      }
      const double hnext = norm2(w);
      H[j + 1][j] = hnext;
      if (hnext > 0.0) {
        for (std::size_t q = 0; q < n; ++q) V[j + 1][q] = w[q] / hnext;
      }
      for (int i = 0; i < j; ++i) {
        const Complex t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -std::conj(sn[i]) * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      givens(H[j][j], H[j + 1][j], cs[j], sn[j]);
      H[j][j] = cs[j] * H[j][j] + sn[j] * H[j + 1][j];
      H[j + 1][j] = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      res = std::abs(g[j + 1]);
      result.history.push_back(res);
      if (res <= abs_tol || hnext == 0.0) {
        ++j;
        break;
      }
    }

    // Back substitution for the j-dimensional least-squares problem.
    CVector y(static_cast<std::size_t>(j));
    for (int i = j - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int q = i + 1; q < j; ++q) s -= H[i][q] * y[q];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < j; ++i) {
      for (std::size_t q = 0; q < n; ++q) result.x[q] += y[i] * V[i][q];
    }

    op(result.x, w);
    for (std::size_t q = 0; q < n; ++q) r[q] = rhs[q] - w[q];
    beta = norm2(r);
    if (beta <= abs_tol) {
      result.converged = true;
      break;
    }
    // Otherwise restart from the true residual, even if the recurrence had
    // already reported convergence.
  }
  return result;
}

}  // namespace metamat
