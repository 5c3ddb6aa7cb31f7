#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

double radius(double gamma, double kappa, double spacing) {
  using ld = long double;
  const ld e = (2.0L - kappa) / 3.0L;
  const ld g = gamma;
  const ld s = spacing;
  // f is concave and increasing: a Newton step from the right lands left of
  // the root (possibly below zero, hence the damping), and from the left the
  // iterates climb monotonically to it.
  ld a = s / 2;
  for (int it = 0; it < 400; ++it) {
    const ld f = g * std::pow(a, e) + 2 * a - s;
    const ld df = g * e * std::pow(a, e - 1) + 2;
    ld next = a - f / df;
    if (next <= 0) next = a / 16;
    if (std::fabs(next - a) <= 1e-19L * a) {
      a = next;
      break;
    }
    a = next;
  }
  return static_cast<double>(a);
}

std::vector<cd> gauss_solve(Matrix A, std::vector<cd> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    }
    if (A[piv][c] == cd(0.0)) throw std::runtime_error("singular matrix");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const cd f = A[r][c] / A[c][c];
      for (std::size_t q = c; q < n; ++q) A[r][q] -= f * A[c][q];
      b[r] -= f * b[c];
    }
  }
  std::vector<cd> x(n);
  for (std::size_t r = n; r-- > 0;) {
    cd s = b[r];
    for (std::size_t q = r + 1; q < n; ++q) s -= A[r][q] * x[q];
    x[r] = s / A[r][r];
  }
  return x;
}

cd green(double k, const Vec3& x, const Vec3& y) {
  const double r = std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
  return std::exp(cd(0.0, k * r)) / (4.0 * std::numbers::pi * r);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

cd ball_self_term(double k, double R) {
  std::vector<double> t, w;
  gauss_legendre(40, t, w);
  cd sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = 0.5 * R * (t[i] + 1.0);
    sum += w[i] * r * std::exp(cd(0.0, k * r));
  }
  return 0.5 * R * sum;
}

namespace {

cd self_cell_order(double k, double h, const Vec3& x, const std::function<cd(const Vec3&)>& p, int n) {
  std::vector<double> t, w;
  gauss_legendre(n, t, w);
  const double c = 0.5 * h;
  cd total = 0.0;
  // Pyramid over the face where coordinate `axis` equals sign * c.
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      const int ua = (axis + 1) % 3;
      const int va = (axis + 2) % 3;
      for (int it = 0; it < n; ++it) {
        const double s = 0.5 * (t[it] + 1.0);
        for (int iu = 0; iu < n; ++iu) {
          for (int iv = 0; iv < n; ++iv) {
            const double u = t[iu];
            const double v = t[iv];
            const double rho = std::sqrt(1.0 + u * u + v * v);
            Vec3 y = x;
            y[axis] += sign * s * c;
            y[ua] += s * c * u;
            y[va] += s * c * v;
            // dV = c^3 s^2 ds du dv, g = e^{ik s c rho} / (4 pi s c rho)
            const cd f = std::exp(cd(0.0, k * s * c * rho)) * (s * c * c / (4.0 * std::numbers::pi * rho)) * p(y);
            total += 0.5 * w[it] * w[iu] * w[iv] * f;
          }
        }
      }
    }
  }
  return total;
}

cd box_rule(double k, const Vec3& x, const Vec3& c, double h, const std::function<cd(const Vec3&)>& p,
            const std::vector<double>& t, const std::vector<double>& w) {
  cd s = 0.0;
  const double half = 0.5 * h;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      for (std::size_t q = 0; q < t.size(); ++q) {
        const Vec3 y{c[0] + half * t[i], c[1] + half * t[j], c[2] + half * t[q]};
        s += w[i] * w[j] * w[q] * green(k, x, y) * p(y);
      }
    }
  }
  return s * (half * half * half);
}

cd adapt(double k, const Vec3& x, const Vec3& c, double h, const std::function<cd(const Vec3&)>& p,
         const std::vector<double>& t, const std::vector<double>& w, cd whole, double abs_tol, int depth) {
  cd kids = 0.0;
  std::array<cd, 8> parts;
  std::array<Vec3, 8> centers;
  for (int b = 0; b < 8; ++b) {
    centers[b] = {c[0] + ((b & 1) ? 0.25 : -0.25) * h, c[1] + ((b & 2) ? 0.25 : -0.25) * h,
                  c[2] + ((b & 4) ? 0.25 : -0.25) * h};
    parts[b] = box_rule(k, x, centers[b], 0.5 * h, p, t, w);
    kids += parts[b];
  }
  if (std::abs(kids - whole) <= abs_tol || depth >= 8) return kids;
  cd sum = 0.0;
  for (int b = 0; b < 8; ++b) sum += adapt(k, x, centers[b], 0.5 * h, p, t, w, parts[b], abs_tol / 8.0, depth + 1);
  return sum;
}

}  // namespace

cd self_cell(double k, double h, const Vec3& x, const std::function<cd(const Vec3&)>& p, double rel_tol) {
  cd prev = self_cell_order(k, h, x, p, 4);
  for (int n = 8; n <= 64; n *= 2) {
    const cd cur = self_cell_order(k, h, x, p, n);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

cd far_cell(double k, double h, const Vec3& x, const Vec3& c, const std::function<cd(const Vec3&)>& p,
            double rel_tol) {
  std::vector<double> t, w;
  gauss_legendre(6, t, w);
  const cd whole = box_rule(k, x, c, h, p, t, w);
  return adapt(k, x, c, h, p, t, w, whole, rel_tol * std::abs(whole), 0);
}

std::vector<Vec3> centers(int n) {
  std::vector<Vec3> xs;
  for (int i3 = 0; i3 < n; ++i3)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) xs.push_back({(i1 + 0.5) / n, (i2 + 0.5) / n, (i3 + 0.5) / n});
  return xs;
}

Matrix effective_matrix(double k, double gamma, double kappa, int n, const std::function<double(const Vec3&)>& p) {
  const double a = radius(gamma, kappa, 1.0 / n);
  const double scale = gamma * gamma * gamma * std::pow(a, 2.0 - kappa);
  const auto xs = centers(n);
  const std::size_t M = xs.size();
  Matrix A(M, std::vector<cd>(M, 0.0));
  for (std::size_t l = 0; l < M; ++l) {
    for (std::size_t j = 0; j < M; ++j) {
      A[l][j] = l == j ? cd(1.0) : green(k, xs[l], xs[j]) * p(xs[j]) * scale;
    }
  }
  return A;
}

Matrix collocation_matrix(double k, int n, const std::function<double(const Vec3&)>& p) {
  const double h = 1.0 / n;
  const cd self = ball_self_term(k, std::cbrt(3.0 / (4.0 * std::numbers::pi)) * h);
  const auto xs = centers(n);
  const std::size_t M = xs.size();
  Matrix A(M, std::vector<cd>(M, 0.0));
  for (std::size_t l = 0; l < M; ++l) {
    for (std::size_t j = 0; j < M; ++j) {
      A[l][j] = l == j ? 1.0 + p(xs[j]) * self : green(k, xs[l], xs[j]) * p(xs[j]) * (h * h * h);
    }
  }
  return A;
}

std::vector<cd> plane_wave(double k, const Vec3& alpha, int n) {
  std::vector<cd> u;
  for (const Vec3& x : centers(n)) {
    u.push_back(std::exp(cd(0.0, k * (alpha[0] * x[0] + alpha[1] * x[1] + alpha[2] * x[2]))));
  }
  return u;
}

std::string random_formula(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> num(0.1, 3.0);
  auto leaf = [&]() -> std::string {
    switch (pick(rng) % 5) {
      case 0: return "x1";
      case 1: return "x2";
      case 2: return "x3";
      case 3: return "pi";
      default: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", num(rng));
        return buf;
      }
    }
  };
  if (depth <= 0) return leaf();
  const std::string a = random_formula(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return a + " + " + random_formula(rng, depth - 1);
    case 1: return a + " - " + random_formula(rng, depth - 1);
    case 2: return a + "*" + random_formula(rng, depth - 1);
    case 3: return "(" + a + ")/(2 + abs(" + random_formula(rng, depth - 1) + "))";
    case 4: return "sin(" + a + ")";
    case 5: return "cos(" + a + ")";
    case 6: return "exp(-abs(" + a + "))";
    case 7: return "sqrt(abs(" + a + "))";
    case 8: return "-(" + a + ")^2";
    default: return "(" + a + ")";
  }
}

}  // namespace oracle
