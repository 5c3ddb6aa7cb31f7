#pragma once

// Independent reference implementations used only by the tests.  Nothing
// here calls into the library's numerical code.

#include <array>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Matrix = std::vector<std::vector<cd>>;

// Radius from Newton iteration in long double on the same equation.
double radius(double gamma, double kappa, double spacing);

// Gaussian elimination with partial pivoting, no blocking.
std::vector<cd> gauss_solve(Matrix A, std::vector<cd> b);

cd green(double k, const Vec3& x, const Vec3& y);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Integral of r exp(ikr) over [0, R] by Gauss-Legendre (the ball self term).
cd ball_self_term(double k, double R);

// Integral of g(x, y) p(y) over the cube centered at x with side h.  The
// cube is split into six pyramids with apex at x; in pyramid coordinates the
// 1/r singularity cancels against the Jacobian.  Order is doubled until two
// successive values agree to rel_tol.
cd self_cell(double k, double h, const Vec3& x, const std::function<cd(const Vec3&)>& p, double rel_tol = 1e-11);

// Integral of g(x, y) p(y) over the cube centered at c with side h (x
// outside the cube), by adaptive octree subdivision with a tensor
// Gauss-Legendre rule per box.
cd far_cell(double k, double h, const Vec3& x, const Vec3& c, const std::function<cd(const Vec3&)>& p,
            double rel_tol = 1e-10);

// Lattice systems on the n^3 centroid grid, flat index i1 fastest.  p is the
// contrast k^2 (1 - n^2); the identity is included.
std::vector<Vec3> centers(int n);
// 1 on the diagonal, 4 pi g(x_l, x_j) h(x_j) a^(2-kappa) off it, h = gamma^3 p / (4 pi).
Matrix effective_matrix(double k, double gamma, double kappa, int n, const std::function<double(const Vec3&)>& p);
// 1 + p(x_l) * ball self term on the diagonal, g p(x_j) / n^3 off it.
Matrix collocation_matrix(double k, int n, const std::function<double(const Vec3&)>& p);
std::vector<cd> plane_wave(double k, const Vec3& alpha, int n);

// Random well-formed formula over x1, x2, x3 whose value stays finite on
// the unit cube.
std::string random_formula(std::mt19937_64& rng, int depth);

}  // namespace oracle
