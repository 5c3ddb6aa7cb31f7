#include "metamat/geometry.hpp"

#include <cmath>
#include <string>

#include "metamat/error.hpp"

namespace metamat {

namespace {

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw InvalidParameter("kappa must lie in (0, 1), got " + std::to_string(kappa));
  }
}

}  // namespace

double solve_radius(double gamma, double kappa, double spacing) {
  check_kappa(kappa);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameter("gamma must be positive, got " + std::to_string(gamma));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw InvalidParameter("spacing must be positive, got " + std::to_string(spacing));
  }
  if (gamma == 0.0) return 0.5 * spacing;

  const double exponent = (2.0 - kappa) / 3.0;
  auto f = [&](double a) { return gamma * std::pow(a, exponent) + 2.0 * a - spacing; };

  double lo = 0.0;
  double hi = 0.5 * spacing;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Both ends sit within one ulp-scale bracket; keep the smaller residual.
  return std::abs(f(lo)) <= std::abs(f(hi)) && lo > 0.0 ? lo : hi;
}

double asymptotic_radius(double gamma, double kappa, double n) {
  check_kappa(kappa);
  if (!(gamma > 0.0) || !(n > 0.0)) {
    throw InvalidParameter("asymptotic_radius needs gamma > 0 and n > 0");
  }
  return std::pow(1.0 / (n * gamma), 3.0 / (2.0 - kappa));
}

BallLattice::BallLattice(int m, int P, double radius, double gamma, double kappa)
    : m_(m), P_(P), n_(static_cast<std::int64_t>(m) * P), radius_(radius), gamma_(gamma), kappa_(kappa) {
  if (m < 1 || P < 1) {
    throw InvalidParameter("lattice needs m >= 1 and P >= 1");
  }
  if (!(radius > 0.0) || !(radius <= 0.5 * spacing())) {
    throw InvalidParameter("ball radius must lie in (0, 1/(2mP)]");
  }
}

BallLattice build_lattice(int m, int P, double gamma, double kappa) {
  if (m < 1 || P < 1) {
    throw InvalidParameter("lattice needs m >= 1 and P >= 1");
  }
  const double spacing = 1.0 / (static_cast<double>(m) * P);
  return BallLattice(m, P, solve_radius(gamma, kappa, spacing), gamma, kappa);
}

double packing_ratio(const BallLattice& lattice, double gamma, double kappa) {
  return std::pow(lattice.radius(), (1.0 + kappa) / 3.0) / gamma;
}

double ball_density_product(const BallLattice& lattice, double gamma, double kappa) {
  const double M = static_cast<double>(lattice.count());
  return gamma * gamma * gamma * M * std::pow(lattice.radius(), 2.0 - kappa);
}

double density_identity_residual(const BallLattice& lattice, double gamma, double kappa) {
  const double shrink = 1.0 - 2.0 * lattice.radius() * static_cast<double>(lattice.per_axis());
  return std::abs(ball_density_product(lattice, gamma, kappa) - shrink * shrink * shrink);
}

}  // namespace metamat
