#pragma once

#include <array>
#include <cstdint>

namespace metamat {

using Point = std::array<double, 3>;

// Grid coordinates of a sub-cube; i1 runs fastest in the flat index.
struct CellIndex {
  std::int64_t i1 = 0;
  std::int64_t i2 = 0;
  std::int64_t i3 = 0;
};

/// Root a of gamma * a^((2 - kappa)/3) + 2a - spacing = 0 on (0, spacing/2].
///
/// The left side is strictly increasing in a, so the root is unique and
/// is found by bisection (relative bracket width 1e-15 or 200 steps).
/// gamma == 0 is accepted as the degenerate limit and returns spacing/2.
/// Throws InvalidParameter for gamma < 0, spacing <= 0 or kappa outside (0,1).
double solve_radius(double gamma, double kappa, double spacing);

/// Leading-order asymptotic radius (1 / (n gamma))^(3 / (2 - kappa)).
double asymptotic_radius(double gamma, double kappa, double n);

/// Unit cube split into P^3 coarse cubes, each split into m^3 sub-cubes of
/// side 1/(mP); one ball of radius a sits at the centroid of every sub-cube.
/// Centers are computed from the flat index on demand and never stored.
class BallLattice {
 public:
  BallLattice(int m, int P, double radius, double gamma, double kappa);

  int m() const noexcept { return m_; }
  int P() const noexcept { return P_; }
  // Sub-cubes per axis, mP.
  std::int64_t per_axis() const noexcept { return n_; }
  // Total ball count M = (mP)^3.
  std::int64_t count() const noexcept { return n_ * n_ * n_; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }
  double radius() const noexcept { return radius_; }
  double gamma() const noexcept { return gamma_; }
  double kappa() const noexcept { return kappa_; }
  // Surface-to-surface distance between neighbouring balls.
  double gap() const noexcept { return spacing() - 2.0 * radius_; }

  CellIndex cell(std::int64_t l) const noexcept {
    return {l % n_, (l / n_) % n_, l / (n_ * n_)};
  }
  std::int64_t flat(const CellIndex& c) const noexcept { return c.i1 + n_ * (c.i2 + n_ * c.i3); }
  double coordinate(std::int64_t i) const noexcept {
    return static_cast<double>(2 * i + 1) / static_cast<double>(2 * n_);
  }
  Point center(std::int64_t l) const noexcept {
    const CellIndex c = cell(l);
    return {coordinate(c.i1), coordinate(c.i2), coordinate(c.i3)};
  }

 private:
  int m_;
  int P_;
  std::int64_t n_;
  double radius_;
  double gamma_;
  double kappa_;
};

/// Solves the radius equation for spacing 1/(mP) and places the balls.
BallLattice build_lattice(int m, int P, double gamma, double kappa);

/// a / d = a^((1 + kappa)/3) / gamma.
double packing_ratio(const BallLattice& lattice, double gamma, double kappa);

/// gamma^3 M a^(2 - kappa); tends to 1 as m grows.
double ball_density_product(const BallLattice& lattice, double gamma, double kappa);

/// |gamma^3 M a^(2-kappa) - (1 - 2 a mP)^3|, zero up to rounding because the
/// radius equation cubed gives the identity exactly.
double density_identity_residual(const BallLattice& lattice, double gamma, double kappa);

}  // namespace metamat
