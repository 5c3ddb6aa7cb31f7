#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metamat/error.hpp"
#include "metamat/expr.hpp"
#include "metamat/geometry.hpp"

namespace metamat {

using Complex = std::complex<double>;
using ComplexField = std::function<Complex(const Point&)>;

/// 10 k (1/(2P))^((1 + kappa)/3).
double default_gamma(double k, int P, double kappa);

/// Lower limit gamma must exceed for the lattice assumption, (1/(2P))^((1+kappa)/3).
double gamma_floor(int P, double kappa);

struct DesignParams {
  double k = 1.0;
  double kappa = 0.99;
  int P = 11;
  double gamma = 0.0;
  double epsilon = 0.5;
  CoefficientField n0sq = constant_field(1.0);
  CoefficientField n2 = constant_field(1.0);
  // Imaginary part of the desired coefficient; absent means purely real.
  // Im n2 >= 0 gives Im h <= 0.
  std::optional<CoefficientField> n2_imag;
  std::array<double, 3> alpha{1.0, 0.0, 0.0};

  /// Throws InvalidParameter on k <= 0, kappa outside (0,1), P < 1,
  /// epsilon <= 0, |alpha| != 1, or gamma not above gamma_floor.  Returns
  /// human-readable warnings (gamma within 10x of the floor).
  std::vector<std::string> validate() const;

  // n^2 at x including its imaginary part.
  Complex desired_n2(const Point& x) const;
};

// Defaults matching the numerical experiments: P=11, kappa=0.99, gamma from k.
DesignParams experiment_params(double k, CoefficientField n2);

/// p(x) = k^2 (n0^2(x) - n^2(x)).
ComplexField target_p(const DesignParams& params);

/// h(x) = gamma^3 p(x) / (4 pi); with N = 1/gamma^3 this gives p = 4 pi h N.
ComplexField boundary_h(const DesignParams& params);

/// Boundary impedance h(x_m) / a^kappa of the ball at center.
Complex impedance(const ComplexField& h, const Point& center, double a, double kappa);

/// (gamma mP a^((2-kappa)/3))^3; equals (1 - 2 a mP)^3 by the radius equation.
double effective_factor(const BallLattice& lattice, double gamma);

/// p_a(x) = p(x) * effective_factor.
ComplexField effective_p(const ComplexField& p, const BallLattice& lattice, double gamma);

/// n_a^2(x) = n0^2(x) - p_a(x) / k^2, the coefficient the finite lattice realises.
ComplexField achieved_n2(const DesignParams& params, const BallLattice& lattice);

enum class ErrorMode { MaxOverCenters, FirstCenter };

std::string to_string(ErrorMode mode);
ErrorMode parse_error_mode(const std::string& text);

BallLattice build_lattice(int m, const DesignParams& params);

// Streaming scan of the lattice centers.
struct CenterScan {
  double E = 0.0;           // max |n^2 - n_a^2|
  double p_defect = 0.0;    // max |p - p_a| (the stopping quantity)
  double zeta_min = 0.0;    // min |zeta| over all centers
  double zeta_max = 0.0;    // max |zeta| over all centers
};

/// Scans the centers without storing them.  In FirstCenter mode E and the
/// defect come from center 0 only; the impedance range always covers every
/// center.  Deterministic for any thread count.
CenterScan scan_centers(const DesignParams& params, const BallLattice& lattice, ErrorMode mode);

/// max_l |n^2(x_l) - n_a^2(x_l)| (or at x_0 in FirstCenter mode).
double design_error(const DesignParams& params, const BallLattice& lattice,
                    ErrorMode mode = ErrorMode::MaxOverCenters);

/// Sup of |p| sampled on a 64^3 grid including the cube faces plus every center.
double sup_p_estimate(const DesignParams& params, const BallLattice& lattice);

/// k^-2 ||p||_inf |1 - effective_factor|, an upper bound for the max-mode error.
double error_bound(const DesignParams& params, const BallLattice& lattice);

struct DesignRow {
  int m = 0;
  std::int64_t M = 0;
  double a = 0.0;
  double ratio = 0.0;  // a/d
  double E = 0.0;
  double p_defect = 0.0;
  double zeta_min = 0.0;
  double zeta_max = 0.0;
};

DesignRow evaluate_design(const DesignParams& params, int m, ErrorMode mode);

struct DesignReport {
  DesignParams params;
  ErrorMode mode = ErrorMode::MaxOverCenters;
  std::vector<DesignRow> rows;  // every m visited, ascending

  const DesignRow& accepted() const { return rows.back(); }
  BallLattice accepted_lattice() const;
  // zeta of the accepted ball l, computed on demand.
  Complex zeta(std::int64_t l) const;
};

// The m cap was hit before the stopping test passed.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<DesignRow> rows)
      : Error(what), rows_(std::move(rows)) {}

  const std::vector<DesignRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<DesignRow> rows_;
};

/// Smallest m = 1, 2, ... with max_l |p(x_l) - p_a(x_l)| <= epsilon.
/// Throws NoConvergence carrying every row if m_max is exceeded.
DesignReport minimal_design(const DesignParams& params, ErrorMode mode = ErrorMode::MaxOverCenters,
                            int m_max = 64);

}  // namespace metamat
