#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metamat/geometry.hpp"
#include "metamat/krylov.hpp"
#include "metamat/recipe.hpp"

namespace metamat {

enum class FieldKind { Incident, Effective, Collocation, Reference };

std::string to_string(FieldKind kind);

/// Complex values at lattice centers, in flat-index order.
struct FieldSolution {
  FieldKind kind = FieldKind::Incident;
  CVector values;
  // ||(I + A) u - u0||_inf / ||u0||_inf, recomputed after the solve.
  double residual = 0.0;
  std::string method;
  std::vector<double> residual_history;
};

struct SolverOptions {
  // Systems with at most this many unknowns are factorised densely.
  std::int64_t dense_cutoff = 4096;
  double tolerance = 1e-10;
  int restart = 60;
  // Odd s: collocation cell integrals use an s^3 sub-cell rule.
  int subcells = 1;
};

/// exp(i k |x - y|) / (4 pi |x - y|).  Throws SingularEvaluation for x == y.
Complex green_kernel(double k, const Point& x, const Point& y);

/// u0(x) = exp(i k alpha . x).
Complex incident_wave(const DesignParams& params, const Point& x);
FieldSolution incident_field(const DesignParams& params, std::span<const Point> points);
FieldSolution incident_field(const DesignParams& params, const BallLattice& lattice);

/// Equal-volume-ball value of the self-cell integral of g for a cube of side
/// `side`: (exp(ikR)(1 - ikR) - 1) / k^2 with R = (3/(4 pi))^(1/3) side,
/// switching to R^2/2 when kR < 1e-6.
Complex self_cell_integral(double k, double side);

/// Approximation of the integral over cell j of g(x_l, y) p(y) dy.
///
/// Off-diagonal cells use an s^3 midpoint rule (s = subcells, s = 1 is the
/// plain midpoint rule).  The diagonal cell uses the same sub-cells with the
/// central one (which contains the singularity) replaced by the equal-volume
/// ball; s must be odd so that x_l is the center of that sub-cell.
Complex kernel_cell_integral(std::int64_t l, std::int64_t j, const BallLattice& lattice, const ComplexField& p,
                             double k, int subcells = 1);

/// The linear system (I + A) u = u0 on the lattice centers.  Entries are
/// generated on demand; no M x M storage unless a dense factorisation is used.
class LatticeSystem {
 public:
  virtual ~LatticeSystem() = default;

  std::int64_t size() const noexcept { return lattice_.count(); }
  const BallLattice& lattice() const noexcept { return lattice_; }

  // A_lj (the identity is not included).
  virtual Complex entry(std::int64_t l, std::int64_t j) const = 0;
  // y = (I + A) x with pairwise-summed rows.
  virtual void apply(std::span<const Complex> x, std::span<Complex> y) const;
  // True when A is known to vanish; the solution is then the right-hand side.
  virtual bool is_identity() const { return false; }

 protected:
  explicit LatticeSystem(BallLattice lattice) : lattice_(std::move(lattice)) {}

  // g at integer center offsets (|d1|, |d2|, |d3|); entry 0 is unused.
  void build_green_table(double k);
  Complex green_at_offset(const CellIndex& a, const CellIndex& b) const;

  BallLattice lattice_;
  std::vector<Complex> green_table_;
};

/// A_lj = 4 pi g(x_l, x_j) h(x_j) a^(2-kappa) for j != l, A_ll = 0.
class EffectiveSystem final : public LatticeSystem {
 public:
  EffectiveSystem(const BallLattice& lattice, const DesignParams& params);

  Complex entry(std::int64_t l, std::int64_t j) const override;
  void apply(std::span<const Complex> x, std::span<Complex> y) const override;
  bool is_identity() const override;
  // 4 pi h(x_j) a^(2-kappa).
  const CVector& weights() const noexcept { return weights_; }

 private:
  CVector weights_;
};

/// A_lj = kernel_cell_integral(l, j).
class CollocationSystem final : public LatticeSystem {
 public:
  CollocationSystem(const BallLattice& lattice, const DesignParams& params, int subcells = 1);

  Complex entry(std::int64_t l, std::int64_t j) const override;
  void apply(std::span<const Complex> x, std::span<Complex> y) const override;
  // Only decidable for the one-point rule, where p enters at the centers alone.
  bool is_identity() const override;

 private:
  double k_;
  int subcells_;
  ComplexField p_;
  CVector p_centers_;
  Complex self_integral_;
};

/// Dense LU up to options.dense_cutoff unknowns, restarted GMRES above it
/// (at most 10 sqrt(M) iterations).  The residual is recomputed with an
/// explicit operator application; SolverError if it exceeds the tolerance.
FieldSolution solve_system(const LatticeSystem& system, std::span<const Complex> rhs, FieldKind kind,
                           const SolverOptions& options = {});

/// Effective field at the ball centers.
FieldSolution solve_effective(const BallLattice& lattice, const DesignParams& params,
                              const SolverOptions& options = {});

/// Effective field at an arbitrary point at distance > a from every center.
/// Throws ProximityError otherwise.
Complex evaluate_effective(const FieldSolution& solution, const BallLattice& lattice, const DesignParams& params,
                           const Point& x);

/// Piecewise-constant collocation solution of u + T u = u0 at the centers.
FieldSolution solve_collocation(const BallLattice& lattice, const DesignParams& params,
                                const SolverOptions& options = {});

/// Collocation solution on a fine lattice used as a stand-in for the limit
/// field.  Off-grid values are u0(x) plus trilinear interpolation of the
/// scattered part u - u0 between fine centers; points that coincide with a
/// fine center return the fine value exactly.
class ReferenceField {
 public:
  ReferenceField(const DesignParams& params, int fine_m, const SolverOptions& options = {});

  const BallLattice& lattice() const noexcept { return lattice_; }
  const FieldSolution& solution() const noexcept { return solution_; }

  Complex at(const Point& x) const;
  /// Values at the centers of a coarser lattice with the same P.
  FieldSolution restrict_to(const BallLattice& coarse) const;

 private:
  DesignParams params_;
  BallLattice lattice_;
  FieldSolution solution_;
  CVector scattered_;
};

/// Reference field at the centers of `coarse` (fine_m must exceed coarse.m()).
FieldSolution reference_solution(const DesignParams& params, int fine_m, const BallLattice& coarse,
                                 const SolverOptions& options = {});

/// max_l |u_l - v_l|.  Throws InvalidParameter on length mismatch.
double sup_distance(const FieldSolution& u, const FieldSolution& v);
double sup_distance(std::span<const Complex> u, std::span<const Complex> v);

struct ConvergenceRow {
  int m = 0;
  std::int64_t M = 0;
  double e_effective = 0.0;
  double e_collocation = 0.0;
  // log M / M^(2/3) + |1 - gamma^3 M a^(2-kappa)|
  double model_bound = 0.0;
};

struct ConvergenceReport {
  int fine_m = 0;
  std::vector<ConvergenceRow> rows;
  // Least-squares slope of log e against log M; empty when some error is 0.
  std::optional<double> slope_effective;
  std::optional<double> slope_collocation;
  // max over rows of e_effective / model_bound, and max/min of that ratio.
  double fitted_constant = 0.0;
  double constant_spread = 0.0;
  // Rate in M expected from the declared smoothness of n^2 (-2/3 or -1/3).
  std::optional<double> expected_rate;
  std::string smoothness;
};

/// Least-squares slope of log(ys) against log(xs); empty unless all values
/// are positive and at least two points are given.
std::optional<double> loglog_slope(std::span<const double> xs, std::span<const double> ys);

ConvergenceReport convergence_study(const DesignParams& params, const std::vector<int>& m_list, int fine_m,
                                    const SolverOptions& options = {});

}  // namespace metamat
