#include "metamat/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace metamat {

double gamma_floor(int P, double kappa) { return std::pow(1.0 / (2.0 * P), (1.0 + kappa) / 3.0); }

double default_gamma(double k, int P, double kappa) { return 10.0 * k * gamma_floor(P, kappa); }

std::vector<std::string> DesignParams::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidParameter("wave number k must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidParameter("kappa must lie in (0, 1)");
  if (P < 1) throw InvalidParameter("P must be at least 1");
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
  const double norm = std::sqrt(alpha[0] * alpha[0] + alpha[1] * alpha[1] + alpha[2] * alpha[2]);
  if (!(std::abs(norm - 1.0) <= 1e-12)) throw InvalidParameter("incident direction alpha must be a unit vector");
  if (!n0sq.eval || !n2.eval) throw InvalidParameter("coefficient fields must be set");

  const double floor = gamma_floor(P, kappa);
  if (!(gamma > floor)) {
    throw InvalidParameter("gamma = " + std::to_string(gamma) + " must exceed (1/(2P))^((1+kappa)/3) = " +
                           std::to_string(floor));
  }
  std::vector<std::string> warnings;
  if (gamma < 10.0 * floor) {
    warnings.push_back("gamma is within a factor 10 of its lower limit " + std::to_string(floor));
  }
  return warnings;
}

Complex DesignParams::desired_n2(const Point& x) const {
  return {n2(x), n2_imag ? (*n2_imag)(x) : 0.0};
}

DesignParams experiment_params(double k, CoefficientField n2) {
  DesignParams params;
  params.k = k;
  params.gamma = default_gamma(k, params.P, params.kappa);
  params.n2 = std::move(n2);
  return params;
}

ComplexField target_p(const DesignParams& params) {
  return [params](const Point& x) { return params.k * params.k * (params.n0sq(x) - params.desired_n2(x)); };
}

ComplexField boundary_h(const DesignParams& params) {
  const double scale = params.gamma * params.gamma * params.gamma / (4.0 * std::numbers::pi);
  return [p = target_p(params), scale](const Point& x) { return scale * p(x); };
}

Complex impedance(const ComplexField& h, const Point& center, double a, double kappa) {
  return h(center) / std::pow(a, kappa);
}

double effective_factor(const BallLattice& lattice, double gamma) {
  const double base =
      gamma * static_cast<double>(lattice.per_axis()) * std::pow(lattice.radius(), (2.0 - lattice.kappa()) / 3.0);
  return base * base * base;
}

ComplexField effective_p(const ComplexField& p, const BallLattice& lattice, double gamma) {
  const double factor = effective_factor(lattice, gamma);
  return [p, factor](const Point& x) { return p(x) * factor; };
}

ComplexField achieved_n2(const DesignParams& params, const BallLattice& lattice) {
  const double factor = effective_factor(lattice, params.gamma);
  const double inv_k2 = 1.0 / (params.k * params.k);
  return [params, factor, inv_k2, p = target_p(params)](const Point& x) {
    return Complex(params.n0sq(x)) - inv_k2 * factor * p(x);
  };
}

std::string to_string(ErrorMode mode) {
  return mode == ErrorMode::MaxOverCenters ? "max-over-centers" : "first-center";
}

ErrorMode parse_error_mode(const std::string& text) {
  if (text == "max-over-centers" || text == "max") return ErrorMode::MaxOverCenters;
  if (text == "first-center" || text == "first") return ErrorMode::FirstCenter;
  throw InvalidParameter("unknown error mode '" + text + "' (expected max-over-centers or first-center)");
}

BallLattice build_lattice(int m, const DesignParams& params) {
  return build_lattice(m, params.P, params.gamma, params.kappa);
}

namespace {

struct PointDefect {
  double E;
  double p_defect;
  double zeta;
};

}  // namespace

CenterScan scan_centers(const DesignParams& params, const BallLattice& lattice, ErrorMode mode) {
  const double k2 = params.k * params.k;
  const double factor = effective_factor(lattice, params.gamma);
  const double h_scale = params.gamma * params.gamma * params.gamma / (4.0 * std::numbers::pi);
  const double inv_a_kappa = 1.0 / std::pow(lattice.radius(), params.kappa);

  auto at = [&](std::int64_t l) {
    const Point x = lattice.center(l);
    const double n0 = params.n0sq(x);
    const Complex n2 = params.desired_n2(x);
    const Complex p = k2 * (n0 - n2);
    const Complex p_a = p * factor;
    const Complex n2_a = n0 - p_a / k2;
    return PointDefect{std::abs(n2 - n2_a), std::abs(p - p_a), std::abs(h_scale * p) * inv_a_kappa};
  };

  const std::int64_t M = lattice.count();
  double e_max = 0.0;
  double d_max = 0.0;
  double z_min = std::numeric_limits<double>::infinity();
  double z_max = 0.0;
#pragma omp parallel for schedule(static) reduction(max : e_max, d_max, z_max) reduction(min : z_min)
  for (std::int64_t l = 0; l < M; ++l) {
    const PointDefect d = at(l);
    e_max = std::max(e_max, d.E);
    d_max = std::max(d_max, d.p_defect);
    z_min = std::min(z_min, d.zeta);
    z_max = std::max(z_max, d.zeta);
  }

  CenterScan scan{e_max, d_max, z_min, z_max};
  if (mode == ErrorMode::FirstCenter) {
    const PointDefect first = at(0);
    scan.E = first.E;
    scan.p_defect = first.p_defect;
  }
  return scan;
}

double design_error(const DesignParams& params, const BallLattice& lattice, ErrorMode mode) {
  return scan_centers(params, lattice, mode).E;
}

double sup_p_estimate(const DesignParams& params, const BallLattice& lattice) {
  const ComplexField p = target_p(params);
  constexpr int grid = 64;
  double sup = 0.0;
#pragma omp parallel for schedule(static) reduction(max : sup)
  for (int i3 = 0; i3 < grid; ++i3) {
    for (int i2 = 0; i2 < grid; ++i2) {
      for (int i1 = 0; i1 < grid; ++i1) {
        const Point x{i1 / double(grid - 1), i2 / double(grid - 1), i3 / double(grid - 1)};
        sup = std::max(sup, std::abs(p(x)));
      }
    }
  }
  const std::int64_t M = lattice.count();
#pragma omp parallel for schedule(static) reduction(max : sup)
  for (std::int64_t l = 0; l < M; ++l) {
    sup = std::max(sup, std::abs(p(lattice.center(l))));
  }
  return sup;
}

double error_bound(const DesignParams& params, const BallLattice& lattice) {
  const double factor = effective_factor(lattice, params.gamma);
  return sup_p_estimate(params, lattice) * std::abs(1.0 - factor) / (params.k * params.k);
}

DesignRow evaluate_design(const DesignParams& params, int m, ErrorMode mode) {
  const BallLattice lattice = build_lattice(m, params);
  const CenterScan scan = scan_centers(params, lattice, mode);
  DesignRow row;
  row.m = m;
  row.M = lattice.count();
  row.a = lattice.radius();
  row.ratio = packing_ratio(lattice, params.gamma, params.kappa);
  row.E = scan.E;
  row.p_defect = scan.p_defect;
  row.zeta_min = scan.zeta_min;
  row.zeta_max = scan.zeta_max;
  return row;
}

BallLattice DesignReport::accepted_lattice() const { return build_lattice(accepted().m, params); }

Complex DesignReport::zeta(std::int64_t l) const {
  const BallLattice lattice = accepted_lattice();
  return impedance(boundary_h(params), lattice.center(l), lattice.radius(), params.kappa);
}

DesignReport minimal_design(const DesignParams& params, ErrorMode mode, int m_max) {
  params.validate();
  if (m_max < 1) throw InvalidParameter("m_max must be at least 1");
  DesignReport report{params, mode, {}};
  for (int m = 1; m <= m_max; ++m) {
    report.rows.push_back(evaluate_design(params, m, mode));
    if (report.rows.back().p_defect <= params.epsilon) return report;
  }
  throw NoConvergence("no m <= " + std::to_string(m_max) + " meets epsilon = " + std::to_string(params.epsilon),
                      std::move(report.rows));
}

}  // namespace metamat
