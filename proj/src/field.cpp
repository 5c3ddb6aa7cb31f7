#include "metamat/field.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace metamat {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double distance(const Point& x, const Point& y) {
  const double d1 = x[0] - y[0];
  const double d2 = x[1] - y[1];
  const double d3 = x[2] - y[2];
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

Complex green_at_distance(double k, double r) { return std::polar(1.0 / (kFourPi * r), k * r); }

double sup_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const Complex& c : v) s = std::max(s, std::abs(c));
  return s;
}

void check_subcells(int subcells) {
  if (subcells < 1 || subcells % 2 == 0) {
    throw InvalidParameter("sub-cell count must be a positive odd integer, got " + std::to_string(subcells));
  }
}

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Incident:
      return "incident";
    case FieldKind::Effective:
      return "effective";
    case FieldKind::Collocation:
      return "collocation";
    case FieldKind::Reference:
      return "reference";
  }
  return {};
}

Complex green_kernel(double k, const Point& x, const Point& y) {
  const double r = distance(x, y);
  if (r == 0.0) throw SingularEvaluation("Green kernel evaluated at coincident points");
  return green_at_distance(k, r);
}

Complex incident_wave(const DesignParams& params, const Point& x) {
  const auto& a = params.alpha;
  return std::polar(1.0, params.k * (a[0] * x[0] + a[1] * x[1] + a[2] * x[2]));
}

FieldSolution incident_field(const DesignParams& params, std::span<const Point> points) {
  FieldSolution out;
  out.kind = FieldKind::Incident;
  out.method = "closed-form";
  out.values.reserve(points.size());
  for (const Point& x : points) out.values.push_back(incident_wave(params, x));
  return out;
}

FieldSolution incident_field(const DesignParams& params, const BallLattice& lattice) {
  FieldSolution out;
  out.kind = FieldKind::Incident;
  out.method = "closed-form";
  out.values.resize(static_cast<std::size_t>(lattice.count()));
  for (std::int64_t l = 0; l < lattice.count(); ++l) {
    out.values[static_cast<std::size_t>(l)] = incident_wave(params, lattice.center(l));
  }
  return out;
}

Complex self_cell_integral(double k, double side) {
  const double R = std::cbrt(3.0 / kFourPi) * side;
  const double z = k * R;
  if (z < 1e-6) return {0.5 * R * R, 0.0};
  // exp(iz)(1 - iz) - 1 split into parts that avoid cancellation.
  const double s = std::sin(0.5 * z);
  const double re = -2.0 * s * s + z * std::sin(z);
  const double z2 = z * z;
  const double im = z < 1e-2 ? z * z2 * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0) : std::sin(z) - z * std::cos(z);
  return Complex(re, im) / (k * k);
}

Complex kernel_cell_integral(std::int64_t l, std::int64_t j, const BallLattice& lattice, const ComplexField& p,
                             double k, int subcells) {
  check_subcells(subcells);
  const Point xl = lattice.center(l);
  const Point xj = lattice.center(j);
  const double side = lattice.spacing();
  if (subcells == 1) {
    if (l == j) return p(xl) * self_cell_integral(k, side);
    return green_kernel(k, xl, xj) * p(xj) * (side * side * side);
  }

  const double sub = side / subcells;
  const double volume = sub * sub * sub;
  const int mid = subcells / 2;
  std::vector<Complex> terms;
  terms.reserve(static_cast<std::size_t>(subcells) * subcells * subcells);
  for (int t3 = 0; t3 < subcells; ++t3) {
    for (int t2 = 0; t2 < subcells; ++t2) {
      for (int t1 = 0; t1 < subcells; ++t1) {
        if (l == j && t1 == mid && t2 == mid && t3 == mid) continue;
        const Point y{xj[0] + (t1 - mid) * sub, xj[1] + (t2 - mid) * sub, xj[2] + (t3 - mid) * sub};
        terms.push_back(green_kernel(k, xl, y) * p(y) * volume);
      }
    }
  }
  Complex total = pairwise_sum(terms);
  if (l == j) total += p(xl) * self_cell_integral(k, sub);
  return total;
}

// ---------------------------------------------------------------------------

void LatticeSystem::build_green_table(double k) {
  const std::int64_t n = lattice_.per_axis();
  const double h = lattice_.spacing();
  green_table_.assign(static_cast<std::size_t>(n * n * n), Complex(0.0));
  for (std::int64_t d3 = 0; d3 < n; ++d3) {
    for (std::int64_t d2 = 0; d2 < n; ++d2) {
      for (std::int64_t d1 = 0; d1 < n; ++d1) {
        if (d1 == 0 && d2 == 0 && d3 == 0) continue;
        const double r = h * std::sqrt(static_cast<double>(d1 * d1 + d2 * d2 + d3 * d3));
        green_table_[static_cast<std::size_t>(d1 + n * (d2 + n * d3))] = green_at_distance(k, r);
      }
    }
  }
}

Complex LatticeSystem::green_at_offset(const CellIndex& a, const CellIndex& b) const {
  const std::int64_t n = lattice_.per_axis();
  const std::int64_t d1 = std::abs(a.i1 - b.i1);
  const std::int64_t d2 = std::abs(a.i2 - b.i2);
  const std::int64_t d3 = std::abs(a.i3 - b.i3);
  return green_table_[static_cast<std::size_t>(d1 + n * (d2 + n * d3))];
}

void LatticeSystem::apply(std::span<const Complex> x, std::span<Complex> y) const {
  const std::int64_t M = size();
#pragma omp parallel
  {
    std::vector<Complex> terms(static_cast<std::size_t>(M));
#pragma omp for schedule(static)
    for (std::int64_t l = 0; l < M; ++l) {
      for (std::int64_t j = 0; j < M; ++j) terms[static_cast<std::size_t>(j)] = entry(l, j) * x[j];
      y[l] = x[l] + pairwise_sum(terms);
    }
  }
}

EffectiveSystem::EffectiveSystem(const BallLattice& lattice, const DesignParams& params) : LatticeSystem(lattice) {
  build_green_table(params.k);
  const ComplexField h = boundary_h(params);
  const double scale = kFourPi * std::pow(lattice.radius(), 2.0 - params.kappa);
  weights_.resize(static_cast<std::size_t>(size()));
  for (std::int64_t j = 0; j < size(); ++j) weights_[static_cast<std::size_t>(j)] = scale * h(lattice.center(j));
}

bool EffectiveSystem::is_identity() const {
  return std::all_of(weights_.begin(), weights_.end(), [](const Complex& w) { return w == 0.0; });
}

Complex EffectiveSystem::entry(std::int64_t l, std::int64_t j) const {
  if (l == j) return 0.0;
  return green_at_offset(lattice_.cell(l), lattice_.cell(j)) * weights_[static_cast<std::size_t>(j)];
}

namespace {

// Row-wise (I + A) x where A_lj = G(offset) * w_j * x_j off the diagonal and
// diag_l * x_l on it; all row sums are pairwise.
template <typename GreenAt>
void apply_translation_invariant(const BallLattice& lattice, GreenAt green_at, std::span<const Complex> weights,
                                 std::span<const Complex> diag, std::span<const Complex> x, std::span<Complex> y) {
  const std::int64_t n = lattice.per_axis();
  const std::int64_t M = lattice.count();
  std::vector<Complex> wx(static_cast<std::size_t>(M));
  for (std::int64_t j = 0; j < M; ++j) wx[static_cast<std::size_t>(j)] = weights[j] * x[j];
#pragma omp parallel
  {
    std::vector<Complex> terms(static_cast<std::size_t>(M));
#pragma omp for schedule(static)
    for (std::int64_t l = 0; l < M; ++l) {
      const CellIndex cl = lattice.cell(l);
      std::int64_t j = 0;
      for (std::int64_t i3 = 0; i3 < n; ++i3) {
        const std::int64_t d3 = std::abs(cl.i3 - i3);
        for (std::int64_t i2 = 0; i2 < n; ++i2) {
          const std::int64_t base = n * (std::abs(cl.i2 - i2) + n * d3);
          for (std::int64_t i1 = 0; i1 < n; ++i1, ++j) {
            terms[static_cast<std::size_t>(j)] = green_at(base + std::abs(cl.i1 - i1)) * wx[static_cast<std::size_t>(j)];
          }
        }
      }
      terms[static_cast<std::size_t>(l)] = diag.empty() ? Complex(0.0) : diag[l] * x[l];
      y[l] = x[l] + pairwise_sum(terms);
    }
  }
}

}  // namespace

void EffectiveSystem::apply(std::span<const Complex> x, std::span<Complex> y) const {
  apply_translation_invariant(
      lattice_, [this](std::int64_t idx) { return green_table_[static_cast<std::size_t>(idx)]; }, weights_, {}, x, y);
}

CollocationSystem::CollocationSystem(const BallLattice& lattice, const DesignParams& params, int subcells)
    : LatticeSystem(lattice), k_(params.k), subcells_(subcells), p_(target_p(params)) {
  check_subcells(subcells);
  build_green_table(params.k);
  self_integral_ = self_cell_integral(params.k, lattice.spacing());
  p_centers_.resize(static_cast<std::size_t>(size()));
  for (std::int64_t j = 0; j < size(); ++j) p_centers_[static_cast<std::size_t>(j)] = p_(lattice.center(j));
}

bool CollocationSystem::is_identity() const {
  return subcells_ == 1 &&
         std::all_of(p_centers_.begin(), p_centers_.end(), [](const Complex& p) { return p == 0.0; });
}

Complex CollocationSystem::entry(std::int64_t l, std::int64_t j) const {
  if (subcells_ > 1) return kernel_cell_integral(l, j, lattice_, p_, k_, subcells_);
  const Complex pj = p_centers_[static_cast<std::size_t>(j)];
  if (l == j) return pj * self_integral_;
  const double h = lattice_.spacing();
  return green_at_offset(lattice_.cell(l), lattice_.cell(j)) * pj * (h * h * h);
}

void CollocationSystem::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (subcells_ > 1) {
    LatticeSystem::apply(x, y);
    return;
  }
  const double h = lattice_.spacing();
  const double volume = h * h * h;
  CVector weights(p_centers_.size());
  CVector diag(p_centers_.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    weights[j] = p_centers_[j] * volume;
    diag[j] = p_centers_[j] * self_integral_;
  }
  apply_translation_invariant(
      lattice_, [this](std::int64_t idx) { return green_table_[static_cast<std::size_t>(idx)]; }, weights, diag, x, y);
}

// ---------------------------------------------------------------------------

FieldSolution solve_system(const LatticeSystem& system, std::span<const Complex> rhs, FieldKind kind,
                           const SolverOptions& options) {
  const std::int64_t M = system.size();
  if (static_cast<std::int64_t>(rhs.size()) != M) throw InvalidParameter("right-hand side has the wrong length");

  FieldSolution out;
  out.kind = kind;
  const double rhs_norm = sup_norm(rhs);

  if (system.is_identity()) {
    out.method = "identity";
    out.values.assign(rhs.begin(), rhs.end());
  } else if (M <= options.dense_cutoff) {
    out.method = "dense-lu";
    Eigen::MatrixXcd A(M, M);
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < M; ++l) {
      for (std::int64_t j = 0; j < M; ++j) A(l, j) = system.entry(l, j) + (l == j ? 1.0 : 0.0);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::Map<const Eigen::VectorXcd> b(rhs.data(), M);
    Eigen::VectorXcd u = lu.solve(b);
    out.values.assign(u.data(), u.data() + M);
    if (!std::all_of(out.values.begin(), out.values.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); })) {
      throw SolverError("dense factorisation produced non-finite values (singular system)", {});
    }
  } else {
    out.method = "gmres";
    const int max_iter = static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(M))));
    const LinearOperator op = [&system](std::span<const Complex> x, std::span<Complex> y) { system.apply(x, y); };
    GmresResult res = gmres(op, rhs, 0.5 * options.tolerance * rhs_norm, max_iter, options.restart);
    out.values = std::move(res.x);
    out.residual_history = std::move(res.history);
    if (!res.converged) {
      throw SolverError("GMRES did not converge within " + std::to_string(max_iter) + " iterations",
                        out.residual_history);
    }
  }

  CVector check(static_cast<std::size_t>(M));
  system.apply(out.values, check);
  double worst = 0.0;
  for (std::int64_t l = 0; l < M; ++l) worst = std::max(worst, std::abs(check[l] - rhs[l]));
  out.residual = rhs_norm > 0.0 ? worst / rhs_norm : worst;
  if (out.residual_history.empty()) out.residual_history.push_back(out.residual);
  if (!(out.residual <= options.tolerance)) {
    throw SolverError("relative residual " + std::to_string(out.residual) + " exceeds tolerance",
                      out.residual_history);
  }
  return out;
}

FieldSolution solve_effective(const BallLattice& lattice, const DesignParams& params, const SolverOptions& options) {
  const EffectiveSystem system(lattice, params);
  const FieldSolution u0 = incident_field(params, lattice);
  return solve_system(system, u0.values, FieldKind::Effective, options);
}

Complex evaluate_effective(const FieldSolution& solution, const BallLattice& lattice, const DesignParams& params,
                           const Point& x) {
  const std::int64_t M = lattice.count();
  if (static_cast<std::int64_t>(solution.values.size()) != M) {
    throw InvalidParameter("solution does not match the lattice");
  }
  const ComplexField h = boundary_h(params);
  const double scale = kFourPi * std::pow(lattice.radius(), 2.0 - params.kappa);
  std::vector<Complex> terms(static_cast<std::size_t>(M));
  for (std::int64_t j = 0; j < M; ++j) {
    const Point xj = lattice.center(j);
    const double r = distance(x, xj);
    if (!(r > lattice.radius())) {
      throw ProximityError("point lies within a ball radius of center " + std::to_string(j));
    }
    terms[static_cast<std::size_t>(j)] = green_at_distance(params.k, r) * scale * h(xj) * solution.values[j];
  }
  return incident_wave(params, x) - pairwise_sum(terms);
}

FieldSolution solve_collocation(const BallLattice& lattice, const DesignParams& params,
                                const SolverOptions& options) {
  const CollocationSystem system(lattice, params, options.subcells);
  const FieldSolution u0 = incident_field(params, lattice);
  return solve_system(system, u0.values, FieldKind::Collocation, options);
}

// ---------------------------------------------------------------------------

ReferenceField::ReferenceField(const DesignParams& params, int fine_m, const SolverOptions& options)
    : params_(params),
      lattice_(build_lattice(fine_m, params)),
      solution_(solve_collocation(lattice_, params, options)) {
  solution_.kind = FieldKind::Reference;
  scattered_.resize(solution_.values.size());
  for (std::int64_t l = 0; l < lattice_.count(); ++l) {
    scattered_[static_cast<std::size_t>(l)] = solution_.values[l] - incident_wave(params_, lattice_.center(l));
  }
}

namespace {

// Interpolation stencil along one axis: nodes base and base + 1 with weight
// frac on the second; frac == 0 means the point sits on node base.
struct AxisStencil {
  std::int64_t base;
  double frac;
};

AxisStencil stencil_from_ratio(std::int64_t num, std::int64_t den, std::int64_t n) {
  std::int64_t base = num / den;
  const std::int64_t rem = num % den;
  if (rem == 0) return {std::min(base, n - 1), 0.0};
  base = std::clamp<std::int64_t>(base, 0, n - 2);
  return {base, static_cast<double>(num - base * den) / static_cast<double>(den)};
}

AxisStencil stencil_from_coordinate(double x, std::int64_t n) {
  const double t = std::clamp(x * static_cast<double>(n) - 0.5, 0.0, static_cast<double>(n - 1));
  std::int64_t base = static_cast<std::int64_t>(std::floor(t));
  if (static_cast<double>(base) == t) return {base, 0.0};
  base = std::min(base, n - 2);
  return {base, t - static_cast<double>(base)};
}

}  // namespace

namespace {

Complex interpolate(const BallLattice& fine, const FieldSolution& solution, const CVector& scattered,
                    const DesignParams& params, const Point& x, const AxisStencil (&s)[3]) {
  if (s[0].frac == 0.0 && s[1].frac == 0.0 && s[2].frac == 0.0) {
    return solution.values[static_cast<std::size_t>(fine.flat({s[0].base, s[1].base, s[2].base}))];
  }
  Complex acc = 0.0;
  for (int c3 = 0; c3 < 2; ++c3) {
    const double w3 = c3 ? s[2].frac : 1.0 - s[2].frac;
    if (w3 == 0.0) continue;
    for (int c2 = 0; c2 < 2; ++c2) {
      const double w2 = c2 ? s[1].frac : 1.0 - s[1].frac;
      if (w2 == 0.0) continue;
      for (int c1 = 0; c1 < 2; ++c1) {
        const double w1 = c1 ? s[0].frac : 1.0 - s[0].frac;
        if (w1 == 0.0) continue;
        const std::int64_t idx = fine.flat({s[0].base + c1, s[1].base + c2, s[2].base + c3});
        acc += (w1 * w2 * w3) * scattered[static_cast<std::size_t>(idx)];
      }
    }
  }
  return incident_wave(params, x) + acc;
}

}  // namespace

Complex ReferenceField::at(const Point& x) const {
  const std::int64_t n = lattice_.per_axis();
  const AxisStencil s[3] = {stencil_from_coordinate(x[0], n), stencil_from_coordinate(x[1], n),
                            stencil_from_coordinate(x[2], n)};
  return interpolate(lattice_, solution_, scattered_, params_, x, s);
}

FieldSolution ReferenceField::restrict_to(const BallLattice& coarse) const {
  const std::int64_t nf = lattice_.per_axis();
  const std::int64_t nc = coarse.per_axis();
  if (coarse.P() != lattice_.P() || nc > nf) {
    throw InvalidParameter("reference lattice must refine the coarse lattice with the same P");
  }
  FieldSolution out;
  out.kind = FieldKind::Reference;
  out.method = "fine-collocation m=" + std::to_string(lattice_.m());
  out.residual = solution_.residual;
  out.values.resize(static_cast<std::size_t>(coarse.count()));
  for (std::int64_t l = 0; l < coarse.count(); ++l) {
    const CellIndex c = coarse.cell(l);
    // Fine-index position of coarse coordinate (2i+1)/(2nc) is ((2i+1) nf - nc) / (2 nc).
    auto axis = [&](std::int64_t i) { return stencil_from_ratio((2 * i + 1) * nf - nc, 2 * nc, nf); };
    const AxisStencil s[3] = {axis(c.i1), axis(c.i2), axis(c.i3)};
    out.values[static_cast<std::size_t>(l)] = interpolate(lattice_, solution_, scattered_, params_, coarse.center(l), s);
  }
  return out;
}

FieldSolution reference_solution(const DesignParams& params, int fine_m, const BallLattice& coarse,
                                 const SolverOptions& options) {
  if (fine_m <= coarse.m()) throw InvalidParameter("fine_m must exceed the coarse m");
  return ReferenceField(params, fine_m, options).restrict_to(coarse);
}

double sup_distance(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) {
    throw InvalidParameter("sup_distance: length mismatch (" + std::to_string(u.size()) + " vs " +
                           std::to_string(v.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s = std::max(s, std::abs(u[i] - v[i]));
  return s;
}

double sup_distance(const FieldSolution& u, const FieldSolution& v) { return sup_distance(u.values, v.values); }

std::optional<double> loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return std::nullopt;
  const std::size_t n = xs.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) return std::nullopt;
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

ConvergenceReport convergence_study(const DesignParams& params, const std::vector<int>& m_list, int fine_m,
                                    const SolverOptions& options) {
  params.validate();
  if (m_list.empty()) throw InvalidParameter("m_list must not be empty");
  if (!std::is_sorted(m_list.begin(), m_list.end()) ||
      std::adjacent_find(m_list.begin(), m_list.end()) != m_list.end() || m_list.front() < 1) {
    throw InvalidParameter("m_list must be strictly ascending positive integers");
  }
  if (fine_m <= m_list.back()) throw InvalidParameter("fine_m must exceed every m in m_list");

  ConvergenceReport report;
  report.fine_m = fine_m;
  report.smoothness = params.n2.smoothness.describe();
  switch (params.n2.smoothness.kind) {
    case Smoothness::Kind::TwiceDifferentiable:
      report.expected_rate = -2.0 / 3.0;
      break;
    case Smoothness::Kind::Lipschitz:
      report.expected_rate = -1.0 / 3.0;
      break;
    case Smoothness::Kind::Modulus:
      break;
  }

  const ReferenceField reference(params, fine_m, options);
  std::vector<double> Ms;
  std::vector<double> e_eff;
  std::vector<double> e_col;
  for (int m : m_list) {
    const BallLattice lattice = build_lattice(m, params);
    const FieldSolution ref = reference.restrict_to(lattice);
    ConvergenceRow row;
    row.m = m;
    row.M = lattice.count();
    row.e_effective = sup_distance(solve_effective(lattice, params, options), ref);
    row.e_collocation = sup_distance(solve_collocation(lattice, params, options), ref);
    const double M = static_cast<double>(row.M);
    row.model_bound = std::log(M) / std::pow(M, 2.0 / 3.0) +
                      std::abs(1.0 - ball_density_product(lattice, params.gamma, params.kappa));
    report.rows.push_back(row);
    Ms.push_back(M);
    e_eff.push_back(row.e_effective);
    e_col.push_back(row.e_collocation);
  }
  report.slope_effective = loglog_slope(Ms, e_eff);
  report.slope_collocation = loglog_slope(Ms, e_col);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const ConvergenceRow& row : report.rows) {
    const double ratio = row.e_effective / row.model_bound;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  report.fitted_constant = hi;
  report.constant_spread = lo > 0.0 ? hi / lo : 0.0;
  return report;
}

}  // namespace metamat
