#pragma once

/**
 * @brief Fast diffusion flow  d_t v = L v^m,  m = 1 - 1/n,  on radial weighted grids
 *
 * In zeta = log s the operator is in divergence form,
 *
 *   L f = alpha^2 e^{-n zeta} d_zeta( e^{(n-2) zeta} d_zeta f ),
 *
 * discretised with fourth-order staggered fluxes so that sum_i h e^{n zeta_i} v_i
 * changes only through the end faces. Left end: ghost values with f linear
 * in s^2, as for smooth radial data. Right end: the last three nodes
 * are Dirichlet data, either frozen or prescribed as a function of time.
 *
 * Step (linearly implicit, theta = 1 by default):
 *   (I - theta dt L M) (v_new - v_old) = dt L v_old^m,   M = diag(m v_old^{m-1}).
 * theta = 1/2 gives a second-order scheme.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ckn/discretization/operators.hpp"
#include "ckn/errors.hpp"
#include "ckn/functionals.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

/// Number of right-end nodes held as Dirichlet data.
inline constexpr std::size_t kPinnedNodes = 3;

struct FlowOptions {
  double theta = 1.0;
  int max_halvings = 20;
  /// Largest tolerated |mass change through the ends| per unit time, relative to the mass.
  double flux_tolerance = 1e-6;
  /// Dirichlet data v(t, s) for the pinned right nodes; empty keeps the initial values.
  std::function<double(double, double)> boundary;
};

struct FlowState {
  double t = 0.0;
  RadialField v;
  DerivedParams dp;
  long steps = 0;
  long halvings = 0;
  double boundary_flux = 0.0;  // last step: (mass change) / (dt * mass)
};

/// Discrete operator in flux form, L f = rows(f), for a radial grid.
class FluxOperator {
 public:
  explicit FluxOperator(std::shared_ptr<const RadialGrid> grid) : grid_(std::move(grid)) {
    if (grid_->sphere.kind() != SphereGrid::Kind::Point)
      throw DomainError("flow: only radial (point-sphere) grids are supported");
    n_ = grid_->line.size();
    if (n_ < 12) throw DomainError("flow: at least 12 nodes are required");
    h_ = grid_->line.spacing();
    const double a2 = grid_->alpha * grid_->alpha;
    const double nn = grid_->n;
    // Stencil of row i over nodes i-3..i+3 (after reflection), assembled from face stencils.
    rows_.assign(n_, {});
    for (std::size_t i = 0; i + kPinnedNodes < n_; ++i) {
      std::array<double, 7> w{};
      const double zi = grid_->line.node(i);
      const double pre = a2 * std::exp(-nn * zi) / (24.0 * h_ * 24.0 * h_);
      const double face_coef[4] = {1.0, -27.0, 27.0, -1.0};  // faces i-3/2, i-1/2, i+1/2, i+3/2
      for (int f = 0; f < 4; ++f) {
        const int k = static_cast<int>(i) - 2 + f;  // face k + 1/2
        const double g = std::exp((nn - 2.0) * (grid_->line.start() + h_ * (k + 0.5)));
        const double node_coef[4] = {1.0, -27.0, 27.0, -1.0};  // nodes k-1..k+2
        for (int q = 0; q < 4; ++q) {
          const int node = k - 1 + q;
          w[static_cast<std::size_t>(node - static_cast<int>(i) + 3)] += pre * face_coef[f] * g * node_coef[q];
        }
      }
      auto add = [this](std::size_t row, std::size_t col, double c) {
        for (auto& e : rows_[row])
          if (e.first == col) {
            e.second += c;
            return;
          }
        rows_[row].push_back({col, c});
      };
      for (int off = -3; off <= 3; ++off) {
        const double c = w[static_cast<std::size_t>(off + 3)];
        if (c == 0.0) continue;
        const int node = static_cast<int>(i) + off;
        if (node >= 0) {
          add(i, static_cast<std::size_t>(node), c);
          continue;
        }
        // Ghost node: f taken linear in s^2 through nodes 0 and 1.
        const double r = std::expm1(2.0 * h_ * node) / std::expm1(2.0 * h_);
        add(i, 0, c * (1.0 - r));
        add(i, 1, c * r);
      }
    }
  }

  const RadialGrid& grid() const { return *grid_; }
  std::size_t size() const { return n_; }
  bool pinned(std::size_t i) const { return i + kPinnedNodes >= n_; }

  std::vector<double> apply(const std::vector<double>& f) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (const auto& [j, c] : rows_[i]) out[i] += c * f[j];
    return out;
  }

  /// Sparse matrix I - scale * L diag(d) on free rows, identity on pinned rows.
  Eigen::SparseMatrix<double> system(double scale, const std::vector<double>& d) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n_ * 8);
    for (std::size_t i = 0; i < n_; ++i) {
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      for (const auto& [j, c] : rows_[i]) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -scale * c * d[j]);
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(n_), static_cast<int>(n_));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
  }

 private:
  std::shared_ptr<const RadialGrid> grid_;
  std::size_t n_ = 0;
  double h_ = 1.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

/// Default log-step: tails behave like e^{-2(n-1) zeta}, so the step shrinks with n.
inline double flow_step(const DerivedParams& dp) { return std::clamp(0.02 / (dp.n - 1.0), 1e-3, 0.02); }

/// Radial grid for flow runs: s in [1e-3 L, 10^{12/(n-2)} L] with L = alpha sqrt(n(n-2)).
/// The right end keeps the s^{2-n} tail of the pressure functional near 1e-12.
inline std::shared_ptr<const RadialGrid> flow_grid(const DerivedParams& dp, double h = 0.0) {
  if (h <= 0.0) h = flow_step(dp);
  const double len = dp.alpha * std::sqrt(dp.n * (dp.n - 2.0));
  const double lo = std::log(1e-3 * len);
  const double hi = std::log(len) + std::min(12.0 / (dp.n - 2.0), 40.0) * std::log(10.0);
  const auto ns = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  return RadialGrid::make(std::exp(lo), std::exp(hi), ns, SphereGrid::point(dp.d), dp.n, dp.alpha);
}

inline double flow_mass(const RadialField& v) { return integrate(v); }

/// Positive perturbation of the radial optimizer u: u (1 + g(y) m(y, omega)) with a Gaussian g
/// around the peak and random oscillation m; angular terms only on grids with sphere calculus.
inline RadialField perturbed_optimizer(std::shared_ptr<const RadialGrid> g, const DerivedParams& dp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const double c1 = 0.3 * ud(rng), c2 = 0.3 * ud(rng), k = 1.0 + ud(rng) * 0.5, z1 = 0.5 * ud(rng);
  const double w1 = 0.3 * ud(rng), w2 = 0.3 * ud(rng);
  const double z0 = std::log(g->alpha * std::sqrt(g->n * (g->n - 2.0)));
  const auto base = normalized_radial(dp);
  return sample<RadialGrid>(g, [&](double z, std::size_t j) {
    const double y = z - z0 - z1;
    const double t = g->sphere.theta(j), ph = g->sphere.phi(j);
    const double ang = g->sphere.has_calculus() ? w1 * std::cos(t) + w2 * std::sin(t) * std::cos(ph) : 0.0;
    const double mod = 1.0 + std::exp(-y * y / 2.0) * (c1 * std::sin(k * y) + c2 * std::cos(2.0 * k * y) + ang);
    return eval_radial(base, std::exp(z)) * mod;
  });
}

namespace detail {

inline void check_flow_grid(const RadialGrid& g, const DerivedParams& dp) {
  if (std::abs(g.n - dp.n) > 1e-12 * dp.n || std::abs(g.alpha - dp.alpha) > 1e-12 * dp.alpha)
    throw DomainError("flow: grid (n, alpha) does not match the parameters");
}

/// One linearly implicit step without retries; empty on loss of positivity.
inline std::optional<std::vector<double>> try_step(const FluxOperator& op, const std::vector<double>& v, double t,
                                                   double dt, double m, const FlowOptions& opt) {
  const std::size_t n = op.size();
  std::vector<double> f(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = std::pow(v[i], m);
    d[i] = m * f[i] / v[i];
  }
  const auto lf = op.apply(f);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = dt * lf[i];
  const auto& g = op.grid();
  for (std::size_t i = 0; i < n; ++i) {
    if (!op.pinned(i)) continue;
    const double target = opt.boundary ? opt.boundary(t + dt, g.s(i)) : v[i];
    rhs(static_cast<Eigen::Index>(i)) = target - v[i];
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(op.system(opt.theta * dt, d));
  if (lu.info() != Eigen::Success) throw NumericalError("flow: linear solve failed");
  const Eigen::VectorXd dv = lu.solve(rhs);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v[i] + dv(static_cast<Eigen::Index>(i));
    if (!(out[i] > 0.0) || !std::isfinite(out[i])) return std::nullopt;
  }
  return out;
}

inline void advance(const FluxOperator& op, std::vector<double>& v, double t, double dt, double m,
                    const FlowOptions& opt, int depth, long& halvings) {
  if (auto next = try_step(op, v, t, dt, m, opt)) {
    v = std::move(*next);
    return;
  }
  if (depth >= opt.max_halvings) throw NumericalError("flow: positivity lost after the maximum number of dt halvings");
  ++halvings;
  advance(op, v, t, 0.5 * dt, m, opt, depth + 1, halvings);
  advance(op, v, t + 0.5 * dt, 0.5 * dt, m, opt, depth + 1, halvings);
}

}  // namespace detail

/// One step of size dt (split into halves while positivity fails).
inline FlowState step(const FlowState& s, double dt, const FlowOptions& opt = {}) {
  if (!(dt > 0.0)) throw DomainError("flow step: dt must be positive");
  if (!s.v.positive()) throw DomainError("flow step: v must be strictly positive");
  detail::check_flow_grid(s.v.grid(), s.dp);
  const FluxOperator op(s.v.grid_ptr());
  FlowState out = s;
  std::vector<double> v = s.v.data();
  detail::advance(op, v, s.t, dt, 1.0 - 1.0 / s.dp.n, opt, 0, out.halvings);
  out.v = RadialField(s.v.grid_ptr(), std::move(v));
  out.t = s.t + dt;
  ++out.steps;
  const double m0 = flow_mass(s.v), m1 = flow_mass(out.v);
  out.boundary_flux = (m1 - m0) / (dt * m0);
  if (!opt.boundary && std::abs(out.boundary_flux) > opt.flux_tolerance)
    throw NumericalError("flow: mass flux through the truncation ends exceeds the tolerance");
  return out;
}

struct FlowTrace {
  std::vector<double> times, J, mass, dJ_step;
  bool monotone = true;
  double dJdt_at_0 = 0.0;
  double max_boundary_flux = 0.0;
  long halvings = 0;
  FlowState final_state;
};

/// d/dt J at v along the flow, by a central difference of size eps in the direction L v^m.
/// eps is reduced so that both shifted fields keep v within 0.1% of itself.
inline double dJdt_central(const RadialField& v, const DerivedParams& dp, double eps) {
  const double m = 1.0 - 1.0 / dp.n;
  const auto dir = op_L(v.map([m](double x) { return std::pow(x, m); }));
  for (std::size_t k = 0; k < v.size(); ++k)
    if (dir[k] != 0.0) eps = std::min(eps, 1e-3 * v[k] / std::abs(dir[k]));
  auto at = [&](double e) {
    RadialField w(v.grid_ptr());
    for (std::size_t k = 0; k < v.size(); ++k) w[k] = v[k] + e * dir[k];
    return pressure_functional(w, dp);
  };
  return (at(eps) - at(-eps)) / (2.0 * eps);
}

struct DJdtReport {
  double lhs = 0.0;       // (n-2)^2/4 dJ/dt by central differences
  double rhs = 0.0;       // -(2/p) int (L u) u^{1-p} L(u^{p(n-1)/n}) dmu
  double integral = 0.0;  // the integral itself, without the prefactor
  double scale = 0.0;     // (2/p) int |(L u) u^{1-p} L(u^{p(n-1)/n})| dmu
  double mismatch = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|, scale)
};

/// Derivative of the pressure form of the quotient at v = u^p along the flow.
/// Valid on radial grids and on (zeta, S^2) grids.
inline DJdtReport dJdt_identity(const RadialField& u, const DerivedParams& dp) {
  if (!u.positive()) throw DomainError("dJdt_identity: u must be strictly positive");
  detail::check_flow_grid(u.grid(), dp);
  const double p = dp.p, n = dp.n;
  const auto lu = op_L(u);
  const auto lw = op_L(u.map([e = p * (n - 1.0) / n](double x) { return std::pow(x, e); }));
  RadialField integrand(u.grid_ptr()), absint(u.grid_ptr());
  for (std::size_t k = 0; k < u.size(); ++k) {
    integrand[k] = lu[k] * std::pow(u[k], 1.0 - p) * lw[k];
    absint[k] = std::abs(integrand[k]);
  }
  DJdtReport r;
  r.integral = integrate(integrand);
  r.rhs = -(2.0 / p) * r.integral;
  r.scale = (2.0 / p) * integrate(absint);
  const auto v = u.map([p](double x) { return std::pow(x, p); });
  // Step 1e-6 of the time scale J / scale. J / |rhs| is unbounded at stationary points.
  const double j = pressure_functional(v, dp);
  const double eps = r.scale > 0.0 ? 1e-6 * j / r.scale : 1e-6;
  r.lhs = 0.25 * (n - 2.0) * (n - 2.0) * dJdt_central(v, dp, eps);
  r.mismatch = std::abs(r.lhs - r.rhs) / std::max({std::abs(r.lhs), std::abs(r.rhs), r.scale});
  return r;
}

/// Integrate to time T with fixed dt (the last step is shortened to land on T).
inline FlowTrace run(const RadialField& v0, const DerivedParams& dp, double T, double dt, const FlowOptions& opt = {}) {
  if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("flow run: T and dt must be positive");
  FlowTrace tr;
  FlowState s{0.0, v0, dp, 0, 0, 0.0};
  const double j0 = pressure_functional(v0, dp);
  tr.times.push_back(0.0);
  tr.J.push_back(j0);
  tr.mass.push_back(flow_mass(v0));
  tr.dJ_step.push_back(0.0);
  tr.dJdt_at_0 = dJdt_identity(v0.map([p = dp.p](double x) { return std::pow(x, 1.0 / p); }), dp).lhs /
                 (0.25 * (dp.n - 2.0) * (dp.n - 2.0));
  const double slack = 1e-10 * std::abs(j0);
  while (s.t < T * (1.0 - 1e-12)) {
    const double h = std::min(dt, T - s.t);
    s = step(s, h, opt);
    const double j = pressure_functional(s.v, dp);
    tr.times.push_back(s.t);
    tr.dJ_step.push_back(j - tr.J.back());
    if (j > tr.J.back() + slack) tr.monotone = false;
    tr.J.push_back(j);
    tr.mass.push_back(flow_mass(s.v));
    tr.max_boundary_flux = std::max(tr.max_boundary_flux, std::abs(s.boundary_flux));
  }
  tr.halvings = s.halvings;
  tr.final_state = std::move(s);
  return tr;
}

inline std::string trace_csv(const FlowTrace& tr) {
  std::string out = "t,J,mass,dJ_step\n";
  char buf[128];
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", tr.times[k], tr.J[k], tr.mass[k], tr.dJ_step[k]);
    out += buf;
  }
  return out;
}

/// Sobolev case (alpha = 1, n = d): after one flow step, compare the time
/// difference of P = v^{-1/d} with ((d-1)/d)(P Lap P - d |grad P|^2),
/// averaged over the two time levels. Returns the interior sup of |difference| / P.
inline double pressure_evolution_residual(const RadialField& pr, int d, double dt = 1e-4) {
  const auto& g = pr.grid();
  if (std::abs(g.alpha - 1.0) > 1e-14 || std::abs(g.n - d) > 1e-14)
    throw DomainError("pressure_evolution_residual: requires the Sobolev case alpha = 1, n = d");
  if (!pr.positive()) throw DomainError("pressure_evolution_residual: P must be positive");
  const auto dp = derive({d, 0.0, 0.0});
  FlowOptions opt;
  opt.theta = 0.5;
  opt.flux_tolerance = std::numeric_limits<double>::infinity();
  FlowState s{0.0, pr.map([d](double x) { return std::pow(x, -static_cast<double>(d)); }), dp, 0, 0, 0.0};
  const auto next = step(s, dt, opt);
  const auto pr1 = next.v.map([d](double x) { return std::pow(x, -1.0 / d); });
  auto rhs = [d](const RadialField& q) {
    const auto lap = op_L(q);
    const auto gq = d_dot(q, q);
    RadialField r(q.grid_ptr());
    for (std::size_t k = 0; k < q.size(); ++k) r[k] = (d - 1.0) / d * (q[k] * lap[k] - d * gq[k]);
    return r;
  };
  const auto r0 = rhs(pr), r1 = rhs(pr1);
  RadialField res(pr.grid_ptr());
  for (std::size_t k = 0; k < pr.size(); ++k) res[k] = ((pr1[k] - pr[k]) / dt - 0.5 * (r0[k] + r1[k])) / pr[k];
  return interior_sup(res, 6);
}

}  // namespace ckn
