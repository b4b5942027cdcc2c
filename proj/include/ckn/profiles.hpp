#pragma once

/**
 * @brief Closed-form profiles and the changes of variables linking them
 *
 *   u(s)      = (A + B s^2)^{-(n-2)/2}                      radial optimizer in s = r^alpha
 *   phi(z)    = ((2/(p L)) cosh^2((p-2)/2 sqrt(L) z))^{-1/(p-2)}   soliton, L = Lambda
 *   v*(t, s)  = t^{-n} (c + s^2 / (2(n-1) alpha^2 t^2))^{-n}  self-similar flow solution
 *
 * plus the Emden-Fowler map w(r, w) = r^{a-a_c} phi(log r, w) and the
 * dilation s = r^alpha.
 */

#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ckn/discretization/field.hpp"
#include "ckn/errors.hpp"
#include "ckn/params.hpp"

namespace ckn {

struct RadialProfile {
  double A = 1.0;
  double B = 1.0;
  double alpha = 1.0;
  double n = 3.0;
};

/// u(s) = (A + B s^2)^{-(n-2)/2}.
inline double eval_radial(const RadialProfile& u, double s) {
  if (s < 0.0) throw DomainError("eval_radial: requires s >= 0");
  return std::pow(u.A + u.B * s * s, -0.5 * (u.n - 2.0));
}

/// The same function in the original radius: w(r) = u(r^alpha).
inline double eval_radial_r(const RadialProfile& u, double r) {
  if (r < 0.0) throw DomainError("eval_radial_r: requires r >= 0");
  return eval_radial(u, std::pow(r, u.alpha));
}

/// Exact solution of -L u = u^{p-1}: A = 1, B = 1/(alpha^2 n (n-2)).
inline RadialProfile normalized_radial(const DerivedParams& dp) {
  return {1.0, 1.0 / (dp.alpha * dp.alpha * dp.n * (dp.n - 2.0)), dp.alpha, dp.n};
}

struct Soliton {
  double lambda = 1.0;
  double p = 4.0;
  double z0 = 0.0;

  /// Decay rate (p-2) sqrt(Lambda) / 2 of cosh in the profile.
  double beta() const { return 0.5 * (p - 2.0) * std::sqrt(lambda); }
  double peak() const { return std::pow(0.5 * p * lambda, 1.0 / (p - 2.0)); }
};

namespace detail {

/// log cosh x without overflow.
inline double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

}  // namespace detail

inline double eval_soliton(const Soliton& sol, double z) {
  if (!(sol.lambda > 0.0) || !(sol.p > 2.0)) throw DomainError("eval_soliton: requires Lambda > 0 and p > 2");
  const double e = 1.0 / (sol.p - 2.0);
  return std::exp(e * std::log(0.5 * sol.p * sol.lambda) - 2.0 * e * detail::log_cosh(sol.beta() * (z - sol.z0)));
}

/// phi' = -sqrt(Lambda) tanh(beta (z - z0)) phi.
inline double eval_soliton_derivative(const Soliton& sol, double z) {
  return -std::sqrt(sol.lambda) * std::tanh(sol.beta() * (z - sol.z0)) * eval_soliton(sol, z);
}

struct SelfSimilar {
  double c_star = 1.0;
  double n = 3.0;
  double alpha = 1.0;
};

/// Pressure p* = v*^{-1/n} = c t + s^2 / (2 (n-1) alpha^2 t).
inline double self_similar_pressure(const SelfSimilar& ss, double t, double s) {
  if (!(t > 0.0)) throw DomainError("self-similar solution requires t > 0");
  return ss.c_star * t + s * s / (2.0 * (ss.n - 1.0) * ss.alpha * ss.alpha * t);
}

inline double eval_self_similar(const SelfSimilar& ss, double t, double s) {
  return std::pow(self_similar_pressure(ss, t, s), -ss.n);
}

// ---------------------------------------------------------------------------
// Changes of variables

/// phi = r^{a_c - a} w at a single point.
inline double emden_fowler_value(double r, double w, double a, double a_c) {
  if (!(r > 0.0)) throw DomainError("emden_fowler: radius must be positive");
  return std::pow(r, a_c - a) * w;
}

/// w on (r, w)-grid (RadialGrid, line variable log r) -> phi on the cylinder with z = log r.
inline CylinderField emden_fowler(const RadialField& w, double a, double a_c) {
  const auto& g = w.grid();
  auto cyl = std::make_shared<const CylinderGrid>(CylinderGrid{g.line, g.sphere});
  CylinderField phi(cyl);
  const std::size_t ns = g.sphere.size();
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    const double f = std::exp((a_c - a) * g.line.node(i));
    for (std::size_t j = 0; j < ns; ++j) phi[i * ns + j] = f * w[i * ns + j];
  }
  return phi;
}

/// Inverse Emden-Fowler map onto a radial grid with measure r^{d-1} dr (n = d, alpha = 1).
inline RadialField emden_fowler_inverse(const CylinderField& phi, double a, double a_c) {
  const auto& g = phi.grid();
  auto rg = RadialGrid::from_line(g.line, g.sphere, static_cast<double>(g.dim()), 1.0);
  RadialField w(rg);
  const std::size_t ns = g.sphere.size();
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    const double f = std::exp((a - a_c) * g.line.node(i));
    for (std::size_t j = 0; j < ns; ++j) w[i * ns + j] = f * phi[i * ns + j];
  }
  return w;
}

/// u(s, w) = w(s^{1/alpha}, w): same values, log-grid scaled by alpha. The
/// result carries the weighted-space data (n, alpha).
inline RadialField dilation_change(const RadialField& w, double alpha, double n) {
  if (!(alpha > 0.0)) throw DomainError("dilation_change: requires alpha > 0");
  const auto& g = w.grid();
  LineGrid line(alpha * g.line.start(), alpha * g.line.spacing(), g.line.size());
  return RadialField(RadialGrid::from_line(std::move(line), g.sphere, n, alpha), w.data());
}

/// Inverse of dilation_change; the result lives on an (r, w) grid with n = d, alpha = 1.
inline RadialField dilation_inverse(const RadialField& u) {
  const auto& g = u.grid();
  const double alpha = g.alpha;
  LineGrid line(g.line.start() / alpha, g.line.spacing() / alpha, g.line.size());
  return RadialField(RadialGrid::from_line(std::move(line), g.sphere, static_cast<double>(g.dim()), 1.0), u.data());
}

// ---------------------------------------------------------------------------
// Radial constant

struct LineQuotient {
  double dz_sq = 0.0;    // int phi'^2 dz
  double l2_sq = 0.0;    // int phi^2 dz
  double lp_pow = 0.0;   // int phi^p dz
  double error = 0.0;    // sum of quadrature error estimates
};

/// Soliton integrals on [z0 - Z, z0 + Z], Z = 30 / sqrt(Lambda).
inline LineQuotient soliton_integrals(double lambda, double p, double z0 = 0.0) {
  using boost::math::quadrature::gauss_kronrod;
  const Soliton sol{lambda, p, z0};
  const double half = 30.0 / std::sqrt(lambda);
  LineQuotient q;
  auto run = [&](auto f) {
    double err = 0.0, total = 0.0;
    // Split at the peak: the integrand is smooth on each side.
    for (auto [lo, hi] : {std::pair{z0 - half, z0}, std::pair{z0, z0 + half}}) {
      double e = 0.0;
      total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-15, &e);
      err += e;
    }
    q.error += err;
    return total;
  };
  q.dz_sq = run([&](double z) { const double v = eval_soliton_derivative(sol, z); return v * v; });
  q.l2_sq = run([&](double z) { const double v = eval_soliton(sol, z); return v * v; });
  q.lp_pow = run([&](double z) { return std::pow(eval_soliton(sol, z), p); });
  return q;
}

/// Quotient of the z-line problem: (int phi'^2 + Lambda phi^2) / (int phi^p)^{2/p}.
inline double radial_line_quotient(double lambda, double p, double z0 = 0.0) {
  const auto q = soliton_integrals(lambda, p, z0);
  if (q.error > 1e-12) throw NumericalError("radial_constant: quadrature did not converge");
  return (q.dz_sq + lambda * q.l2_sq) / std::pow(q.lp_pow, 2.0 / p);
}

/// Best constant among functions depending on z only: line quotient times Vol(S^{d-1})^{1-2/p}.
inline double radial_constant(const DerivedParams& dp, double z0 = 0.0) {
  if (!(dp.lambda > 0.0)) throw DomainError("radial_constant: requires Lambda > 0");
  return radial_line_quotient(dp.lambda, dp.p, z0) * std::pow(sphere_volume(dp.d), 1.0 - 2.0 / dp.p);
}

// ---------------------------------------------------------------------------
// Default resolutions

/// Cylinder grid resolving the soliton to a residual well below 1e-8:
/// Z = 30/sqrt(Lambda), h = 0.0075 / max(sqrt(Lambda), beta).
inline std::shared_ptr<const CylinderGrid> soliton_grid(double lambda, double p, SphereGrid sphere) {
  const double k = std::max(std::sqrt(lambda), 0.5 * (p - 2.0) * std::sqrt(lambda));
  const double half = 30.0 / std::sqrt(lambda);
  const auto nz = static_cast<std::size_t>(std::ceil(2.0 * half * k / 0.0075)) + 1;
  return CylinderGrid::make(half, nz, std::move(sphere));
}

/// Weighted radial grid around the length scale of normalized_radial.
inline std::shared_ptr<const RadialGrid> profile_grid(const DerivedParams& dp, SphereGrid sphere, double h = 0.01) {
  const double len = dp.alpha * std::sqrt(dp.n * (dp.n - 2.0));
  const double lo = std::log(0.05 * len), hi = std::log(100.0 * len);
  const auto ns = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  return RadialGrid::make(0.05 * len, 100.0 * len, ns, std::move(sphere), dp.n, dp.alpha);
}

template <class Grid>
Field<Grid> sample_soliton(std::shared_ptr<const Grid> grid, const Soliton& sol) {
  return sample<Grid>(grid, [&](double z, std::size_t) { return eval_soliton(sol, z); });
}

inline RadialField sample_radial(std::shared_ptr<const RadialGrid> grid, const RadialProfile& u) {
  return sample<RadialGrid>(grid, [&](double z, std::size_t) { return eval_radial(u, std::exp(z)); });
}

}  // namespace ckn
