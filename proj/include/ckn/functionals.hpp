#pragma once

/**
 * @brief Quotients, the pressure functional and Euler-Lagrange residuals
 *
 * Cylinder:  (|d_z phi|^2 + |grad_w phi|^2 + Lambda |phi|^2) / |phi|_p^2, measure dz dw.
 * Weighted:  int |D u|^2 dmu / (int u^p dmu)^{2/p}, dmu = s^{n-1} ds dw.
 * Pressure:  J[v] = int v |D P|^2 dmu with P = v^{-1/n}.
 */

#include <cmath>

#include "ckn/discretization/operators.hpp"
#include "ckn/errors.hpp"
#include "ckn/params.hpp"

namespace ckn {

struct QuotientReport {
  double numerator = 0.0;
  double denominator = 0.0;  // |phi|_p^2
  double quotient = 0.0;
  double l2sq = 0.0;
  double lpsq = 0.0;
  /// alpha^{1-2/p}: weighted quotient = factor * cylinder quotient. 1 for the cylinder.
  double alpha_factor = 1.0;
};

namespace detail {

template <class Grid>
double lp_power(const Field<Grid>& f, double p) {
  return integrate(f.map([p](double x) { return std::pow(std::abs(x), p); }));
}

template <class Grid>
void check_nonzero(const Field<Grid>& f, const char* who) {
  for (double v : f.values())
    if (v != 0.0) return;
  throw DomainError(std::string(who) + ": zero field");
}

template <class Grid>
Field<Grid> product(const Field<Grid>& a, const Field<Grid>& b) {
  Field<Grid> out(a.grid_ptr());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

/// Share of the quadrature sum carried by the two end nodes of the line.
template <class Grid>
double end_share(const Field<Grid>& density) {
  const auto& g = density.grid();
  const std::size_t ns = g.sphere.size(), nl = g.line.size();
  auto row = [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ns; ++j) acc += g.sphere.weights()[j] * std::abs(density[i * ns + j]);
    return acc * g.line.weights()[i] * g.line_density(i);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < nl; ++i) total += row(i);
  return total > 0.0 ? std::max(row(0), row(nl - 1)) / total : 0.0;
}

}  // namespace detail

inline QuotientReport cylinder_quotient(const CylinderField& phi, double lambda, double p) {
  detail::check_nonzero(phi, "cylinder_quotient");
  const auto dz = d_z(phi);
  QuotientReport r;
  const double dz_sq = integrate(detail::product(dz, dz));
  const double ang = phi.grid().sphere.has_calculus() ? integrate(grad_sphere_sq(phi)) : 0.0;
  r.l2sq = integrate(detail::product(phi, phi));
  r.lpsq = std::pow(detail::lp_power(phi, p), 2.0 / p);
  r.numerator = dz_sq + ang + lambda * r.l2sq;
  r.denominator = r.lpsq;
  r.quotient = r.numerator / r.denominator;
  return r;
}

/// Largest share of either quadrature sum allowed at the truncation ends.
inline constexpr double kTailShare = 1e-6;

inline QuotientReport weighted_quotient(const RadialField& u, const DerivedParams& dp, double tail_share = kTailShare) {
  detail::check_nonzero(u, "weighted_quotient");
  const auto du = d_dot(u, u);
  const auto up = u.map([p = dp.p](double x) { return std::pow(std::abs(x), p); });
  if (detail::end_share(du) > tail_share || detail::end_share(up) > tail_share)
    throw NumericalError("weighted_quotient: field is not negligible at the truncation boundary");
  QuotientReport r;
  r.l2sq = integrate(detail::product(u, u));
  r.lpsq = std::pow(integrate(up), 2.0 / dp.p);
  r.numerator = integrate(du);
  r.denominator = r.lpsq;
  r.quotient = r.numerator / r.denominator;
  r.alpha_factor = std::pow(dp.alpha, 1.0 - 2.0 / dp.p);
  return r;
}

/// P = v^{-1/n}.
inline RadialField pressure(const RadialField& v, double n) {
  if (!v.positive()) throw DomainError("pressure: v must be strictly positive");
  return v.map([n](double x) { return std::pow(x, -1.0 / n); });
}

/// J[v] = int v |D P|^2 dmu.
inline double pressure_functional(const RadialField& v, const DerivedParams& dp) {
  const auto pr = pressure(v, dp.n);
  return integrate(detail::product(v, d_dot(pr, pr)));
}

/// -d_zz phi - Lap_w phi + Lambda phi - phi^{p-1}.
inline CylinderField el_residual_cylinder_field(const CylinderField& phi, double lambda, double p) {
  const auto dzz = d_zz(phi);
  const auto lap = phi.grid().sphere.has_calculus() ? laplace_sphere(phi) : CylinderField(phi.grid_ptr());
  CylinderField r(phi.grid_ptr());
  for (std::size_t k = 0; k < phi.size(); ++k)
    r[k] = -dzz[k] - lap[k] + lambda * phi[k] - std::pow(std::abs(phi[k]), p - 2.0) * phi[k];
  return r;
}

inline double el_residual_cylinder(const CylinderField& phi, double lambda, double p) {
  return interior_sup(el_residual_cylinder_field(phi, lambda, p));
}

/// L u + u^{p-1}: zero for solutions of -L u = u^{p-1}.
inline RadialField el_residual_weighted_field(const RadialField& u, const DerivedParams& dp) {
  const auto lu = op_L(u);
  RadialField r(u.grid_ptr());
  for (std::size_t k = 0; k < u.size(); ++k) r[k] = lu[k] + std::pow(std::abs(u[k]), dp.p - 2.0) * u[k];
  return r;
}

inline double el_residual_weighted(const RadialField& u, const DerivedParams& dp) {
  return interior_sup(el_residual_weighted_field(u, dp));
}

}  // namespace ckn
