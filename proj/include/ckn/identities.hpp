#pragma once

/**
 * @brief Pointwise and integral identities behind the monotonicity of the flow
 *
 * Conventions on the weighted space: ' = d/ds, D = (alpha d_s, s^{-1} grad_w),
 * L = alpha^2 (d_s^2 + (n-1)/s d_s) + s^{-2} Lap_w. On S^{d-1}, grad and Lap
 * are the intrinsic operators; tensors use the metric diag(1, sin^2 theta).
 */

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ckn/discretization/operators.hpp"
#include "ckn/errors.hpp"
#include "ckn/params.hpp"

namespace ckn {

struct IdentityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  std::vector<std::pair<std::string, double>> term_breakdown;
};

// ---------------------------------------------------------------------------
// Test fields

/// Random real combination of the grid's spherical harmonics of degree 1..max_degree,
/// coefficients uniform in [-1, 1] scaled by amplitude / (number of terms).
inline std::vector<double> random_harmonic_sum(const SphereGrid& sphere, int max_degree, double amplitude,
                                               std::mt19937_64& rng) {
  const auto basis = sphere.harmonics(max_degree);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> out(sphere.size(), 0.0);
  const double scale = amplitude / static_cast<double>(basis.count);
  for (std::size_t k = 0; k < basis.count; ++k) {
    if (basis.degree[k] == 0) continue;
    const double c = scale * ud(rng);
    const auto row = basis.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * row[j];
  }
  return out;
}

/// Positive band-limited field 1 + (harmonic sum of degree <= max_degree) on S^2.
inline SphereField random_sphere_field(std::shared_ptr<const SphereGrid> sphere, int max_degree, std::mt19937_64& rng,
                                       double amplitude = 1.0) {
  auto h = random_harmonic_sum(*sphere, max_degree, amplitude, rng);
  // Normalise the oscillation to at most `amplitude` / 2 so that the field stays positive.
  double sup = 0.0;
  for (double x : h) sup = std::max(sup, std::abs(x));
  if (sup > 0.0)
    for (double& x : h) x *= 0.5 * amplitude / sup;
  for (double& x : h) x += 1.0;
  return SphereField(std::move(sphere), std::move(h));
}

/// Positive field on a (s, omega) grid: 1 + s^2 + s^2 Y_a + s / (1 + s^2) Y_b + Y_c with random
/// band-limited Y_a, Y_b, Y_c (degree 1..max_degree, sup 0.15). Radial grids get 1 + s^2.
inline RadialField random_pressure_field(std::shared_ptr<const RadialGrid> grid, int max_degree, std::mt19937_64& rng) {
  const auto& sph = grid->sphere;
  const auto ys = [&] {
    std::vector<std::vector<double>> out;
    if (!sph.has_calculus()) {
      out.assign(3, std::vector<double>(sph.size(), 0.0));
      return out;
    }
    for (int q = 0; q < 3; ++q) {
      auto h = random_harmonic_sum(sph, max_degree, 1.0, rng);
      double sup = 0.0;
      for (double x : h) sup = std::max(sup, std::abs(x));
      if (sup > 0.0)
        for (double& x : h) x *= 0.15 / sup;
      out.push_back(std::move(h));
    }
    return out;
  }();
  return sample<RadialGrid>(grid, [&](double z, std::size_t j) {
    const double s = std::exp(z), s2 = s * s;
    return 1.0 + s2 + s2 * ys[0][j] + s / (1.0 + s2) * ys[1][j] + ys[2][j];
  });
}

/// Positive pressure on a box: 1 + |x|^2 + 0.1 c(x) e^{-|x|^2/2} with a random cubic c
/// (monomials of degree 3, coefficients summing to 1 in absolute value).
inline BoxField random_box_pressure(std::shared_ptr<const BoxGrid> grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<std::array<int, 3>> mono;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      if (grid->d == 3 || 3 - i - j == 0) mono.push_back({i, j, 3 - i - j});
  std::vector<double> c(mono.size());
  double total = 0.0;
  for (double& x : c) total += std::abs(x = ud(rng));
  for (double& x : c) x /= total;
  BoxField out(grid);
  for (std::size_t j = 0; j < grid->size(); ++j) {
    double pw[3][4], r2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double x = k < grid->d ? grid->x(j, k) : 0.0;
      pw[k][0] = 1.0;
      for (int e = 1; e < 4; ++e) pw[k][e] = pw[k][e - 1] * x;
      r2 += pw[k][2];
    }
    double cubic = 0.0;
    for (std::size_t m = 0; m < mono.size(); ++m)
      cubic += c[m] * pw[0][mono[m][0]] * pw[1][mono[m][1]] * pw[2][mono[m][2]];
    out[j] = 1.0 + r2 + 0.1 * cubic * std::exp(-0.5 * r2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma (first): pointwise decomposition of the dissipation integrand

/// Both sides of the pointwise identity on nodes with s in [s_lo, s_hi]; residual is the sup of
/// |lhs - rhs| there, lhs / rhs the sups of each side. The breakdown lists the sups of the
/// three right-hand terms.
inline IdentityReport lemma_first_residual(const RadialField& pr, const DerivedParams& dp, double s_lo = 0.5,
                                           double s_hi = 2.0) {
  const auto& g = pr.grid();
  if (!(s_lo > 0.0) || !(s_hi >= s_lo)) throw DomainError("lemma_first_residual: need 0 < s_lo <= s_hi");
  const auto ns_line = g.line.size();
  const double guard = 4.0 * g.line.spacing();
  if (std::log(s_lo) < g.line.start() + guard || std::log(s_hi) > g.line.end() - guard)
    throw DomainError("lemma_first_residual: sample points too close to the grid boundary");
  if (std::abs(g.n - dp.n) > 1e-12 * dp.n || std::abs(g.alpha - dp.alpha) > 1e-12 * dp.alpha)
    throw DomainError("lemma_first_residual: grid (n, alpha) does not match the parameters");
  if (!pr.positive()) throw DomainError("lemma_first_residual: p must be positive");

  const double n = dp.n, a2 = dp.alpha * dp.alpha;
  const bool angular = g.sphere.has_calculus();
  const std::size_t nsph = g.sphere.size();
  RadialField zero(pr.grid_ptr());

  // Left side.
  const auto dpp = d_dot(pr, pr);
  const auto lp = op_L(pr);
  const auto lhs_f = [&] {
    const auto l_dpp = op_L(dpp);
    const auto cross = d_dot(pr, lp);
    RadialField out(pr.grid_ptr());
    for (std::size_t k = 0; k < pr.size(); ++k) out[k] = 0.5 * l_dpp[k] - cross[k] - lp[k] * lp[k] / n;
    return out;
  }();

  // Right side.
  const auto pz = d_line(pr, 1), pzz = d_line(pr, 2);
  RadialField p1(pr.grid_ptr()), p2(pr.grid_ptr()), q(pr.grid_ptr());
  for (std::size_t i = 0; i < ns_line; ++i) {
    const double s = g.s(i);
    for (std::size_t j = 0; j < nsph; ++j) {
      const std::size_t k = i * nsph + j;
      p1[k] = pz[k] / s;
      p2[k] = (pzz[k] - pz[k]) / (s * s);
      q[k] = p1[k] - pr[k] / s;
    }
  }
  const auto lap = angular ? laplace_sphere(pr) : zero;
  const auto gq2 = angular ? grad_sphere_sq(q) : zero;
  const auto gp2 = angular ? grad_sphere_sq(pr) : zero;
  const auto lap_gp2 = angular ? laplace_sphere(gp2) : zero;
  const auto gp_glap = angular ? grad_sphere_dot(pr, lap) : zero;

  IdentityReport r;
  r.name = "lemma-first";
  double t1max = 0.0, t2max = 0.0, t3max = 0.0;
  for (std::size_t i = 0; i < ns_line; ++i) {
    const double s = g.s(i);
    if (s < s_lo || s > s_hi) continue;
    for (std::size_t j = 0; j < nsph; ++j) {
      const std::size_t k = i * nsph + j;
      const double br = p2[k] - p1[k] / s - lap[k] / (a2 * (n - 1.0) * s * s);
      const double t1 = a2 * a2 * (n - 1.0) / n * br * br;
      const double t2 = 2.0 * a2 / (s * s) * gq2[k];
      const double t3 =
          (0.5 * lap_gp2[k] - gp_glap[k] - lap[k] * lap[k] / (n - 1.0) - (n - 2.0) * a2 * gp2[k]) / (s * s * s * s);
      const double rhs = t1 + t2 + t3;
      r.lhs = std::max(r.lhs, std::abs(lhs_f[k]));
      r.rhs = std::max(r.rhs, std::abs(rhs));
      r.residual = std::max(r.residual, std::abs(lhs_f[k] - rhs));
      t1max = std::max(t1max, t1);
      t2max = std::max(t2max, t2);
      t3max = std::max(t3max, std::abs(t3));
    }
  }
  r.term_breakdown = {{"radial_square", t1max}, {"mixed_square", t2max}, {"angular_bracket", t3max}};
  return r;
}

// ---------------------------------------------------------------------------
// Lemma (second): the angular bracket integrated against p^{1-n} on S^2

struct LemmaSecondCoefficients {
  double trace_free;      // in front of int ||L p - c M p||^2 p^{1-n}
  double mix;             // the c inside that norm
  double gradient_quartic;
  double felli_schneider;  // (n-2)(alpha_FS^2 - alpha^2)
};

inline LemmaSecondCoefficients lemma_second_coefficients(int d, double n, double alpha) {
  const double dd = d;
  LemmaSecondCoefficients c{};
  c.trace_free = (n - 2.0) * (dd - 1.0) / ((n - 1.0) * (dd - 2.0));
  c.mix = 3.0 * (n - 1.0) * (n - dd) / (2.0 * (n - 2.0) * (dd + 1.0));
  c.gradient_quartic = (n - dd) / (2.0 * (dd + 1.0)) *
                       ((n + 3.0) / 2.0 + 3.0 * (n - 1.0) * (n + 1.0) * (dd - 2.0) / (2.0 * (n - 2.0) * (dd + 1.0)));
  c.felli_schneider = (n - 2.0) * ((dd - 1.0) / (n - 1.0) - alpha * alpha);
  return c;
}

/// lhs, rhs of the integral identity on S^2; the breakdown holds the three right-hand
/// terms with their coefficients applied.
inline IdentityReport lemma_second_check(const SphereField& pr, double n, double alpha) {
  const auto& g = pr.grid();
  if (g.kind() != SphereGrid::Kind::GaussLegendre || g.dim() != 3)
    throw DomainError("lemma_second_check: implemented for d = 3 (S^2 grid) only");
  if (!(n > 3.0)) throw DomainError("lemma_second_check: requires n > d = 3");
  if (!pr.positive()) throw DomainError("lemma_second_check: p must be positive");
  const int d = 3;
  const auto c = lemma_second_coefficients(d, n, alpha);

  const auto df = g.derivatives(pr.values());
  const auto lap = laplace_sphere(pr);
  const auto gp2 = grad_sphere_sq(pr);
  const auto lap_gp2 = laplace_sphere(gp2);
  const auto gp_glap = grad_sphere_dot(pr, lap);
  const auto hess = covariant_hessian(pr);

  SphereField lhs_f(pr.grid_ptr()), tf(pr.grid_ptr()), quart(pr.grid_ptr()), grad(pr.grid_ptr());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double p = pr[j], w = std::pow(p, 1.0 - n), s = g.sin_theta(j), s2 = s * s;
    lhs_f[j] = (0.5 * lap_gp2[j] - gp_glap[j] - lap[j] * lap[j] / (n - 1.0) - (n - 2.0) * alpha * alpha * gp2[j]) * w;
    // Covariant components: g = diag(1, s^2); grad p (x) grad p has components p_i p_j.
    const double trace_part = lap[j] / (d - 1.0), m_trace = gp2[j] / ((d - 1.0) * p);
    const double ltt = hess.tt[j] - trace_part, ltp = hess.tp[j], lpp = hess.pp[j] - trace_part * s2;
    const double mtt = df.t[j] * df.t[j] / p - m_trace, mtp = df.t[j] * df.p[j] / p,
                 mpp = df.p[j] * df.p[j] / p - m_trace * s2;
    const double att = ltt - c.mix * mtt, atp = ltp - c.mix * mtp, app = lpp - c.mix * mpp;
    tf[j] = tensor_dot(att, atp, app, att, atp, app, s) * w;
    quart[j] = gp2[j] * gp2[j] / (p * p) * w;
    grad[j] = gp2[j] * w;
  }
  IdentityReport r;
  r.name = "lemma-second";
  r.lhs = integrate(lhs_f);
  const double t1 = c.trace_free * integrate(tf), t2 = c.gradient_quartic * integrate(quart),
               t3 = c.felli_schneider * integrate(grad);
  r.rhs = t1 + t2 + t3;
  r.residual = std::abs(r.lhs - r.rhs);
  r.term_breakdown = {{"trace_free", t1}, {"gradient_quartic", t2}, {"felli_schneider", t3}};
  return r;
}

// ---------------------------------------------------------------------------
// Bochner formula on S^2

/// Pointwise residual of 1/2 Lap|grad f|^2 = ||H_f||^2 + grad f . grad Lap f + (d-2)|grad f|^2.
/// The display without the grad f . grad Lap f term is not an identity (f = cos(theta) violates it).
inline IdentityReport bochner_residual(const SphereField& f, int d = 3) {
  const auto& g = f.grid();
  if (d != 3 || g.kind() != SphereGrid::Kind::GaussLegendre || g.dim() != 3)
    throw DomainError("bochner_residual: requires d = 3 and the S^2 grid");
  const auto gf2 = grad_sphere_sq(f);
  const auto lhs_f = laplace_sphere(gf2);
  const auto lap = laplace_sphere(f);
  const auto cross = grad_sphere_dot(f, lap);
  const auto h = covariant_hessian(f);
  IdentityReport r;
  r.name = "bochner";
  double hmax = 0.0, cmax = 0.0, rmax = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double hh = tensor_dot(h.tt[j], h.tp[j], h.pp[j], h.tt[j], h.tp[j], h.pp[j], g.sin_theta(j));
    const double ric = (d - 2.0) * gf2[j];
    const double lhs = 0.5 * lhs_f[j], rhs = hh + cross[j] + ric;
    r.lhs = std::max(r.lhs, std::abs(lhs));
    r.rhs = std::max(r.rhs, std::abs(rhs));
    r.residual = std::max(r.residual, std::abs(lhs - rhs));
    hmax = std::max(hmax, hh);
    cmax = std::max(cmax, std::abs(cross[j]));
    rmax = std::max(rmax, ric);
  }
  r.term_breakdown = {{"hessian_sq", hmax}, {"grad_dot_grad_lap", cmax}, {"ricci", rmax}};
  return r;
}

// ---------------------------------------------------------------------------
// Euclidean (Sobolev) case: the two forms of the dissipation

/// lhs = int [1/2 Lap|grad p|^2 - grad p . grad Lap p - (Lap p)^2 / d] p^{1-d} dx,
/// rhs = int Tr[H_p - (Tr H_p / d) Id]^2 p^{1-d} dx, over a box grid.
/// The breakdown holds the sup of the trace-free Hessian integrand.
inline IdentityReport sobolev_hessian_decomposition(const BoxField& pr, int d) {
  const auto& g = pr.grid();
  if (g.d != d) throw DomainError("sobolev_hessian_decomposition: grid dimension does not match d");
  if (!pr.positive()) throw DomainError("sobolev_hessian_decomposition: p must be positive");
  std::vector<BoxField> grad, hdiag;
  for (int k = 0; k < d; ++k) {
    grad.push_back(d_axis(pr, k, 1));
    hdiag.push_back(d_axis(pr, k, 2));
  }
  BoxField lap(pr.grid_ptr()), gp2(pr.grid_ptr());
  for (std::size_t j = 0; j < pr.size(); ++j)
    for (int k = 0; k < d; ++k) {
      lap[j] += hdiag[k][j];
      gp2[j] += grad[k][j] * grad[k][j];
    }
  BoxField lap_gp2(pr.grid_ptr()), gp_glap(pr.grid_ptr());
  for (int k = 0; k < d; ++k) {
    const auto a = d_axis(gp2, k, 2);
    const auto b = d_axis(lap, k, 1);
    for (std::size_t j = 0; j < pr.size(); ++j) {
      lap_gp2[j] += a[j];
      gp_glap[j] += grad[k][j] * b[j];
    }
  }
  // Trace-free Hessian norm: diagonal part plus twice the off-diagonal squares.
  BoxField tf(pr.grid_ptr());
  for (std::size_t j = 0; j < pr.size(); ++j)
    for (int k = 0; k < d; ++k) {
      const double e = hdiag[k][j] - lap[j] / d;
      tf[j] += e * e;
    }
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) {
      const auto hkl = d_axis(grad[k], l, 1);
      for (std::size_t j = 0; j < pr.size(); ++j) tf[j] += 2.0 * hkl[j] * hkl[j];
    }
  BoxField lhs_f(pr.grid_ptr()), rhs_f(pr.grid_ptr());
  double tf_sup = 0.0;
  for (std::size_t j = 0; j < pr.size(); ++j) {
    const double w = std::pow(pr[j], 1.0 - d);
    lhs_f[j] = (0.5 * lap_gp2[j] - gp_glap[j] - lap[j] * lap[j] / d) * w;
    rhs_f[j] = tf[j] * w;
    tf_sup = std::max(tf_sup, tf[j]);
  }
  IdentityReport r;
  r.name = "sobolev-hessian";
  r.lhs = integrate(lhs_f);
  r.rhs = integrate(rhs_f);
  r.residual = std::abs(r.lhs - r.rhs);
  r.term_breakdown = {{"trace_free_hessian_sup", tf_sup}};
  return r;
}

}  // namespace ckn
