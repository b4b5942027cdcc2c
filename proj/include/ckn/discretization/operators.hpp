#pragma once

/**
 * @brief Differential operators and quadrature on the discretised domains
 *
 * Line derivatives are fourth order (centred interior, one-sided near the
 * ends); angular derivatives are spectral. On a RadialGrid the line variable
 * is zeta = log s, so u_s = e^{-zeta} u_zeta and
 *
 *   L u = alpha^2 (u_ss + (n-1) u_s / s) + s^{-2} Lap_w u
 *       = e^{-2 zeta} (alpha^2 (u_zz + (n-2) u_z) + Lap_w u).
 */

#include <cmath>
#include <cstddef>
#include <vector>

#include "ckn/discretization/field.hpp"

namespace ckn {

template <class Grid>
concept ProductGrid = requires(const Grid& g) {
  g.line;
  g.sphere;
};

/// Derivative of order 1 or 2 along the line coordinate (z or log s).
template <ProductGrid Grid>
Field<Grid> d_line(const Field<Grid>& f, int order) {
  const auto& g = f.grid();
  Field<Grid> out(f.grid_ptr());
  const std::size_t ns = g.sphere.size();
  for (std::size_t j = 0; j < ns; ++j)
    g.line.differentiate(order, f.values().data() + j, ns, out.values().data() + j, ns);
  return out;
}

inline CylinderField d_z(const CylinderField& f) { return d_line(f, 1); }
inline CylinderField d_zz(const CylinderField& f) { return d_line(f, 2); }

/// Apply a per-slice sphere operation to every line node.
template <ProductGrid Grid, class Op>
Field<Grid> per_slice(const Field<Grid>& f, Op op) {
  const auto& g = f.grid();
  Field<Grid> out(f.grid_ptr());
  const std::size_t ns = g.sphere.size();
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    std::span<const double> slice(f.values().data() + i * ns, ns);
    const std::vector<double> r = op(slice);
    std::copy(r.begin(), r.end(), out.values().begin() + static_cast<std::ptrdiff_t>(i * ns));
  }
  return out;
}

template <ProductGrid Grid>
Field<Grid> laplace_sphere(const Field<Grid>& f) {
  return per_slice(f, [&](std::span<const double> s) { return f.grid().sphere.laplacian(s); });
}

template <ProductGrid Grid>
Field<Grid> grad_sphere_sq(const Field<Grid>& f) {
  return per_slice(f, [&](std::span<const double> s) { return f.grid().sphere.grad_sq(s); });
}

/// Angular gradient inner product <grad_w f, grad_w g> slice by slice.
template <ProductGrid Grid>
Field<Grid> grad_sphere_dot(const Field<Grid>& f, const Field<Grid>& h) {
  const auto& g = f.grid();
  Field<Grid> out(f.grid_ptr());
  const std::size_t ns = g.sphere.size();
  if (!g.sphere.has_calculus()) return out;
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    const auto a = g.sphere.derivatives({f.values().data() + i * ns, ns});
    const auto b = g.sphere.derivatives({h.values().data() + i * ns, ns});
    for (std::size_t j = 0; j < ns; ++j) out[i * ns + j] = g.sphere.gradient_dot(a, b, j);
  }
  return out;
}

inline SphereField laplace_sphere(const SphereField& f) {
  return SphereField(f.grid_ptr(), f.grid().laplacian(f.values()));
}

inline SphereField grad_sphere_sq(const SphereField& f) {
  return SphereField(f.grid_ptr(), f.grid().grad_sq(f.values()));
}

inline SphereField grad_sphere_dot(const SphereField& f, const SphereField& h) {
  const auto& g = f.grid();
  const auto a = g.derivatives(f.values());
  const auto b = g.derivatives(h.values());
  SphereField out(f.grid_ptr());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = g.gradient_dot(a, b, j);
  return out;
}

/// Covariant Hessian on S^2 in coordinates (theta, phi), metric diag(1, sin^2).
struct SphereHessian {
  std::vector<double> tt, tp, pp;
};

inline SphereHessian covariant_hessian(const SphereField& f) {
  const auto& g = f.grid();
  if (g.kind() != SphereGrid::Kind::GaussLegendre) throw DomainError("covariant_hessian: requires the S^2 grid (d = 3)");
  const auto df = g.derivatives(f.values());
  SphereHessian h;
  h.tt.resize(g.size());
  h.tp.resize(g.size());
  h.pp.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = g.sin_theta(j), c = g.cos_theta(j);
    h.tt[j] = df.tt[j];
    h.tp[j] = df.tp[j] - c / s * df.p[j];
    h.pp[j] = df.pp[j] + s * c * df.t[j];
  }
  return h;
}

/// Full contraction A:B of two symmetric covariant 2-tensors on S^2.
inline double tensor_dot(double att, double atp, double app, double btt, double btp, double bpp, double sin_theta) {
  const double s2 = sin_theta * sin_theta;
  return att * btt + 2.0 * atp * btp / s2 + app * bpp / (s2 * s2);
}

/// L u on the weighted half-line grid.
inline RadialField op_L(const RadialField& u) {
  const auto& g = u.grid();
  const auto uz = d_line(u, 1);
  const auto uzz = d_line(u, 2);
  const auto lap = g.sphere.has_calculus() ? laplace_sphere(u) : RadialField(u.grid_ptr());
  RadialField out(u.grid_ptr());
  const std::size_t ns = g.sphere.size();
  const double a2 = g.alpha * g.alpha;
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    const double e = g.angular_factor(i);
    for (std::size_t j = 0; j < ns; ++j) {
      const std::size_t k = i * ns + j;
      out[k] = e * (a2 * (uzz[k] + (g.n - 2.0) * uz[k]) + lap[k]);
    }
  }
  return out;
}

/// D u . D w = alpha^2 u_s w_s + <grad_w u, grad_w w> / s^2.
inline RadialField d_dot(const RadialField& u, const RadialField& w) {
  const auto& g = u.grid();
  const auto uz = d_line(u, 1);
  const auto wz = d_line(w, 1);
  const auto ang = grad_sphere_dot(u, w);
  RadialField out(u.grid_ptr());
  const std::size_t ns = g.sphere.size();
  const double a2 = g.alpha * g.alpha;
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    const double e = g.angular_factor(i);
    for (std::size_t j = 0; j < ns; ++j) {
      const std::size_t k = i * ns + j;
      out[k] = e * (a2 * uz[k] * wz[k] + ang[k]);
    }
  }
  return out;
}

template <ProductGrid Grid>
double integrate(const Field<Grid>& f) {
  const auto& g = f.grid();
  const auto wl = g.line.weights();
  const auto ws = g.sphere.weights();
  const std::size_t ns = ws.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ns; ++j) row += ws[j] * f[i * ns + j];
    acc += wl[i] * g.line_density(i) * row;
  }
  return acc;
}

inline double integrate(const SphereField& f) { return f.grid().integrate(f.values()); }

inline double integrate(const BoxField& f) {
  const auto& g = f.grid();
  const auto w = g.axis.weights();
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    double wj = 1.0;
    for (int k = 0; k < g.d; ++k) wj *= w[g.coord_index(j, k)];
    acc += wj * f[j];
  }
  return acc;
}

/// Partial derivative of order 1 or 2 along axis k of a box field.
inline BoxField d_axis(const BoxField& f, int k, int order) {
  const auto& g = f.grid();
  BoxField out(f.grid_ptr());
  const std::size_t n = g.axis.size();
  const std::size_t stride = g.stride(k);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g.coord_index(j, k) != 0) continue;
    g.axis.differentiate(order, f.values().data() + j, stride, out.values().data() + j, stride);
  }
  (void)n;
  return out;
}

/// Sup of |f| over line nodes at distance >= `skip` from both ends.
template <ProductGrid Grid>
double interior_sup(const Field<Grid>& f, std::size_t skip = 3) {
  const auto& g = f.grid();
  const std::size_t ns = g.sphere.size();
  double m = 0.0;
  for (std::size_t i = skip; i + skip < g.line.size(); ++i)
    for (std::size_t j = 0; j < ns; ++j) m = std::max(m, std::abs(f[i * ns + j]));
  return m;
}

}  // namespace ckn
