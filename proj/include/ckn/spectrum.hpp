#pragma once

/**
 * @brief Second variation around the soliton, one spherical-harmonic mode at a time
 *
 *   H_l = -d_zz + Lambda + l(l+d-2) - (p-1) phi_Lambda^{p-2}
 *
 * discretised with the 5-point fourth-order stencil and homogeneous Dirichlet
 * data at z = +-Z. The matrix is symmetric pentadiagonal; eigenvalues are
 * located by bisection on the inertia of H - sigma I (LDL^T, Sylvester) and
 * eigenvectors by inverse iteration.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ckn/banded.hpp"
#include "ckn/errors.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

struct ModeOperator {
  double lambda = 1.0;
  double p = 4.0;
  int d = 3;
  int ell = 1;
  double half_length = 0.0;  // 0 selects 30/sqrt(Lambda)
  std::size_t nz = 4000;

  double shift() const { return lambda + ell * (ell + d - 2.0); }
  double z_max() const { return half_length > 0.0 ? half_length : 30.0 / std::sqrt(lambda); }
};

struct SpectrumResult {
  int ell = 0;
  double lowest_eigenvalue = 0.0;
  double essential_edge = 0.0;
  std::vector<double> z;
  std::vector<double> eigenfunction;  // unit L^2(dz) norm, positive at the maximum of |.|
  double threshold_lambda = std::numeric_limits<double>::quiet_NaN();
};

/// Discretisation of H_l on the interior nodes of [-Z, Z].
inline Pentadiagonal assemble(const ModeOperator& op, std::vector<double>* nodes = nullptr) {
  if (!(op.lambda > 0.0)) throw DomainError("spectrum: requires Lambda > 0");
  if (!(op.p > 2.0) || !(op.p < critical_exponent(op.d))) throw DomainError("spectrum: requires 2 < p < 2*");
  if (op.ell < 0) throw DomainError("spectrum: mode index must be >= 0");
  if (op.nz < 7) throw DomainError("spectrum: at least 7 nodes are required");
  const double zmax = op.z_max();
  const double h = 2.0 * zmax / (static_cast<double>(op.nz) - 1.0);
  const std::size_t m = op.nz - 2;
  const double c = 1.0 / (12.0 * h * h);
  const Soliton sol{op.lambda, op.p, 0.0};
  Pentadiagonal a{std::vector<double>(m), std::vector<double>(m, -16.0 * c), std::vector<double>(m, c)};
  if (nodes) nodes->resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double z = -zmax + h * static_cast<double>(k + 1);
    if (nodes) (*nodes)[k] = z;
    a.d0[k] = 30.0 * c + op.shift() - (op.p - 1.0) * std::pow(eval_soliton(sol, z), op.p - 2.0);
  }
  return a;
}

namespace detail {

/// Gershgorin bounds of a pentadiagonal matrix.
inline std::pair<double, double> gershgorin(const Pentadiagonal& a) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double r = 0.0;
    if (k >= 1) r += std::abs(a.d1[k - 1]);
    if (k >= 2) r += std::abs(a.d2[k - 2]);
    if (k + 1 < a.size()) r += std::abs(a.d1[k]);
    if (k + 2 < a.size()) r += std::abs(a.d2[k]);
    lo = std::min(lo, a.d0[k] - r);
    hi = std::max(hi, a.d0[k] + r);
  }
  return {lo, hi};
}

}  // namespace detail

/// k-th smallest eigenvalue (k = 0 is the lowest), bisected to `tol` absolute.
inline double eigenvalue(const Pentadiagonal& a, std::size_t k, double tol = 1e-12) {
  if (k >= a.size()) throw DomainError("eigenvalue: index out of range");
  auto [lo, hi] = detail::gershgorin(a);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (a.count_below(mid) > k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Eigenvector for an isolated eigenvalue by inverse iteration.
inline std::vector<double> eigenvector(const Pentadiagonal& a, double ev, double h) {
  const std::size_t n = a.size();
  std::vector<double> x(n, 1.0), prev;
  // Perturb the start so it is not orthogonal to odd modes.
  for (std::size_t k = 0; k < n; ++k) x[k] += 1e-3 * static_cast<double>(k) / static_cast<double>(n);
  const double sigma = ev + 1e-10 * std::max(1.0, std::abs(ev));
  for (int it = 0; it < 8; ++it) {
    if (!a.solve_shifted(sigma, x)) throw NumericalError("eigenvector: singular shifted system");
    double nrm = 0.0;
    for (double v : x) nrm += v * v * h;
    nrm = std::sqrt(nrm);
    for (double& v : x) v /= nrm;
  }
  const auto big = std::max_element(x.begin(), x.end(), [](double u, double v) { return std::abs(u) < std::abs(v); });
  if (*big < 0.0)
    for (double& v : x) v = -v;
  return x;
}

namespace detail {

inline SpectrumResult mode_result(const ModeOperator& op, std::size_t k) {
  std::vector<double> z;
  const auto a = assemble(op, &z);
  SpectrumResult r;
  r.ell = op.ell;
  r.essential_edge = op.shift();
  r.lowest_eigenvalue = eigenvalue(a, k);
  r.z = z;
  const double h = z.size() > 1 ? z[1] - z[0] : 1.0;
  r.eigenfunction = eigenvector(a, r.lowest_eigenvalue, h);
  const double peak = std::abs(*std::max_element(r.eigenfunction.begin(), r.eigenfunction.end(),
                                                 [](double u, double v) { return std::abs(u) < std::abs(v); }));
  const double tail = std::max(std::abs(r.eigenfunction.front()), std::abs(r.eigenfunction.back()));
  if (tail > 1e-8 * peak) throw NumericalError("spectrum: eigenfunction not decayed at +-Z; enlarge the domain");
  return r;
}

}  // namespace detail

inline SpectrumResult lowest_eigenvalue(const ModeOperator& op) { return detail::mode_result(op, 0); }

/// Eigenvalue of H_l with index k (0-based); used for the translation mode (l = 0, k = 1).
inline SpectrumResult mode_eigenvalue(const ModeOperator& op, std::size_t k) { return detail::mode_result(op, k); }

/// Only the lowest eigenvalue, without the eigenvector.
inline double lowest_eigenvalue_value(const ModeOperator& op) { return eigenvalue(assemble(op), 0); }

/// Lambda at which the lowest eigenvalue of H_l changes sign, bisected to `tol` relative.
inline double threshold_lambda(int d, double p, int ell = 1, std::size_t nz = 4000, double tol = 1e-6) {
  if (!(p > 2.0) || !(p < critical_exponent(d))) throw DomainError("threshold_lambda: requires 2 < p < 2*");
  auto f = [&](double lam) { return lowest_eigenvalue_value({lam, p, d, ell, 0.0, nz}); };
  double lo = 1.0, hi = 1.0;
  int tries = 0;
  if (f(1.0) > 0.0) {
    do hi *= 2.0;
    while (f(hi) > 0.0 && ++tries < 60);
    lo = 0.5 * hi;
  } else {
    do lo *= 0.5;
    while (f(lo) <= 0.0 && ++tries < 60);
    hi = 2.0 * lo;
  }
  if (tries >= 60) throw NumericalError("threshold_lambda: no sign change found in the bracket");
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SphereBifurcation {
  double analytic = 0.0;
  double eigen_condition = 0.0;
};

/// Lambda where -Lap + lambda - (p-1) lambda on S^d (linearisation of
/// -Lap u + lambda u = u^{p-1} at u = lambda^{1/(p-2)}) first acquires a
/// non-positive eigenvalue on a non-constant mode.
inline SphereBifurcation sphere_bifurcation(int d, double p, int max_degree = 16) {
  if (d < 1) throw DomainError("sphere_bifurcation: requires d >= 1");
  if (!(p > 2.0)) throw DomainError("sphere_bifurcation: requires p > 2");
  SphereBifurcation r;
  r.analytic = d / (p - 2.0);
  // Lowest non-constant eigenvalue of the linearisation at lambda, over modes 1..max_degree.
  auto mu = [&](double lam) {
    double m = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= max_degree; ++l) m = std::min(m, l * (l + d - 1.0) - (p - 2.0) * lam);
    return m;
  };
  double lo = 0.0, hi = 1.0;
  while (mu(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mu(mid) > 0.0 ? lo : hi) = mid;
  }
  r.eigen_condition = 0.5 * (lo + hi);
  return r;
}

}  // namespace ckn
