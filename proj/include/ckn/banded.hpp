#pragma once

/// Symmetric pentadiagonal matrices: LDL^T factorisation, inertia and solves.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ckn {

/// Symmetric pentadiagonal matrix: diagonal and the two super-diagonals.
struct Pentadiagonal {
  std::vector<double> d0, d1, d2;

  std::size_t size() const { return d0.size(); }

  /// Number of eigenvalues strictly below sigma.
  std::size_t count_below(double sigma) const;

  /// Solve (A - sigma I) x = b; returns false on a zero pivot.
  bool solve_shifted(double sigma, std::vector<double>& x) const;
};

namespace detail {

/// LDL^T of a symmetric band matrix with half-bandwidth 2; the row-k
/// multipliers are l1 = L(k, k-1) and l2 = L(k, k-2).
struct BandLdl {
  std::vector<double> dg, l1, l2;
};

inline BandLdl band_ldl(const Pentadiagonal& a, double sigma) {
  const std::size_t n = a.size();
  BandLdl f{std::vector<double>(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  for (std::size_t k = 0; k < n; ++k) {
    // L(k,k-2) D(k-2) = A(k,k-2)
    if (k >= 2) f.l2[k] = a.d2[k - 2] / f.dg[k - 2];
    // L(k,k-1) D(k-1) = A(k,k-1) - L(k,k-2) D(k-2) L(k-1,k-2)
    if (k >= 1) {
      double t = a.d1[k - 1];
      if (k >= 2) t -= f.l2[k] * f.dg[k - 2] * f.l1[k - 1];
      f.l1[k] = t / f.dg[k - 1];
    }
    double dk = a.d0[k] - sigma;
    if (k >= 1) dk -= f.l1[k] * f.l1[k] * f.dg[k - 1];
    if (k >= 2) dk -= f.l2[k] * f.l2[k] * f.dg[k - 2];
    // A zero pivot is moved off zero; this shifts sigma by a negligible amount.
    if (std::abs(dk) < tiny) dk = -tiny;
    f.dg[k] = dk;
  }
  return f;
}

}  // namespace detail

inline std::size_t Pentadiagonal::count_below(double sigma) const {
  const auto f = detail::band_ldl(*this, sigma);
  return static_cast<std::size_t>(std::count_if(f.dg.begin(), f.dg.end(), [](double v) { return v < 0.0; }));
}

inline bool Pentadiagonal::solve_shifted(double sigma, std::vector<double>& x) const {
  const auto f = detail::band_ldl(*this, sigma);
  const std::size_t n = size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= 1) x[k] -= f.l1[k] * x[k - 1];
    if (k >= 2) x[k] -= f.l2[k] * x[k - 2];
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (f.dg[k] == 0.0) return false;
    x[k] /= f.dg[k];
  }
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) x[k] -= f.l1[k + 1] * x[k + 1];
    if (k + 2 < n) x[k] -= f.l2[k + 2] * x[k + 2];
  }
  return true;
}

/// Factor once, solve many times (A - sigma I must be non-singular).
class BandSolver {
 public:
  BandSolver() = default;
  BandSolver(const Pentadiagonal& a, double sigma = 0.0) : f_(detail::band_ldl(a, sigma)) {}

  /// In-place solve, x is strided.
  void solve(double* x, std::size_t stride = 1) const {
    const std::size_t n = f_.dg.size();
    auto at = [&](std::size_t k) -> double& { return x[k * stride]; };
    for (std::size_t k = 1; k < n; ++k) {
      at(k) -= f_.l1[k] * at(k - 1);
      if (k >= 2) at(k) -= f_.l2[k] * at(k - 2);
    }
    for (std::size_t k = 0; k < n; ++k) at(k) /= f_.dg[k];
    for (std::size_t k = n; k-- > 0;) {
      if (k + 1 < n) at(k) -= f_.l1[k + 1] * at(k + 1);
      if (k + 2 < n) at(k) -= f_.l2[k + 2] * at(k + 2);
    }
  }

 private:
  detail::BandLdl f_;
};

}  // namespace ckn
