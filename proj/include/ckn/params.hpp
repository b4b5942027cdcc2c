#pragma once

/**
 * @brief Parameter space of the weighted interpolation inequality
 *
 *   int |grad w|^2 |x|^{-2a} dx >= C (int |w|^p |x|^{-bp} dx)^{2/p}
 *
 * together with the quantities derived from (d, a, b): the critical exponent
 * a_c, the exponent p, the cylinder mass Lambda, the dilation exponent alpha,
 * the effective dimension n and the instability curve b = b_fs(a).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ckn/errors.hpp"

namespace ckn {

struct CknParams {
  int d = 3;
  double a = 0.0;
  double b = 0.0;
};

enum class Region { Symmetric, Breaking, OnCurve };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Symmetric: return "Symmetric";
    case Region::Breaking: return "Breaking";
    case Region::OnCurve: return "OnCurve";
  }
  return "?";
}

struct DerivedParams {
  int d = 3;
  double a = 0.0;
  double b = 0.0;
  double a_c = 0.0;
  double p = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double n = 0.0;
  double alpha_fs = 0.0;
  double lambda_fs = 0.0;
  double b_fs_at_a = 0.0;
  Region region = Region::Symmetric;
};

/// Relative width of the band around the curve reported as OnCurve.
inline constexpr double kCurveTolerance = 1e-12;

inline double critical_a(int d) { return 0.5 * (d - 2); }

/// 2* = 2d/(d-2), infinite for d = 2.
inline double critical_exponent(int d) {
  if (d <= 2) return std::numeric_limits<double>::infinity();
  return 2.0 * d / (d - 2.0);
}

inline double b_fs(int d, double a) {
  if (d < 2) throw DomainError("b_fs: dimension must be >= 2");
  const double t = critical_a(d) - a;
  if (!(t > 0.0)) throw DomainError("b_fs: requires a < a_c");
  return d * t / (2.0 * std::sqrt(t * t + d - 1.0)) - t;
}

inline double lambda_fs(int d, double p) {
  if (d < 2) throw DomainError("lambda_fs: dimension must be >= 2");
  if (!(p > 2.0) || !(p < critical_exponent(d)))
    throw DomainError("lambda_fs: requires 2 < p < 2*");
  return 4.0 * (d - 1.0) / (p * p - 4.0);
}

namespace detail {

inline void check_admissible(const CknParams& q) {
  if (q.d < 2) throw DomainError("dimension d must be >= 2");
  if (!std::isfinite(q.a) || !std::isfinite(q.b)) throw DomainError("a and b must be finite");
  if (!(q.a < critical_a(q.d)))
    throw DomainError("a must satisfy a < a_c = (d-2)/2");
  const double gap = q.b - q.a;
  if (q.d == 2 ? !(gap > 0.0) : !(gap >= 0.0))
    throw DomainError(q.d == 2 ? "d = 2 requires a < b" : "requires a <= b");
  // b = a+1 gives p = 2 and an infinite effective dimension.
  if (!(gap < 1.0)) throw DomainError("requires b < a + 1 (p > 2)");
}

inline Region classify(double b, double curve) {
  const double diff = b - curve;
  const double band = kCurveTolerance * std::max({1.0, std::abs(b), std::abs(curve)});
  if (std::abs(diff) <= band) return Region::OnCurve;
  return diff > 0.0 ? Region::Symmetric : Region::Breaking;
}

}  // namespace detail

inline DerivedParams derive(const CknParams& q) {
  detail::check_admissible(q);
  DerivedParams r;
  r.d = q.d;
  r.a = q.a;
  r.b = q.b;
  r.a_c = critical_a(q.d);
  const double t = r.a_c - q.a;
  r.p = 2.0 * q.d / (q.d - 2.0 + 2.0 * (q.b - q.a));
  r.n = 2.0 * r.p / (r.p - 2.0);
  r.lambda = t * t;
  r.alpha = (1.0 + q.a - q.b) * t / (t + q.b);
  r.alpha_fs = std::sqrt((q.d - 1.0) / (r.n - 1.0));
  // Evaluated without the 2 < p < 2* guard: p = 2* (a = b, d >= 3) is admissible here.
  r.lambda_fs = 4.0 * (q.d - 1.0) / (r.p * r.p - 4.0);
  r.b_fs_at_a = b_fs(q.d, q.a);
  r.region = detail::classify(q.b, r.b_fs_at_a);
  return r;
}

/// Inverse of (a, b) -> (alpha, n): n = d/(1+a-b), alpha = (d/n)(a_c-a)/(a_c+b-a).
inline std::pair<double, double> to_ab(int d, double alpha, double n) {
  if (d < 2) throw DomainError("to_ab: dimension must be >= 2");
  if (!(n > 2.0) || !(alpha > 0.0)) throw DomainError("to_ab: requires n > 2 and alpha > 0");
  const double gap = 1.0 - d / n;  // b - a
  const double t = alpha * n * (critical_a(d) + gap) / d;
  const double a = critical_a(d) - t;
  const double b = a + gap;
  detail::check_admissible({d, a, b});
  return {a, b};
}

/// Parameters with prescribed cylinder mass Lambda and exponent p.
inline CknParams from_lambda_p(int d, double lambda, double p) {
  if (!(lambda > 0.0)) throw DomainError("from_lambda_p: requires Lambda > 0");
  if (!(p > 2.0) || p > critical_exponent(d)) throw DomainError("from_lambda_p: requires 2 < p <= 2*");
  const double a = critical_a(d) - std::sqrt(lambda);
  const double b = a + d / p - critical_a(d);
  CknParams q{d, a, b};
  detail::check_admissible(q);
  return q;
}

}  // namespace ckn
