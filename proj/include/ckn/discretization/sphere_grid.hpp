#pragma once

/**
 * @brief Quadrature and spectral calculus on S^{d-1}
 *
 * Three layouts share one interface:
 *  - point(d):   a single node carrying the whole measure Vol(S^{d-1});
 *                used for fields that do not depend on the angle (any d).
 *  - circle(N):  S^1 with N equispaced angles, Fourier differentiation.
 *  - gauss_legendre(Nmu, Nphi): S^2 with Gauss-Legendre nodes in cos(theta)
 *                and Nphi equispaced azimuths. No node sits on a pole.
 *
 * On S^2 a field is split into azimuthal Fourier modes; the m-th mode of a
 * band-limited field is sin(theta)^(m mod 2) times a polynomial in cos(theta),
 * which is differentiated exactly with the Lagrange differentiation matrix
 * on the Gauss-Legendre nodes.
 */

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ckn/errors.hpp"

namespace ckn {

/// Vol(S^{d-1}) = 2 pi^{d/2} / Gamma(d/2), through log-Gamma.
inline double sphere_volume(int d) {
  if (d < 1) throw DomainError("sphere_volume: d must be >= 1");
  const double half = 0.5 * d;
  return 2.0 * std::exp(half * std::log(std::numbers::pi) - std::lgamma(half));
}

/// Coordinate derivatives of a scalar field on the sphere grid.
/// Azimuthal components are zero on the circle and on the point grid.
struct SphereDerivatives {
  std::vector<double> t, tt, p, pp, tp;
};

/// Real orthonormal eigenfunctions of the Laplace-Beltrami operator
/// (w.r.t. the grid quadrature), stored row-major: values[k * nodes + j].
struct HarmonicBasis {
  std::size_t count = 0;
  std::size_t nodes = 0;
  std::vector<double> values;
  std::vector<int> degree;
  std::vector<int> order;          // signed azimuthal index: +m cosine, -m sine
  std::vector<double> eigenvalue;  // l(l+d-2), eigenvalue of -Laplacian

  std::span<const double> row(std::size_t k) const { return {values.data() + k * nodes, nodes}; }
};

class SphereGrid {
 public:
  enum class Kind { Point, Circle, GaussLegendre };

  SphereGrid() = default;

  static SphereGrid point(int d) {
    SphereGrid g;
    g.kind_ = Kind::Point;
    g.d_ = d;
    g.weights_ = {sphere_volume(d)};
    g.theta_ = {0.5 * std::numbers::pi};
    g.phi_ = {0.0};
    g.n_theta_ = 1;
    g.n_phi_ = 1;
    return g;
  }

  static SphereGrid circle(std::size_t n_theta) {
    if (n_theta < 4) throw DomainError("SphereGrid::circle: at least 4 nodes are required");
    SphereGrid g;
    g.kind_ = Kind::Circle;
    g.d_ = 2;
    g.n_theta_ = 1;
    g.n_phi_ = n_theta;
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
    for (std::size_t k = 0; k < n_theta; ++k) {
      g.theta_.push_back(h * static_cast<double>(k));
      g.phi_.push_back(0.0);
      g.weights_.push_back(h);
    }
    g.build_fourier();
    return g;
  }

  static SphereGrid gauss_legendre(std::size_t n_mu, std::size_t n_phi) {
    if (n_mu < 2 || n_phi < 4) throw DomainError("SphereGrid::gauss_legendre: grid too small");
    SphereGrid g;
    g.kind_ = Kind::GaussLegendre;
    g.d_ = 3;
    g.n_theta_ = n_mu;
    g.n_phi_ = n_phi;
    g.build_legendre();
    g.build_fourier();
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
    for (std::size_t i = 0; i < n_mu; ++i) {
      for (std::size_t k = 0; k < n_phi; ++k) {
        g.theta_.push_back(std::acos(g.mu_[i]));
        g.phi_.push_back(h * static_cast<double>(k));
        g.weights_.push_back(g.mu_weight_[i] * h);
      }
    }
    return g;
  }

  Kind kind() const { return kind_; }
  /// Ambient dimension d of S^{d-1}.
  int dim() const { return d_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double theta(std::size_t j) const { return theta_[j]; }
  double phi(std::size_t j) const { return phi_[j]; }
  std::size_t n_theta() const { return n_theta_; }
  std::size_t n_phi() const { return n_phi_; }

  /// Highest polynomial degree integrated exactly.
  int exact_degree() const {
    switch (kind_) {
      case Kind::Point: return 0;
      case Kind::Circle: return static_cast<int>(n_phi_) - 1;
      case Kind::GaussLegendre:
        return static_cast<int>(std::min(2 * n_theta_ - 1, n_phi_ - 1));
    }
    return 0;
  }

  std::string descriptor() const {
    switch (kind_) {
      case Kind::Point: return "point:" + std::to_string(d_);
      case Kind::Circle: return "circle:" + std::to_string(n_phi_);
      case Kind::GaussLegendre: return "gl:" + std::to_string(n_theta_) + "x" + std::to_string(n_phi_);
    }
    return "?";
  }

  bool has_calculus() const { return kind_ != Kind::Point; }

  double integrate(std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) acc += weights_[j] * f[j];
    return acc;
  }

  double sin_theta(std::size_t j) const { return kind_ == Kind::GaussLegendre ? std::sin(theta_[j]) : 1.0; }
  double cos_theta(std::size_t j) const { return kind_ == Kind::GaussLegendre ? std::cos(theta_[j]) : 0.0; }

  SphereDerivatives derivatives(std::span<const double> f) const {
    SphereDerivatives out;
    const std::size_t n = size();
    out.t.assign(n, 0.0);
    out.tt.assign(n, 0.0);
    out.p.assign(n, 0.0);
    out.pp.assign(n, 0.0);
    out.tp.assign(n, 0.0);
    if (kind_ == Kind::Circle) {
      circle_derivatives(f, out);
    } else if (kind_ == Kind::GaussLegendre) {
      sphere_derivatives(f, out);
    }
    return out;
  }

  std::vector<double> laplacian(std::span<const double> f) const { return laplacian(derivatives(f)); }

  std::vector<double> laplacian(const SphereDerivatives& df) const {
    std::vector<double> out(size(), 0.0);
    if (kind_ == Kind::Circle) {
      out = df.tt;
    } else if (kind_ == Kind::GaussLegendre) {
      for (std::size_t j = 0; j < size(); ++j) {
        const double s = sin_theta(j);
        out[j] = df.tt[j] + cos_theta(j) / s * df.t[j] + df.pp[j] / (s * s);
      }
    }
    return out;
  }

  /// Metric inner product of two gradients, given their derivatives.
  double gradient_dot(const SphereDerivatives& a, const SphereDerivatives& b, std::size_t j) const {
    if (kind_ == Kind::GaussLegendre) {
      const double s = sin_theta(j);
      return a.t[j] * b.t[j] + a.p[j] * b.p[j] / (s * s);
    }
    return a.t[j] * b.t[j];
  }

  std::vector<double> grad_sq(std::span<const double> f) const {
    const auto df = derivatives(f);
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[j] = gradient_dot(df, df, j);
    return out;
  }

  HarmonicBasis harmonics(int max_degree) const;

 private:
  void build_legendre();
  void build_fourier();
  void circle_derivatives(std::span<const double> f, SphereDerivatives& out) const;
  void sphere_derivatives(std::span<const double> f, SphereDerivatives& out) const;

  Kind kind_ = Kind::Point;
  int d_ = 3;
  std::size_t n_theta_ = 1;
  std::size_t n_phi_ = 1;
  std::vector<double> weights_;
  std::vector<double> theta_;
  std::vector<double> phi_;

  // Gauss-Legendre data in mu = cos(theta), ascending.
  std::vector<double> mu_;
  std::vector<double> mu_weight_;
  std::vector<double> dmu_;   // n x n first-derivative matrix
  std::vector<double> dmu2_;  // n x n second-derivative matrix

  // Real DFT tables: cos_[m * N + k], sin_[m * N + k] for m = 0..N/2.
  std::vector<double> cos_;
  std::vector<double> sin_;
};

inline void SphereGrid::build_legendre() {
  const std::size_t n = n_theta_;
  mu_.resize(n);
  mu_weight_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Newton from the Chebyshev-like initial guess; nodes come out descending.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    mu_[n - 1 - i] = x;
    mu_weight_[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Barycentric weights of Gauss-Legendre nodes: (-1)^i sqrt((1 - x_i^2) w_i).
  std::vector<double> bary(n);
  for (std::size_t i = 0; i < n; ++i) {
    bary[i] = ((i % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - mu_[i] * mu_[i]) * mu_weight_[i]);
  }
  dmu_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = bary[j] / bary[i] / (mu_[i] - mu_[j]);
      dmu_[i * n + j] = v;
      diag -= v;
    }
    dmu_[i * n + i] = diag;
  }
  dmu2_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double a = dmu_[i * n + k];
      for (std::size_t j = 0; j < n; ++j) dmu2_[i * n + j] += a * dmu_[k * n + j];
    }
}

inline void SphereGrid::build_fourier() {
  const std::size_t n = n_phi_;
  const std::size_t modes = n / 2 + 1;
  cos_.resize(modes * n);
  sin_.resize(modes * n);
  for (std::size_t m = 0; m < modes; ++m)
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(m * k % n) / static_cast<double>(n);
      cos_[m * n + k] = std::cos(arg);
      sin_[m * n + k] = std::sin(arg);
    }
}

namespace detail {

/// Real Fourier coefficients of one periodic row; a[m], b[m] for m = 0..N/2.
/// The Nyquist mode (even N) is kept in a[N/2] with weight 1/N.
inline void real_dft(const double* f, std::size_t n, const std::vector<double>& cs, const std::vector<double>& sn,
                     std::vector<double>& a, std::vector<double>& b) {
  const std::size_t modes = n / 2 + 1;
  a.assign(modes, 0.0);
  b.assign(modes, 0.0);
  for (std::size_t m = 0; m < modes; ++m) {
    double ac = 0.0, bc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      ac += f[k] * cs[m * n + k];
      bc += f[k] * sn[m * n + k];
    }
    const bool edge = (m == 0) || (2 * m == n);
    a[m] = ac * (edge ? 1.0 : 2.0) / static_cast<double>(n);
    b[m] = edge ? 0.0 : bc * 2.0 / static_cast<double>(n);
  }
}

}  // namespace detail

inline void SphereGrid::circle_derivatives(std::span<const double> f, SphereDerivatives& out) const {
  const std::size_t n = n_phi_;
  std::vector<double> a, b;
  detail::real_dft(f.data(), n, cos_, sin_, a, b);
  for (std::size_t k = 0; k < n; ++k) {
    double t = 0.0, tt = 0.0;
    for (std::size_t m = 1; m < a.size(); ++m) {
      const double md = static_cast<double>(m);
      const double c = cos_[m * n + k], s = sin_[m * n + k];
      if (2 * m != n) t += md * (-a[m] * s + b[m] * c);
      tt -= md * md * (a[m] * c + b[m] * s);
    }
    out.t[k] = t;
    out.tt[k] = tt;
  }
}

inline void SphereGrid::sphere_derivatives(std::span<const double> f, SphereDerivatives& out) const {
  const std::size_t nm = n_theta_;
  const std::size_t np = n_phi_;
  const std::size_t modes = np / 2 + 1;
  // coef[(m * 2 + kind) * nm + i]: kind 0 cosine, 1 sine.
  std::vector<double> coef(modes * 2 * nm, 0.0);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < nm; ++i) {
    detail::real_dft(f.data() + i * np, np, cos_, sin_, a, b);
    for (std::size_t m = 0; m < modes; ++m) {
      coef[(m * 2 + 0) * nm + i] = a[m];
      coef[(m * 2 + 1) * nm + i] = b[m];
    }
  }
  std::vector<double> ct(coef.size(), 0.0), ctt(coef.size(), 0.0);
  std::vector<double> g(nm), g1(nm), g2(nm);
  for (std::size_t m = 0; m < modes; ++m) {
    const bool odd = (m % 2) == 1;
    for (int kind = 0; kind < 2; ++kind) {
      const double* c = coef.data() + (m * 2 + kind) * nm;
      for (std::size_t i = 0; i < nm; ++i) {
        const double s = std::sqrt(1.0 - mu_[i] * mu_[i]);
        g[i] = odd ? c[i] / s : c[i];
      }
      for (std::size_t i = 0; i < nm; ++i) {
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t j = 0; j < nm; ++j) {
          d1 += dmu_[i * nm + j] * g[j];
          d2 += dmu2_[i * nm + j] * g[j];
        }
        g1[i] = d1;
        g2[i] = d2;
      }
      double* ot = ct.data() + (m * 2 + kind) * nm;
      double* ott = ctt.data() + (m * 2 + kind) * nm;
      for (std::size_t i = 0; i < nm; ++i) {
        const double cth = mu_[i];
        const double s = std::sqrt(1.0 - cth * cth);
        if (odd) {
          ot[i] = cth * g[i] - s * s * g1[i];
          ott[i] = -s * g[i] - 3.0 * s * cth * g1[i] + s * s * s * g2[i];
        } else {
          ot[i] = -s * g1[i];
          ott[i] = -cth * g1[i] + s * s * g2[i];
        }
      }
    }
  }
  for (std::size_t i = 0; i < nm; ++i) {
    for (std::size_t k = 0; k < np; ++k) {
      double t = 0.0, tt = 0.0, p = 0.0, pp = 0.0, tp = 0.0;
      for (std::size_t m = 0; m < modes; ++m) {
        const double md = static_cast<double>(m);
        const double c = cos_[m * np + k], s = sin_[m * np + k];
        const double A = coef[(m * 2) * nm + i], B = coef[(m * 2 + 1) * nm + i];
        const double At = ct[(m * 2) * nm + i], Bt = ct[(m * 2 + 1) * nm + i];
        const double Att = ctt[(m * 2) * nm + i], Btt = ctt[(m * 2 + 1) * nm + i];
        t += At * c + Bt * s;
        tt += Att * c + Btt * s;
        pp -= md * md * (A * c + B * s);
        if (2 * m != np) {
          p += md * (-A * s + B * c);
          tp += md * (-At * s + Bt * c);
        }
      }
      const std::size_t j = i * np + k;
      out.t[j] = t;
      out.tt[j] = tt;
      out.p[j] = p;
      out.pp[j] = pp;
      out.tp[j] = tp;
    }
  }
}

inline HarmonicBasis SphereGrid::harmonics(int max_degree) const {
  HarmonicBasis hb;
  hb.nodes = size();
  auto push = [&hb](int l, int m, double eig, const std::vector<double>& v) {
    hb.values.insert(hb.values.end(), v.begin(), v.end());
    hb.degree.push_back(l);
    hb.order.push_back(m);
    hb.eigenvalue.push_back(eig);
    ++hb.count;
  };
  const std::size_t n = size();
  if (kind_ == Kind::Point || max_degree <= 0) {
    push(0, 0, 0.0, std::vector<double>(n, 1.0 / std::sqrt(sphere_volume(d_))));
    if (kind_ == Kind::Point) return hb;
  }
  if (kind_ == Kind::Circle) {
    if (max_degree > 0) push(0, 0, 0.0, std::vector<double>(n, 1.0 / std::sqrt(2.0 * std::numbers::pi)));
    const int top = std::min<int>(max_degree, static_cast<int>((n_phi_ - 1) / 2));
    std::vector<double> v(n);
    for (int m = 1; m <= top; ++m) {
      for (std::size_t k = 0; k < n; ++k) v[k] = std::cos(m * theta_[k]) / std::sqrt(std::numbers::pi);
      push(m, m, double(m) * m, v);
      for (std::size_t k = 0; k < n; ++k) v[k] = std::sin(m * theta_[k]) / std::sqrt(std::numbers::pi);
      push(m, -m, double(m) * m, v);
    }
    return hb;
  }
  if (max_degree <= 0) return hb;
  if (static_cast<std::size_t>(max_degree) >= n_theta_ || 2 * static_cast<std::size_t>(max_degree) >= n_phi_)
    throw DomainError("SphereGrid::harmonics: degree not resolved by the grid");
  // Fully normalised associated Legendre functions by the standard recurrences.
  const int L = max_degree;
  std::vector<double> pbar((L + 1) * (L + 1));
  std::vector<std::vector<double>> cols(static_cast<std::size_t>((L + 1) * (L + 1)), std::vector<double>(n_theta_));
  auto idx = [L](int l, int m) { return static_cast<std::size_t>(l * (L + 1) + m); };
  for (std::size_t i = 0; i < n_theta_; ++i) {
    const double x = mu_[i];
    const double s = std::sqrt(1.0 - x * x);
    pbar[idx(0, 0)] = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int m = 1; m <= L; ++m)
      pbar[idx(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pbar[idx(m - 1, m - 1)];
    for (int m = 0; m < L; ++m) pbar[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pbar[idx(m, m)];
    for (int m = 0; m <= L; ++m)
      for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1.0));
        pbar[idx(l, m)] = a * (x * pbar[idx(l - 1, m)] - b * pbar[idx(l - 2, m)]);
      }
    for (int l = 0; l <= L; ++l)
      for (int m = 0; m <= l; ++m) cols[idx(l, m)][i] = pbar[idx(l, m)];
  }
  std::vector<double> v(n);
  for (int l = 0; l <= L; ++l) {
    const double eig = double(l) * (l + 1);
    for (std::size_t j = 0; j < n; ++j) v[j] = cols[idx(l, 0)][j / n_phi_];
    push(l, 0, eig, v);
    for (int m = 1; m <= l; ++m) {
      for (std::size_t j = 0; j < n; ++j)
        v[j] = std::sqrt(2.0) * cols[idx(l, m)][j / n_phi_] * std::cos(m * phi_[j]);
      push(l, m, eig, v);
      for (std::size_t j = 0; j < n; ++j)
        v[j] = std::sqrt(2.0) * cols[idx(l, m)][j / n_phi_] * std::sin(m * phi_[j]);
      push(l, -m, eig, v);
    }
  }
  return hb;
}

}  // namespace ckn
