#pragma once

/**
 * @brief Minimisation of the cylinder quotient
 *
 * The field is expanded in real spherical harmonics up to a fixed degree,
 * phi(z_i, w) = sum_k c_k(z_i) Y_k(w), so the quadratic part is block diagonal:
 *
 *   N(c) = sum_k h c_k^T (K + (l_k(l_k+d-2) + Lambda)) c_k,   K = -d_zz (5-point, zero outside),
 *   D(c) = (h sum_i sum_j w_j |phi_ij|^p)^{2/p}.
 *
 * Iteration: preconditioned gradient steps on the sphere D = 1, with the
 * quadratic form itself as preconditioner and Barzilai-Borwein step lengths;
 * a step is accepted only if it does not increase the quotient.
 */

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "ckn/banded.hpp"
#include "ckn/discretization/field.hpp"
#include "ckn/errors.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

enum class Restriction { Radial, Full };
enum class InitPreset { Soliton, SolitonY1, Gaussian };

inline const char* to_string(Restriction r) { return r == Restriction::Radial ? "Radial" : "Full"; }

inline const char* to_string(InitPreset p) {
  switch (p) {
    case InitPreset::Soliton: return "soliton";
    case InitPreset::SolitonY1: return "soliton-y1";
    case InitPreset::Gaussian: return "gaussian";
  }
  return "?";
}

inline InitPreset parse_init_preset(const std::string& s) {
  if (s == "soliton") return InitPreset::Soliton;
  if (s == "soliton-y1" || s == "soliton*y1" || s == "soliton-x-y1") return InitPreset::SolitonY1;
  if (s == "gaussian") return InitPreset::Gaussian;
  throw DomainError("unknown init preset '" + s + "' (soliton, soliton-y1, gaussian)");
}

struct MinimizeOptions {
  int max_iterations = 20000;
  int window = 50;               // convergence window (iterations)
  double rel_tol = 1e-12;        // relative quotient decrease over the window
  double grad_tol = 1e-6;        // relative gradient norm accepted when no descent step remains (quotient error ~ its square)
  int recenter_every = 100;
  int max_degree = -1;           // harmonic degree; -1 picks 5 on S^2 and 8 on S^1
  double seed_amplitude = 0.3;   // epsilon in soliton * (1 + epsilon Y_1)
};

struct MinimizeResult {
  double constant = 0.0;
  CylinderField minimizer;
  int iterations = 0;
  bool converged = false;
  Restriction restriction = Restriction::Full;
  double gradient_norm = 0.0;  // relative, in the preconditioner norm
  int max_degree = 0;
  std::vector<double> history;  // quotient after every accepted step
};

/// Default grid for minimisation: Z = 20/sqrt(Lambda), h = 0.04 / max(sqrt(Lambda), beta).
inline std::shared_ptr<const CylinderGrid> minimize_grid(const DerivedParams& dp, SphereGrid sphere) {
  const double rl = std::sqrt(dp.lambda);
  const double k = std::max(rl, 0.5 * (dp.p - 2.0) * rl);
  const double half = 20.0 / rl;
  const auto nz = static_cast<std::size_t>(std::ceil(2.0 * half * k / 0.04)) + 1;
  return CylinderGrid::make(half, nz, std::move(sphere));
}

/// Sphere grid used for Full minimisation in dimension d (2 or 3).
inline SphereGrid minimize_sphere(int d) {
  if (d == 2) return SphereGrid::circle(32);
  if (d == 3) return SphereGrid::gauss_legendre(12, 24);
  throw DomainError("full minimisation needs sphere calculus (d = 2 or 3)");
}

namespace detail {

class QuotientProblem {
 public:
  QuotientProblem(const DerivedParams& dp, std::shared_ptr<const CylinderGrid> grid, int degree)
      : dp_(dp), grid_(std::move(grid)) {
    const auto hb = grid_->sphere.harmonics(degree);
    nz_ = grid_->line.size();
    ns_ = grid_->sphere.size();
    nk_ = hb.count;
    h_ = grid_->line.spacing();
    y_.resize(static_cast<Eigen::Index>(nk_), static_cast<Eigen::Index>(ns_));
    for (std::size_t k = 0; k < nk_; ++k)
      for (std::size_t j = 0; j < ns_; ++j) y_(k, j) = hb.row(k)[j];
    w_.resize(static_cast<Eigen::Index>(ns_));
    for (std::size_t j = 0; j < ns_; ++j) w_(j) = grid_->sphere.weights()[j];
    yw_ = y_ * w_.asDiagonal();
    shift_.resize(nk_);
    for (std::size_t k = 0; k < nk_; ++k) {
      shift_[k] = hb.eigenvalue[k] + dp_.lambda;
      const auto key = static_cast<int>(std::lround(hb.eigenvalue[k] * 1e6));
      auto it = std::find(keys_.begin(), keys_.end(), key);
      if (it == keys_.end()) {
        keys_.push_back(key);
        solvers_.emplace_back(stiffness(shift_[k]));
        solver_of_.push_back(solvers_.size() - 1);
      } else {
        solver_of_.push_back(static_cast<std::size_t>(it - keys_.begin()));
      }
    }
  }

  std::size_t nz() const { return nz_; }
  std::size_t nk() const { return nk_; }
  double h() const { return h_; }

  Eigen::MatrixXd synth(const Eigen::MatrixXd& c) const { return c * y_; }
  Eigen::MatrixXd project(const Eigen::MatrixXd& f) const { return f * yw_.transpose(); }

  /// (K + shift_k) applied to every column.
  Eigen::MatrixXd apply_a(const Eigen::MatrixXd& c) const {
    Eigen::MatrixXd out(c.rows(), c.cols());
    const double s = 1.0 / (12.0 * h_ * h_);
    const auto n = static_cast<Eigen::Index>(nz_);
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      auto at = [&](Eigen::Index i) { return (i < 0 || i >= n) ? 0.0 : c(i, k); };
      for (Eigen::Index i = 0; i < n; ++i) {
        const double lap = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) * s;
        out(i, k) = -lap + shift_[static_cast<std::size_t>(k)] * c(i, k);
      }
    }
    return out;
  }

  Eigen::MatrixXd solve_a(Eigen::MatrixXd g) const {
    for (Eigen::Index k = 0; k < g.cols(); ++k) solvers_[solver_of_[static_cast<std::size_t>(k)]].solve(g.col(k).data());
    return g;
  }

  /// h * sum_ij w_j |phi_ij|^p.
  double lp_power(const Eigen::MatrixXd& phi) const {
    const double p = dp_.p;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      double col = 0.0;
      for (Eigen::Index i = 0; i < phi.rows(); ++i) col += std::pow(std::abs(phi(i, j)), p);
      acc += w_(j) * col;
    }
    return h_ * acc;
  }

  /// Energy <c, A c> (times h) and the projected nonlinearity G = P(phi |phi|^{p-2}).
  double energy(const Eigen::MatrixXd& c, const Eigen::MatrixXd& ac) const { return h_ * (c.array() * ac.array()).sum(); }

  Eigen::MatrixXd nonlinearity(const Eigen::MatrixXd& phi) const {
    const double p = dp_.p;
    Eigen::MatrixXd f = phi.unaryExpr([p](double x) { return std::pow(std::abs(x), p - 2.0) * x; });
    return project(f);
  }

  Eigen::MatrixXd mass_profile(const Eigen::MatrixXd& phi) const {
    const double p = dp_.p;
    return phi.unaryExpr([p](double x) { return std::pow(std::abs(x), p); }) * w_;
  }

 private:
  Pentadiagonal stiffness(double shift) const {
    const double s = 1.0 / (12.0 * h_ * h_);
    return {std::vector<double>(nz_, 30.0 * s + shift), std::vector<double>(nz_, -16.0 * s), std::vector<double>(nz_, s)};
  }

  DerivedParams dp_;
  std::shared_ptr<const CylinderGrid> grid_;
  std::size_t nz_ = 0, ns_ = 0, nk_ = 0;
  double h_ = 1.0;
  Eigen::MatrixXd y_, yw_;
  Eigen::VectorXd w_;
  std::vector<double> shift_;
  std::vector<int> keys_;
  std::vector<BandSolver> solvers_;
  std::vector<std::size_t> solver_of_;
};

inline int default_degree(const SphereGrid& s, Restriction r, int requested) {
  if (r == Restriction::Radial || s.kind() == SphereGrid::Kind::Point) return 0;
  if (requested >= 0) return requested;
  return s.kind() == SphereGrid::Kind::Circle ? 8 : 5;
}

}  // namespace detail

/// Initial field for a preset on the given grid.
inline CylinderField initial_field(const DerivedParams& dp, std::shared_ptr<const CylinderGrid> grid, InitPreset preset,
                                   double eps = 0.3) {
  const Soliton sol{dp.lambda, dp.p, 0.0};
  const auto& sph = grid->sphere;
  return sample<CylinderGrid>(grid, [&](double z, std::size_t j) {
    switch (preset) {
      case InitPreset::Soliton: return eval_soliton(sol, z);
      case InitPreset::SolitonY1: {
        // Y_1: cos(theta) on S^1 and S^2; no angular dependence on a point sphere.
        const double y1 = sph.kind() == SphereGrid::Kind::Point ? 0.0 : std::cos(sph.theta(j));
        return eval_soliton(sol, z) * (1.0 + eps * y1);
      }
      case InitPreset::Gaussian: return std::exp(-0.5 * dp.lambda * z * z);
    }
    return 0.0;
  });
}

inline MinimizeResult minimize_quotient(const DerivedParams& dp, std::shared_ptr<const CylinderGrid> grid,
                                        Restriction restriction, const CylinderField& init,
                                        const MinimizeOptions& opt = {}) {
  if (!(dp.lambda > 0.0)) throw DomainError("minimize: requires Lambda > 0");
  if (grid->dim() != dp.d) throw DomainError("minimize: grid dimension does not match d");
  if (restriction == Restriction::Full && grid->sphere.kind() == SphereGrid::Kind::Point && dp.d > 3)
    throw DomainError("minimize: full minimisation needs sphere calculus (d = 2 or 3)");
  const int degree = detail::default_degree(grid->sphere, restriction, opt.max_degree);
  if (degree > 0 && 2 * degree >= grid->sphere.exact_degree())
    throw DomainError("minimize: sphere grid too coarse for the harmonic degree");
  detail::QuotientProblem prob(dp, grid, degree);

  // Project the initial field onto the harmonic space.
  Eigen::MatrixXd f0(static_cast<Eigen::Index>(grid->line.size()), static_cast<Eigen::Index>(grid->sphere.size()));
  for (Eigen::Index i = 0; i < f0.rows(); ++i)
    for (Eigen::Index j = 0; j < f0.cols(); ++j) f0(i, j) = init[static_cast<std::size_t>(i * f0.cols() + j)];
  Eigen::MatrixXd c = prob.project(f0);
  if (c.norm() == 0.0) throw DomainError("minimize: initial field is zero");

  struct State {
    Eigen::MatrixXd c, ac, dir;
    double q = 0.0;
  };
  const double p = dp.p;
  auto evaluate = [&](Eigen::MatrixXd cc) {
    State s;
    const double lp = prob.lp_power(prob.synth(cc));
    cc /= std::pow(lp, 1.0 / p);  // |phi|_p = 1
    s.c = std::move(cc);
    const Eigen::MatrixXd phi = prob.synth(s.c);
    s.ac = prob.apply_a(s.c);
    s.q = prob.energy(s.c, s.ac);
    // Preconditioned gradient: c - Q A^{-1} G.
    s.dir = s.c - s.q * prob.solve_a(prob.nonlinearity(phi));
    return s;
  };
  auto a_dot = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& ay) { return (x.array() * ay.array()).sum(); };

  MinimizeResult res;
  res.restriction = restriction;
  res.max_degree = degree;
  State cur = evaluate(c);
  res.history.push_back(cur.q);
  double tau = 0.5;
  Eigen::MatrixXd prev_c, prev_dir;
  bool have_prev = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (have_prev) {
      const Eigen::MatrixXd s = cur.c - prev_c, y = cur.dir - prev_dir;
      const Eigen::MatrixXd as = prob.apply_a(s);
      const double sy = a_dot(y, as), ss = a_dot(s, as);
      if (sy > 0.0) tau = std::clamp(ss / sy, 0.02, 20.0);
    }
    bool accepted = false;
    State trial;
    double t = tau;
    for (int bt = 0; bt < 40; ++bt) {
      trial = evaluate(cur.c - t * cur.dir);
      if (trial.q <= cur.q * (1.0 + 1e-15)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no descent possible at working precision
    prev_c = cur.c;
    prev_dir = cur.dir;
    have_prev = true;
    cur = std::move(trial);
    res.history.push_back(cur.q);

    const int k = static_cast<int>(res.history.size()) - 1;
    if (k >= opt.window) {
      const double old = res.history[static_cast<std::size_t>(k - opt.window)];
      if ((old - cur.q) <= opt.rel_tol * cur.q) {
        res.converged = true;
        ++it;
        break;
      }
    }
    if (opt.recenter_every > 0 && (it + 1) % opt.recenter_every == 0) {
      // Move the median of the z-mass to the middle node.
      const Eigen::VectorXd m = prob.mass_profile(prob.synth(cur.c));
      const double total = m.sum();
      double acc = 0.0;
      Eigen::Index med = 0;
      for (; med < m.size(); ++med) {
        acc += m(med);
        if (acc >= 0.5 * total) break;
      }
      const Eigen::Index shift = med - m.size() / 2;
      if (shift != 0) {
        Eigen::MatrixXd moved = Eigen::MatrixXd::Zero(cur.c.rows(), cur.c.cols());
        for (Eigen::Index i = 0; i < moved.rows(); ++i) {
          const Eigen::Index src = i + shift;
          if (src >= 0 && src < moved.rows()) moved.row(i) = cur.c.row(src);
        }
        State shifted = evaluate(moved);
        // A shift by whole nodes leaves the discrete quotient unchanged up to the tails.
        if (shifted.q <= cur.q * (1.0 + 1e-13)) {
          cur = std::move(shifted);
          have_prev = false;
          tau = 0.5;
        }
      }
    }
  }
  res.iterations = it;
  res.constant = cur.q;
  res.gradient_norm = std::sqrt(std::max(0.0, a_dot(cur.dir, prob.apply_a(cur.dir)))) /
                      std::sqrt(a_dot(cur.c, cur.ac));
  // Stalled at working precision: stationary if the gradient is negligible.
  if (!res.converged && it < opt.max_iterations && res.gradient_norm < opt.grad_tol) res.converged = true;
  const Eigen::MatrixXd phi = prob.synth(cur.c);
  CylinderField out(grid);
  const double sign = phi.sum() < 0.0 ? -1.0 : 1.0;
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index j = 0; j < phi.cols(); ++j) out[static_cast<std::size_t>(i * phi.cols() + j)] = sign * phi(i, j);
  res.minimizer = std::move(out);
  return res;
}

inline MinimizeResult minimize_quotient(const DerivedParams& dp, std::shared_ptr<const CylinderGrid> grid,
                                        Restriction restriction, InitPreset preset, const MinimizeOptions& opt = {}) {
  return minimize_quotient(dp, grid, restriction, initial_field(dp, grid, preset, opt.seed_amplitude), opt);
}

/// Largest relative deviation over the sphere, sup_z max_w |phi - mean_w phi| / sup |phi|.
inline double angular_oscillation(const CylinderField& phi) {
  const auto& g = phi.grid();
  const std::size_t ns = g.sphere.size();
  const double vol = g.sphere.integrate(std::vector<double>(ns, 1.0));
  double peak = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < g.line.size(); ++i) {
    std::span<const double> row(phi.values().data() + i * ns, ns);
    const double mean = g.sphere.integrate(row) / vol;
    for (double v : row) {
      dev = std::max(dev, std::abs(v - mean));
      peak = std::max(peak, std::abs(v));
    }
  }
  return peak > 0.0 ? dev / peak : 0.0;
}

struct BreakingReport {
  double radial_constant = 0.0;      // minimised over z-only fields
  double radial_quadrature = 0.0;    // closed-form soliton value
  double full_constant = 0.0;
  double gap = 0.0;                  // (radial - full) / radial
  bool broken = false;
  Region region = Region::Symmetric;
  bool agrees = false;               // broken <=> region == Breaking
  bool converged = false;
};

inline constexpr double kBreakingGap = 1e-3;

inline BreakingReport detect_breaking(const DerivedParams& dp, std::shared_ptr<const CylinderGrid> grid,
                                      const MinimizeOptions& opt = {}) {
  auto radial_grid = std::make_shared<const CylinderGrid>(CylinderGrid{grid->line, SphereGrid::point(dp.d)});
  const auto rad = minimize_quotient(dp, radial_grid, Restriction::Radial, InitPreset::Soliton, opt);
  const auto full = minimize_quotient(dp, grid, Restriction::Full, InitPreset::SolitonY1, opt);
  BreakingReport r;
  r.radial_constant = rad.constant;
  r.radial_quadrature = radial_constant(dp);
  r.full_constant = full.constant;
  r.gap = (rad.constant - full.constant) / rad.constant;
  r.broken = r.gap > kBreakingGap;
  r.region = dp.region;
  r.agrees = r.broken == (dp.region == Region::Breaking);
  r.converged = rad.converged && full.converged;
  return r;
}

}  // namespace ckn
