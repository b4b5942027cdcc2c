#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>

#include "ckn/discretization/line_grid.hpp"
#include "ckn/discretization/sphere_grid.hpp"
#include "ckn/errors.hpp"

namespace ckn {

/// Truncated cylinder [-Z, Z] x S^{d-1} with measure dz dw.
struct CylinderGrid {
  LineGrid line;
  SphereGrid sphere;

  static std::shared_ptr<const CylinderGrid> make(double half_length, std::size_t nz, SphereGrid sphere) {
    return std::make_shared<const CylinderGrid>(CylinderGrid{LineGrid::symmetric(half_length, nz), std::move(sphere)});
  }

  int dim() const { return sphere.dim(); }
  double half_length() const { return line.end(); }
  std::size_t size() const { return line.size() * sphere.size(); }
  /// Density of the measure with respect to dz dw at line node i.
  double line_density(std::size_t) const { return 1.0; }
  /// Factor 1/s^2 in front of the angular derivatives; 1 on the cylinder.
  double angular_factor(std::size_t) const { return 1.0; }
};

/**
 * Half line s in [s_min, s_max] (nodes uniform in zeta = log s) times S^{d-1},
 * with measure dmu = s^{n-1} ds dw = e^{n zeta} dzeta dw. `alpha` is the
 * radial coefficient of |D u|^2 = alpha^2 u_s^2 + |grad_w u|^2 / s^2.
 */
struct RadialGrid {
  LineGrid line;  // in zeta = log s
  SphereGrid sphere;
  double n = 3.0;
  double alpha = 1.0;

  static std::shared_ptr<const RadialGrid> make(double s_min, double s_max, std::size_t ns, SphereGrid sphere,
                                                double n, double alpha) {
    if (!(s_min > 0.0) || !(s_max > s_min)) throw DomainError("RadialGrid: requires 0 < s_min < s_max");
    return std::make_shared<const RadialGrid>(
        RadialGrid{LineGrid::interval(std::log(s_min), std::log(s_max), ns), std::move(sphere), n, alpha});
  }

  static std::shared_ptr<const RadialGrid> from_line(LineGrid line, SphereGrid sphere, double n, double alpha) {
    return std::make_shared<const RadialGrid>(RadialGrid{std::move(line), std::move(sphere), n, alpha});
  }

  int dim() const { return sphere.dim(); }
  std::size_t size() const { return line.size() * sphere.size(); }
  double s(std::size_t i) const { return std::exp(line.node(i)); }
  double s_min() const { return std::exp(line.start()); }
  double s_max() const { return std::exp(line.end()); }
  double line_density(std::size_t i) const { return std::exp(n * line.node(i)); }
  double angular_factor(std::size_t i) const { return std::exp(-2.0 * line.node(i)); }
};

/// Cube [-L, L]^d in R^d (d = 2 or 3), N nodes per axis, Lebesgue measure.
struct BoxGrid {
  int d = 3;
  LineGrid axis;

  static std::shared_ptr<const BoxGrid> make(int d, double half_length, std::size_t n) {
    if (d != 2 && d != 3) throw DomainError("BoxGrid: only d = 2 and d = 3 are supported");
    return std::make_shared<const BoxGrid>(BoxGrid{d, LineGrid::symmetric(half_length, n)});
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int k = 0; k < d; ++k) s *= axis.size();
    return s;
  }
  std::size_t stride(int k) const {
    std::size_t s = 1;
    for (int j = d - 1; j > k; --j) s *= axis.size();
    return s;
  }
  /// Multi-index of flat node j (row-major, axis 0 slowest).
  std::size_t coord_index(std::size_t j, int k) const { return (j / stride(k)) % axis.size(); }
  double x(std::size_t j, int k) const { return axis.node(coord_index(j, k)); }
};

}  // namespace ckn
