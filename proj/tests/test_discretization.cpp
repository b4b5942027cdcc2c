#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ckn/discretization/operators.hpp"
#include "ckn/discretization/snapshot.hpp"

using Catch::Approx;
using namespace ckn;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const SphereGrid> s2(std::size_t nmu = 24, std::size_t nphi = 48) {
  return std::make_shared<const SphereGrid>(SphereGrid::gauss_legendre(nmu, nphi));
}

double sup_diff(std::span<const double> a, const std::function<double(std::size_t)>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b(j)));
  return m;
}

/// Interior sup error of d/dz sin(kz) on a point-sphere cylinder of nz nodes.
double sin_error(std::size_t nz, int order) {
  auto g = CylinderGrid::make(3.0, nz, SphereGrid::point(3));
  auto f = sample<CylinderGrid>(g, [](double z, std::size_t) { return std::sin(1.3 * z); });
  const auto df = order == 1 ? d_z(f) : d_zz(f);
  double m = 0.0;
  for (std::size_t i = 0; i < nz; ++i) {
    const double z = g->line.node(i);
    const double ex = order == 1 ? 1.3 * std::cos(1.3 * z) : -1.69 * std::sin(1.3 * z);
    m = std::max(m, std::abs(df[i] - ex));
  }
  return m;
}

}  // namespace

TEST_CASE("cylinder grid nodes and total weight") {
  for (auto sphere : {SphereGrid::point(5), SphereGrid::circle(16), SphereGrid::gauss_legendre(8, 16)}) {
    const double vol = sphere_volume(sphere.dim());
    auto g = CylinderGrid::make(4.0, 101, sphere);
    CHECK(g->line.node(0) == -4.0);
    CHECK(g->line.node(100) == Approx(4.0).epsilon(1e-15));
    CHECK(integrate(CylinderField(g, std::vector<double>(g->size(), 1.0))) == Approx(8.0 * vol).epsilon(1e-12));
  }
  CHECK_THROWS_AS(CylinderGrid::make(1.0, 6, SphereGrid::point(3)), DomainError);
}

TEST_CASE("line derivatives") {
  auto g = CylinderGrid::make(2.0, 41, SphereGrid::circle(8));
  auto c = sample<CylinderGrid>(g, [](double, std::size_t) { return 3.0; });
  const auto cz = d_z(c);
  for (double v : cz.values()) CHECK(std::abs(v) < 1e-12);
  auto q = sample<CylinderGrid>(g, [](double z, std::size_t) { return z * z; });
  const auto qzz = d_zz(q);
  for (std::size_t k = 0; k < qzz.size(); ++k) CHECK(qzz[k] == Approx(2.0).epsilon(1e-10));

  for (int order : {1, 2}) {
    const double e1 = sin_error(101, order), e2 = sin_error(201, order);
    CHECK(std::log2(e1 / e2) >= 3.5);
  }
}

TEST_CASE("sphere Laplacian eigenvalues on S^2") {
  auto g = s2();
  const auto hb = g->harmonics(4);
  for (std::size_t k = 0; k < hb.count; ++k) {
    const auto y = hb.row(k);
    const auto lap = g->laplacian(y);
    const double lam = hb.eigenvalue[k];
    CHECK(sup_diff(lap, [&](std::size_t j) { return -lam * y[j]; }) < 1e-10);
  }
  const auto c = sample_sphere(g, [](double, double) { return 2.0; });
  const auto lc = laplace_sphere(c);
  for (double v : lc.values()) CHECK(std::abs(v) < 1e-10);
  const auto ct = sample_sphere(g, [](double t, double) { return std::cos(t); });
  const auto gs = grad_sphere_sq(ct);
  CHECK(sup_diff(gs.values(), [&](std::size_t j) { return std::pow(std::sin(g->theta(j)), 2); }) < 1e-10);
}

TEST_CASE("circle Laplacian on trigonometric modes") {
  auto g = std::make_shared<const SphereGrid>(SphereGrid::circle(32));
  for (int m = 0; m <= 6; ++m) {
    const auto f = sample_sphere(g, [m](double t, double) { return std::cos(m * t) + std::sin(m * t); });
    const auto lap = laplace_sphere(f);
    CHECK(sup_diff(lap.values(), [&](std::size_t j) { return -m * m * f[j]; }) < 1e-10);
  }
}

TEST_CASE("sphere quadrature exactness") {
  auto g = s2(10, 20);
  const auto hb = g->harmonics(4);
  CHECK(g->integrate(std::vector<double>(g->size(), 1.0)) == Approx(4.0 * kPi).epsilon(1e-12));
  const auto ct = sample_sphere(g, [](double t, double) { return std::cos(t); });
  CHECK(std::abs(integrate(ct)) < 1e-12);
  for (std::size_t i = 0; i < hb.count; ++i)
    for (std::size_t k = 0; k < hb.count; ++k) {
      std::vector<double> prod(g->size());
      for (std::size_t j = 0; j < g->size(); ++j) prod[j] = hb.row(i)[j] * hb.row(k)[j];
      CHECK(g->integrate(prod) == Approx(i == k ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("covariant Hessian on S^2") {
  auto g = s2();
  const auto f = sample_sphere(g, [](double t, double) { return std::cos(t); });
  const auto h = covariant_hessian(f);
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double c = std::cos(g->theta(j)), s = std::sin(g->theta(j));
    CHECK(std::abs(h.tt[j] + c) < 1e-10);
    CHECK(std::abs(h.tp[j]) < 1e-10);
    CHECK(std::abs(h.pp[j] + c * s * s) < 1e-10);
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const auto hb = g->harmonics(6);
  SphereField r(g);
  for (std::size_t k = 0; k < hb.count; ++k) {
    const double w = nd(rng);
    for (std::size_t j = 0; j < g->size(); ++j) r[j] += w * hb.row(k)[j];
  }
  const auto hr = covariant_hessian(r);
  const auto lap = laplace_sphere(r);
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double s = g->sin_theta(j);
    CHECK(std::abs(hr.tt[j] + hr.pp[j] / (s * s) - lap[j]) < 1e-10);
  }
  auto c1 = std::make_shared<const SphereGrid>(SphereGrid::circle(8));
  CHECK_THROWS_AS(covariant_hessian(SphereField(c1)), DomainError);
}

TEST_CASE("op_L on radial grids") {
  const double n = 4.5, alpha = 0.7;
  auto g = RadialGrid::make(0.5, 2.0, 201, SphereGrid::point(3), n, alpha);
  auto u = sample<RadialGrid>(g, [](double z, std::size_t) { return std::exp(2.0 * z); });
  const auto lu = op_L(u);
  for (std::size_t i = 3; i + 3 < g->line.size(); ++i) CHECK(lu[i] == Approx(2.0 * n * alpha * alpha).epsilon(1e-9));
  auto c = sample<RadialGrid>(g, [](double, std::size_t) { return 1.0; });
  const auto lcc = op_L(c);
  for (double v : lcc.values()) CHECK(std::abs(v) < 1e-8);

  auto w = sample<RadialGrid>(g, [n](double z, std::size_t) { return std::exp((1.0 - n) * z); });
  // Point sphere: the angular factor is Vol(S^2).
  CHECK(integrate(w) / (4.0 * kPi) == Approx(1.5).epsilon(1e-10));
}

TEST_CASE("op_L is self-adjoint for dmu on compactly supported fields") {
  auto sphere = SphereGrid::gauss_legendre(12, 24);
  auto g = RadialGrid::make(std::exp(-4.0), std::exp(4.0), 1601, sphere, 3.7, 0.8);
  auto bump = [](double z) { return std::exp(-z * z * 2.0); };
  auto u = sample<RadialGrid>(g, [&](double z, std::size_t j) {
    return bump(z) * (1.0 + 0.3 * std::cos(g->sphere.theta(j)));
  });
  auto w = sample<RadialGrid>(g, [&](double z, std::size_t j) {
    return bump(z - 0.4) * (1.0 + 0.5 * std::sin(g->sphere.theta(j)) * std::cos(g->sphere.phi(j)));
  });
  const auto lu = op_L(u), lw = op_L(w);
  RadialField a(g), b(g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    a[k] = lu[k] * w[k];
    b[k] = u[k] * lw[k];
  }
  const double ia = integrate(a), ib = integrate(b);
  CHECK(std::abs(ia - ib) < 1e-8 * std::max(1.0, std::abs(ia)));
}

TEST_CASE("Laplace-Beltrami is self-adjoint on S^2") {
  auto g = s2(16, 32);
  const auto f = sample_sphere(g, [](double t, double p) { return std::exp(std::cos(t)) + std::sin(t) * std::cos(p); });
  const auto h = sample_sphere(g, [](double t, double p) { return std::cos(t) * std::cos(t) * std::sin(t) * std::sin(p); });
  SphereField a(g), b(g);
  const auto lf = laplace_sphere(f), lh = laplace_sphere(h);
  for (std::size_t j = 0; j < g->size(); ++j) {
    a[j] = lf[j] * h[j];
    b[j] = f[j] * lh[j];
  }
  CHECK(std::abs(integrate(a) - integrate(b)) < 1e-8);
}

TEST_CASE("box grid integration and derivatives") {
  auto g = BoxGrid::make(3, 2.0, 41);
  BoxField f(g);
  for (std::size_t j = 0; j < g->size(); ++j) f[j] = g->x(j, 0) * g->x(j, 0) + g->x(j, 1) * g->x(j, 2);
  const auto fxx = d_axis(f, 0, 2), fy = d_axis(f, 1, 1);
  for (std::size_t j = 0; j < g->size(); ++j) {
    CHECK(fxx[j] == Approx(2.0).epsilon(1e-9));
    CHECK(fy[j] == Approx(g->x(j, 2)).margin(1e-9));
  }
  CHECK(integrate(f) == Approx(4.0 * 4.0 * 16.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(BoxGrid::make(4, 1.0, 9), DomainError);
}

TEST_CASE("snapshot round trip") {
  auto g = CylinderGrid::make(3.0, 9, SphereGrid::gauss_legendre(3, 4));
  auto f = sample<CylinderGrid>(g, [](double z, std::size_t j) { return std::exp(-z * z) + 1e-3 * static_cast<double>(j) / 3.0; });
  std::stringstream ss;
  write_snapshot(ss, to_snapshot(f, R"({"d":3})"));
  const auto s = read_snapshot(ss);
  CHECK(s.params == R"({"d":3})");
  const auto back = cylinder_from_snapshot(s);
  CHECK(back.grid().line.size() == 9);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
}
