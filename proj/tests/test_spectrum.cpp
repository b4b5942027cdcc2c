#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ckn/spectrum.hpp"

using Catch::Approx;
using namespace ckn;

namespace {

/// Poschl-Teller: lowest eigenvalue of H_l is l(l+d-2) + Lambda (1 - p^2/4).
double pt_lowest(int d, double p, int ell, double lambda) { return ell * (ell + d - 2.0) + lambda * (1.0 - p * p / 4.0); }

}  // namespace

TEST_CASE("banded LDL inertia matches a dense count") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const std::size_t n = 12;
  Pentadiagonal a{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (auto& v : a.d0) v = 3.0 * ud(rng);
  for (auto& v : a.d1) v = ud(rng);
  for (auto& v : a.d2) v = ud(rng);
  // Eigenvalues by bisection are consistent with the trace and with solves.
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += eigenvalue(a, k);
  double tr = 0.0;
  for (double v : a.d0) tr += v;
  CHECK(sum == Approx(tr).epsilon(1e-10));
  for (std::size_t k = 1; k < n; ++k) CHECK(eigenvalue(a, k) >= eigenvalue(a, k - 1));
  std::vector<double> x(n, 1.0), b = x;
  REQUIRE(a.solve_shifted(0.123, x));
  for (std::size_t i = 0; i < n; ++i) {
    double r = (a.d0[i] - 0.123) * x[i];
    if (i >= 1) r += a.d1[i - 1] * x[i - 1];
    if (i >= 2) r += a.d2[i - 2] * x[i - 2];
    if (i + 1 < n) r += a.d1[i] * x[i + 1];
    if (i + 2 < n) r += a.d2[i] * x[i + 2];
    CHECK(r == Approx(b[i]).epsilon(1e-10));
  }
}

TEST_CASE("lowest eigenvalue matches the Poschl-Teller value") {
  for (auto [d, p, ell, lambda] : {std::tuple{3, 4.0, 1, 2.0 / 3.0}, std::tuple{3, 4.0, 1, 1.0}, std::tuple{3, 3.0, 2, 0.7},
                                   std::tuple{2, 4.0, 1, 0.2}, std::tuple{4, 3.0, 0, 1.5}}) {
    const auto r = lowest_eigenvalue({lambda, p, d, ell});
    CHECK(std::abs(r.lowest_eigenvalue - pt_lowest(d, p, ell, lambda)) < 1e-8);
    CHECK(r.lowest_eigenvalue < r.essential_edge);
    double nrm = 0.0;
    for (double v : r.eigenfunction) nrm += v * v * (r.z[1] - r.z[0]);
    CHECK(nrm == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("l = 1 eigenvalue at and above the threshold") {
  CHECK(std::abs(lowest_eigenvalue({2.0 / 3.0, 4.0, 3, 1}).lowest_eigenvalue) < 1e-4);
  CHECK(lowest_eigenvalue({1.0, 4.0, 3, 1}).lowest_eigenvalue < 0.0);
  double prev = lowest_eigenvalue_value({1.0, 4.0, 3, 1});
  for (int ell = 2; ell <= 6; ++ell) {
    const double cur = lowest_eigenvalue_value({1.0, 4.0, 3, ell});
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("lowest l = 1 eigenvalue decreases in Lambda") {
  double prev = lowest_eigenvalue_value({0.1, 4.0, 3, 1});
  for (double lam = 0.2; lam <= 2.0; lam += 0.1) {
    const double cur = lowest_eigenvalue_value({lam, 4.0, 3, 1});
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("translation zero mode of H_0") {
  for (double lambda : {0.3, 1.0, 2.5}) {
    const double p = 3.6;
    const auto r = mode_eigenvalue({lambda, p, 3, 0}, 1);
    CHECK(std::abs(r.lowest_eigenvalue) < 1e-6);
    const Soliton sol{lambda, p, 0.0};
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < r.z.size(); ++k) {
      const double g = eval_soliton_derivative(sol, r.z[k]);
      dot += g * r.eigenfunction[k];
      n1 += g * g;
      n2 += r.eigenfunction[k] * r.eigenfunction[k];
    }
    CHECK(std::abs(dot) / std::sqrt(n1 * n2) > 0.999);
  }
}

TEST_CASE("threshold Lambda equals 4(d-1)/(p^2-4)") {
  for (auto [d, p] : {std::pair{3, 4.0}, std::pair{4, 3.0}, std::pair{2, 4.0}, std::pair{3, 3.0}, std::pair{5, 2.8}}) {
    CHECK(std::abs(threshold_lambda(d, p) / lambda_fs(d, p) - 1.0) < 1e-3);
  }
  CHECK_THROWS_AS(threshold_lambda(3, 6.0), DomainError);
}

TEST_CASE("truncation check") {
  CHECK_THROWS_AS(lowest_eigenvalue({1.0, 4.0, 3, 1, 3.0, 400}), NumericalError);
  CHECK_THROWS_AS(lowest_eigenvalue({0.0, 4.0, 3, 1}), DomainError);
}

TEST_CASE("sphere bifurcation") {
  for (auto [d, p] : {std::pair{3, 4.0}, std::pair{2, 3.0}, std::pair{4, 2.5}, std::pair{1, 7.0}}) {
    const auto r = sphere_bifurcation(d, p);
    CHECK(r.analytic == d / (p - 2.0));
    CHECK(std::abs(r.eigen_condition - r.analytic) < 1e-12 * r.analytic);
  }
  CHECK(sphere_bifurcation(3, 4.0).analytic == 1.5);
  CHECK(sphere_bifurcation(2, 3.0).analytic == 2.0);
  CHECK(sphere_bifurcation(3, 2.0 + 1e-9).analytic > 1e9);
}
