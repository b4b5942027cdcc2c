#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ckn/functionals.hpp"
#include "ckn/profiles.hpp"

using Catch::Approx;
using namespace ckn;

namespace {

/// Best Sobolev constant pi d (d-2) (Gamma(d/2)/Gamma(d))^{2/d}.
double sobolev_constant(int d) {
  return std::numbers::pi * d * (d - 2.0) * std::pow(std::tgamma(0.5 * d) / std::tgamma(static_cast<double>(d)), 2.0 / d);
}

}  // namespace

TEST_CASE("eval_radial values") {
  CHECK(eval_radial({1, 1, 1, 4}, 0.0) == 1.0);
  CHECK(eval_radial({1, 1, 1, 4}, 1.0) == Approx(0.5).epsilon(1e-15));
  CHECK(eval_radial({2, 3, 1, 6}, 1.0) == Approx(0.04).epsilon(1e-15));
  CHECK_THROWS_AS(eval_radial({1, 1, 1, 4}, -1.0), DomainError);
  const RadialProfile u{1.5, 0.7, 0.6, 4.3};
  CHECK(eval_radial_r(u, 1.7) == Approx(eval_radial(u, std::pow(1.7, 0.6))).epsilon(1e-15));
}

TEST_CASE("eval_soliton values") {
  const Soliton s{1.0, 4.0, 0.0};
  CHECK(eval_soliton(s, 0.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(eval_soliton(s, 0.0) == Approx(s.peak()).epsilon(1e-15));
  for (double z : {0.3, 1.7, 9.0}) CHECK(eval_soliton(s, z) == Approx(eval_soliton(s, -z)).epsilon(1e-15));
  CHECK(eval_soliton(s, 10.0) == Approx(std::sqrt(2.0) / std::cosh(10.0)).epsilon(1e-12));
  CHECK(eval_soliton(s, 10.0) == Approx(1.284e-4).epsilon(1e-3));
  const Soliton shifted{0.7, 3.3, 1.25};
  CHECK(eval_soliton(shifted, 1.25 + 0.4) == Approx(eval_soliton({0.7, 3.3, 0.0}, 0.4)).epsilon(1e-15));
  // Far tail does not underflow to NaN.
  CHECK(std::isfinite(eval_soliton({1.0, 40.0, 0.0}, 1e3)));
}

TEST_CASE("soliton derivative matches a difference quotient") {
  const Soliton s{0.8, 3.5, 0.3};
  for (double z : {-2.0, 0.0, 0.7, 3.0}) {
    const double h = 1e-5;
    const double fd = (eval_soliton(s, z + h) - eval_soliton(s, z - h)) / (2 * h);
    CHECK(eval_soliton_derivative(s, z) == Approx(fd).epsilon(1e-8).margin(1e-12));
  }
}

TEST_CASE("self-similar solution") {
  const SelfSimilar ss{1.0, 3.0, 1.0};
  CHECK(eval_self_similar(ss, 1.0, 0.0) == 1.0);
  CHECK(eval_self_similar(ss, 1.0, 2.0) == Approx(0.125).epsilon(1e-15));
  const SelfSimilar g{0.4, 4.7, 0.8};
  for (double t : {0.5, 2.0})
    for (double s : {0.0, 0.3, 4.0})
      CHECK(eval_self_similar(g, t, s) == Approx(std::pow(t, -g.n) * eval_self_similar(g, 1.0, s / t)).epsilon(1e-13));
  CHECK_THROWS_AS(eval_self_similar(ss, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(eval_self_similar(ss, -1.0, 1.0), DomainError);
}

TEST_CASE("Emden-Fowler transform") {
  const double a_c = 0.5, a = a_c - 1.0;
  auto g = RadialGrid::make(0.1, 10.0, 41, SphereGrid::point(3), 3.0, 1.0);
  auto w = sample<RadialGrid>(g, [](double z, std::size_t) { return std::exp(-z); });
  const auto phi = emden_fowler(w, a, a_c);
  for (double v : phi.values()) CHECK(v == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(emden_fowler_value(0.0, 1.0, a, a_c), DomainError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.1, 2.0);
  auto g2 = RadialGrid::make(0.2, 5.0, 33, SphereGrid::gauss_legendre(4, 8), 3.0, 1.0);
  RadialField r(g2);
  for (auto& v : r.data()) v = ud(rng);
  const auto back = emden_fowler_inverse(emden_fowler(r, -0.3, 0.5), -0.3, 0.5);
  for (std::size_t k = 0; k < r.size(); ++k) CHECK(back[k] == Approx(r[k]).epsilon(1e-15));
}

TEST_CASE("Emden-Fowler image of the radial optimizer is a translated soliton") {
  for (auto [d, lambda, p] : {std::tuple{3, 1.0, 4.0}, std::tuple{2, 0.5, 3.0}, std::tuple{5, 2.0, 3.1}}) {
    const auto dp = derive(from_lambda_p(d, lambda, p));
    // Amplitude 1 and B = 1/(2 p Lambda) give phi_Lambda exactly; the shift is -log(B)/(2 alpha).
    const double B = 1.0 / (2.0 * p * lambda);
    const RadialProfile w{1.0, B, dp.alpha, dp.n};
    const Soliton sol{lambda, p, -std::log(B) / (2.0 * dp.alpha)};
    for (double z = -6.0; z <= 6.0; z += 0.25) {
      const double r = std::exp(z);
      const double phi = emden_fowler_value(r, eval_radial_r(w, r), dp.a, dp.a_c);
      CHECK(phi == Approx(eval_soliton(sol, z)).epsilon(1e-10));
    }
  }
}

TEST_CASE("dilation change") {
  auto g = RadialGrid::make(0.1, 10.0, 41, SphereGrid::point(3), 3.0, 1.0);
  auto w = sample<RadialGrid>(g, [](double z, std::size_t) { return 1.0 + std::exp(z); });
  const auto same = dilation_change(w, 1.0, 3.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(same.grid().line.node(i) == Approx(g->line.node(i)).epsilon(1e-15));
    CHECK(same[i] == w[i]);
  }
  const double alpha = 0.65;
  const RadialProfile prof{1.0, 2.0, alpha, 4.5};
  auto wr = sample<RadialGrid>(g, [&](double z, std::size_t) { return eval_radial_r(prof, std::exp(z)); });
  const auto u = dilation_change(wr, alpha, 4.5);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == Approx(eval_radial(prof, u.grid().s(i))).epsilon(1e-14));
  const auto back = dilation_inverse(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(back.grid().line.node(i) == Approx(g->line.node(i)).margin(1e-15));
    CHECK(back[i] == wr[i]);
  }
  CHECK_THROWS_AS(dilation_change(w, 0.0, 3.0), DomainError);
}

TEST_CASE("radial constant at the Sobolev point") {
  const double c = radial_constant(derive({3, 0.0, 0.0}));
  CHECK(c == Approx(5.478).epsilon(1e-3));
  CHECK(std::abs(c / sobolev_constant(3) - 1.0) < 1e-6);
  for (int d = 4; d <= 6; ++d) CHECK(std::abs(radial_constant(derive({d, 0.0, 0.0})) / sobolev_constant(d) - 1.0) < 1e-6);
}

TEST_CASE("radial line quotient scales as Lambda^{1/2 + 1/p}") {
  for (double p : {3.0, 4.0, 5.5}) {
    const double q1 = radial_line_quotient(0.7, p), q4 = radial_line_quotient(2.8, p);
    CHECK(q4 / q1 == Approx(std::pow(4.0, 0.5 + 1.0 / p)).epsilon(1e-10));
  }
}

TEST_CASE("radial constant does not depend on the translation") {
  const auto dp = derive(from_lambda_p(3, 1.0, 4.0));
  CHECK(radial_constant(dp, 3.7) == Approx(radial_constant(dp)).epsilon(1e-12));
}

TEST_CASE("soliton Euler-Lagrange residual") {
  for (auto [lambda, p] : {std::pair{1.0, 4.0}, std::pair{2.0 / 3.0, 4.0}, std::pair{0.25, 6.0}, std::pair{1.0, 3.0}}) {
    const Soliton sol{lambda, p, 0.0};
    auto g = soliton_grid(lambda, p, SphereGrid::point(3));
    REQUIRE(g->line.size() >= 2000);
    CHECK(el_residual_cylinder(sample_soliton(g, sol), lambda, p) < 1e-8);
  }
}

TEST_CASE("normalized radial profile solves -L u = u^{p-1}") {
  for (auto q : {CknParams{3, 0.0, 0.0}, CknParams{3, -0.5, -0.25}, CknParams{2, -0.4, 0.1}, CknParams{5, -1.0, -0.6}}) {
    const auto dp = derive(q);
    auto g = profile_grid(dp, SphereGrid::point(q.d));
    CHECK(el_residual_weighted(sample_radial(g, normalized_radial(dp)), dp) < 1e-8);
  }
}
