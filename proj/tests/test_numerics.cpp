// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "ghztomo/polygauss.hpp"
#include "ghztomo/quadrature.hpp"
#include "support.hpp"

using namespace ghztomo;
using polygauss::GaussPoly;
using polygauss::Poly;

TEST_CASE("Gauss-Kronrod weights and exactness") {
  double wk = quad::kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) wk += 2.0 * quad::kKronrodWeights[i];
  CHECK(wk == doctest::Approx(2.0).epsilon(1e-12));
  double wg = quad::kGaussWeights[3];
  for (int i = 0; i < 3; ++i) wg += 2.0 * quad::kGaussWeights[i];
  CHECK(wg == doctest::Approx(2.0).epsilon(1e-12));

  // degree-13 monomial integrated exactly by the embedded Gauss-7 rule
  auto r = quad::adaptive_gauss_kronrod([](double x) { return std::pow(x, 13.0); },
                                        0.0, 1.0, 1e-13);
  CHECK(r.value == doctest::Approx(1.0 / 14.0).epsilon(1e-13));
  CHECK(r.converged);
}

TEST_CASE("adaptive quadrature against known integrals") {
  auto gaussian = quad::adaptive_gauss_kronrod(
      [](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-12);
  CHECK(gaussian.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));

  // oscillatory complex integrand of the kernel type
  const double beta = 7.0;
  auto osc = quad::adaptive_gauss_kronrod(
      [&](double s) {
        return std::exp(std::complex<double>(-s * s, 2.0 * beta * s));
      },
      0.0, 8.0, 1e-12);
  // against an independent node family
  auto simpson = testsupport::simpson(
      [&](double s) {
        return std::exp(std::complex<double>(-s * s, 2.0 * beta * s));
      },
      0.0, 8.0, 4000);
  CHECK(std::abs(osc.value - simpson) < 1e-10);
  CHECK(osc.converged);
}

TEST_CASE("Gauss-Legendre rule") {
  auto rule = quad::gauss_legendre(8, 0.0, 1.0);
  double total = 0.0, x14 = 0.0;
  for (int i = 0; i < 8; ++i) {
    total += rule.weights[i];
    x14 += rule.weights[i] * std::pow(rule.nodes[i], 14.0);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(x14 == doctest::Approx(1.0 / 15.0).epsilon(1e-13));  // degree 14 < 2n
}

TEST_CASE("polynomial basics") {
  Poly a(3), b(2);
  a << 1.0, 2.0, 3.0;  // 1 + 2x + 3x^2
  b << -1.0, 1.0;      // -1 + x
  Poly c = polygauss::mul(a, b);
  CHECK(polygauss::eval(c, 2.0) ==
        doctest::Approx(polygauss::eval(a, 2.0) * polygauss::eval(b, 2.0)));
  Poly scaled = polygauss::scale_argument(a, 0.5);
  CHECK(polygauss::eval(scaled, 2.0) == doctest::Approx(polygauss::eval(a, 1.0)));
}

TEST_CASE("Gaussian moments and partial integrals") {
  const double v = 0.37;
  CHECK(polygauss::gaussian_moment(0, v) ==
        doctest::Approx(std::sqrt(2.0 * std::numbers::pi * v)).epsilon(1e-14));
  CHECK(polygauss::gaussian_moment(2, v) ==
        doctest::Approx(v * std::sqrt(2.0 * std::numbers::pi * v)).epsilon(1e-14));
  CHECK(polygauss::gaussian_moment(3, v) == 0.0);

  // partial integral agrees with quadrature for a degree-4 polynomial
  Poly p(5);
  p << 0.3, -1.0, 2.0, 0.5, 1.0;
  for (double x : {-1.2, 0.0, 0.8, 3.0}) {
    auto direct = quad::adaptive_gauss_kronrod(
        [&](double y) {
          return polygauss::eval(p, y) * std::exp(-y * y / (2.0 * v));
        },
        -40.0, x, 1e-12);
    CHECK(polygauss::lower_integral(p, v, x) ==
          doctest::Approx(direct.value).epsilon(1e-10));
  }
  CHECK(polygauss::lower_integral(p, v, 40.0) ==
        doctest::Approx(polygauss::integral(p, v)).epsilon(1e-12));
}

TEST_CASE("hermite basis polynomials") {
  CHECK(polygauss::hermite_basis(0).size() == 1);
  CHECK(polygauss::eval(polygauss::hermite_basis(1), 0.7) == doctest::Approx(1.4));
  // h_2 = (4x^2 - 1)/sqrt(2)
  CHECK(polygauss::eval(polygauss::hermite_basis(2), 0.9) ==
        doctest::Approx((4.0 * 0.81 - 1.0) / std::numbers::sqrt2).epsilon(1e-14));

  // orthonormality of phi_n under the integral
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m) {
      auto r = quad::adaptive_gauss_kronrod(
          [&](double x) {
            return polygauss::wavefunction(n, x) * polygauss::wavefunction(m, x);
          },
          -9.0, 9.0, 1e-12);
      CHECK(r.value == doctest::Approx(n == m ? 1.0 : 0.0).epsilon(1e-10));
    }

  // vacuum and one-photon quadrature distributions in the X = (a+a^dag)/2
  // convention
  CHECK(polygauss::wavefunction(0, 0.3) ==
        doctest::Approx(std::pow(2.0 / std::numbers::pi, 0.25) * std::exp(-0.09))
            .epsilon(1e-14));
  CHECK(polygauss::wavefunction(1, 0.3) ==
        doctest::Approx(std::pow(2.0 / std::numbers::pi, 0.25) * 2.0 * 0.3 *
                        std::exp(-0.09))
            .epsilon(1e-14));
}

TEST_CASE("Gaussian convolution of polynomial times Gaussian") {
  GaussPoly f;
  f.variance = 0.25;
  f.poly = Poly(3);
  f.poly << 0.2, -0.7, 1.3;

  const double sigma2 = 0.11;
  GaussPoly g = polygauss::convolve_with_gaussian(f, sigma2);
  CHECK(g.variance == doctest::Approx(0.36).epsilon(1e-14));

  // integral preserved
  CHECK(g.integral() == doctest::Approx(f.integral()).epsilon(1e-12));

  // pointwise agreement with numerical convolution
  for (double x : {-1.0, 0.0, 0.4, 2.2}) {
    auto direct = quad::adaptive_gauss_kronrod(
        [&](double y) {
          return f(y) * std::exp(-(x - y) * (x - y) / (2.0 * sigma2)) /
                 std::sqrt(2.0 * std::numbers::pi * sigma2);
        },
        -30.0, 30.0, 1e-12);
    CHECK(g(x) == doctest::Approx(direct.value).epsilon(1e-10));
  }

  // semigroup: two convolutions equal one with the summed variance
  GaussPoly g2 = polygauss::convolve_with_gaussian(g, 0.07);
  GaussPoly g12 = polygauss::convolve_with_gaussian(f, 0.18);
  for (double x : {-0.8, 0.5, 1.7})
    CHECK(g2(x) == doctest::Approx(g12(x)).epsilon(1e-12));
}
