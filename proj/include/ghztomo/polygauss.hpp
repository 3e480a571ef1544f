// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace ghztomo::polygauss {

/// Dense real polynomial, ascending coefficients. Coefficient vectors keep
/// whatever length they were built with; trailing zeros are harmless.
using Poly = Eigen::VectorXd;

double eval(const Poly& p, double x);
Poly mul(const Poly& a, const Poly& b);
Poly add(const Poly& a, const Poly& b);
/// Coefficients of p(lambda * x).
Poly scale_argument(const Poly& p, double lambda);

/// (k-1)!! for odd k, 1 for k <= 0.
double double_factorial(int k);

/// Full-line Gaussian moment  integral x^k exp(-x^2/(2V)) dx.
double gaussian_moment(int k, double variance);

/// integral p(x) exp(-x^2/(2V)) dx.
double integral(const Poly& p, double variance);

/// integral_{-inf}^{x} p(y) exp(-y^2/(2V)) dy, from the incomplete-moment
/// recurrence (erf for the base case).
double lower_integral(const Poly& p, double variance, double x);

/// E[p(y + Z)] as a polynomial in y, with Z ~ N(0, tau2).
Poly shifted_gaussian_expectation(const Poly& p, double tau2);

/// f(x) = poly(x) * exp(-x^2 / (2 variance)).
struct GaussPoly {
  Poly poly;
  double variance = 0.25;

  double operator()(double x) const;
  double integral() const;
  double lower_integral(double x) const;
  double mean() const;
  double second_moment() const;
};

/// Convolution of a GaussPoly with a centred Gaussian of variance sigma2;
/// the result is again polynomial times Gaussian, with variance increased by
/// sigma2.
GaussPoly convolve_with_gaussian(const GaussPoly& f, double sigma2);

/// Polynomial part h_n of the quadrature wavefunction of the n-photon Fock
/// state in the X = (a + a^dag)/2 convention:
///   phi_n(x) = (2/pi)^{1/4} exp(-x^2) h_n(x),
/// with h_0 = 1, h_1 = 2x, h_{n+1} = (2x h_n - sqrt(n) h_{n-1})/sqrt(n+1).
Poly hermite_basis(int n);

/// phi_n(x) itself.
double wavefunction(int n, double x);

}  // namespace ghztomo::polygauss
