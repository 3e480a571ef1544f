// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/polygauss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ghztomo::polygauss {

double eval(const Poly& p, double x) {
  double r = 0.0;
  for (Eigen::Index k = p.size() - 1; k >= 0; --k) r = r * x + p[k];
  return r;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly out = Poly::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out = Poly::Zero(std::max(a.size(), b.size()));
  out.head(a.size()) += a;
  out.head(b.size()) += b;
  return out;
}

Poly scale_argument(const Poly& p, double lambda) {
  Poly out = p;
  double f = 1.0;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out[k] *= f;
    f *= lambda;
  }
  return out;
}

double double_factorial(int k) {
  double f = 1.0;
  for (int i = k; i > 1; i -= 2) f *= i;
  return f;
}

double gaussian_moment(int k, double variance) {
  if (k % 2 == 1) return 0.0;
  return double_factorial(k - 1) * std::pow(variance, k / 2) *
         std::sqrt(2.0 * std::numbers::pi * variance);
}

double integral(const Poly& p, double variance) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); k += 2)
    s += p[k] * gaussian_moment(static_cast<int>(k), variance);
  return s;
}

double lower_integral(const Poly& p, double variance, double x) {
  const double g = std::exp(-x * x / (2.0 * variance));
  const double i0 = std::sqrt(std::numbers::pi * variance / 2.0) *
                    (1.0 + std::erf(x / std::sqrt(2.0 * variance)));
  double ik_minus2 = 0.0, ik_minus1 = i0;
  double s = p.size() > 0 ? p[0] * i0 : 0.0;
  double xpow = 1.0;  // x^{k-1} for the recurrence below
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    // I_k = -V x^{k-1} g + (k-1) V I_{k-2}
    double ik = -variance * xpow * g + (k - 1) * variance * ik_minus2;
    s += p[k] * ik;
    ik_minus2 = ik_minus1;
    ik_minus1 = ik;
    xpow *= x;
  }
  return s;
}

Poly shifted_gaussian_expectation(const Poly& p, double tau2) {
  Poly out = Poly::Zero(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    double binom = 1.0;  // C(k, j) updated incrementally
    double taupow = 1.0;
    for (Eigen::Index j = 0; j <= k; ++j) {
      if (j % 2 == 0)
        out[k - j] += p[k] * binom * double_factorial(static_cast<int>(j) - 1) * taupow;
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
      taupow *= std::sqrt(tau2);
    }
  }
  return out;
}

double GaussPoly::operator()(double x) const {
  return eval(poly, x) * std::exp(-x * x / (2.0 * variance));
}

double GaussPoly::integral() const {
  return polygauss::integral(poly, variance);
}

double GaussPoly::lower_integral(double x) const {
  return polygauss::lower_integral(poly, variance, x);
}

double GaussPoly::mean() const {
  Poly xp = Poly::Zero(poly.size() + 1);
  xp.tail(poly.size()) = poly;
  return polygauss::integral(xp, variance) / integral();
}

double GaussPoly::second_moment() const {
  Poly x2p = Poly::Zero(poly.size() + 2);
  x2p.tail(poly.size()) = poly;
  return polygauss::integral(x2p, variance) / integral();
}

GaussPoly convolve_with_gaussian(const GaussPoly& f, double sigma2) {
  if (sigma2 < 0.0)
    throw std::invalid_argument("convolve_with_gaussian: negative variance");
  if (sigma2 == 0.0) return f;
  const double alpha = 0.5 / f.variance + 0.5 / sigma2;
  const double lambda = 1.0 / (2.0 * sigma2 * alpha);
  const double tau2 = 1.0 / (2.0 * alpha);
  Poly in_y = shifted_gaussian_expectation(f.poly, tau2);
  GaussPoly out;
  out.poly = std::sqrt(lambda) * scale_argument(in_y, lambda);
  out.variance = f.variance + sigma2;
  return out;
}

Poly hermite_basis(int n) {
  if (n < 0) throw std::invalid_argument("hermite_basis: n must be >= 0");
  Poly prev = Poly::Zero(1), cur = Poly::Zero(1);
  cur[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    Poly next = Poly::Zero(k + 2);
    next.tail(k + 1) += 2.0 * cur;  // 2x * h_k
    if (k > 0) next.head(k) -= std::sqrt(static_cast<double>(k)) * prev.head(k);
    next /= std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double wavefunction(int n, double x) {
  static const double norm = std::pow(2.0 / std::numbers::pi, 0.25);
  return norm * std::exp(-x * x) * eval(hermite_basis(n), x);
}

}  // namespace ghztomo::polygauss
