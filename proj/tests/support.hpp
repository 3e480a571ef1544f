// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test oracles: independent reference implementations kept apart from
// the library code paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "ghztomo/fock.hpp"
#include "ghztomo/quadrature.hpp"
#include "ghztomo/rng.hpp"

namespace testsupport {

using Complex = std::complex<double>;

/// Random 2x2 unitary from the explicit phase parametrization.
inline Eigen::Matrix2cd random_unitary(ghztomo::rng::Stream& stream) {
  const double alpha = stream.uniform(0.0, 2.0 * std::numbers::pi);
  const double beta = stream.uniform(0.0, std::numbers::pi / 2.0);
  const double gamma = stream.uniform(0.0, 2.0 * std::numbers::pi);
  const double delta = stream.uniform(0.0, 2.0 * std::numbers::pi);
  Eigen::Matrix2cd u;
  u << std::polar(std::cos(beta), alpha), std::polar(std::sin(beta), gamma),
      -std::polar(std::sin(beta), -gamma), std::polar(std::cos(beta), -alpha);
  return std::polar(1.0, delta) * u;
}

/// Random normalized ket with at most one photon per mode and at most
/// `max_terms` basis terms.
inline ghztomo::fock::PureKet random_sparse_ket(ghztomo::fock::LayoutPtr layout,
                                                ghztomo::rng::Stream& stream,
                                                int max_terms = 6) {
  ghztomo::fock::PureKet ket(layout);
  const int terms = 1 + static_cast<int>(stream.bits() % max_terms);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> occ(layout->size());
    for (auto& n : occ) n = static_cast<int>(stream.bits() % 2);
    const Complex amp(stream.uniform(-1.0, 1.0), stream.uniform(-1.0, 1.0));
    ket.add(ghztomo::fock::OccupationVector(*layout, occ), amp);
  }
  if (ket.norm2() == 0.0)
    ket.add(ghztomo::fock::OccupationVector::vacuum(*layout), Complex(1.0, 0.0));
  return ket.normalized();
}

/// Brute-force generalized Laguerre polynomial from the explicit sum.
inline double laguerre_reference(int n, int alpha, double z) {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double binom = fact(n + alpha) / (fact(n - k) * fact(alpha + k));
    sum += ((k % 2 == 0) ? 1.0 : -1.0) * binom * std::pow(z, k) / fact(k);
  }
  return sum;
}

/// Two-sided Kolmogorov-Smirnov distance of samples against a CDF.
inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic two-sided KS critical value at significance alpha.
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Composite Simpson rule; an independent node family for cross-checking the
/// Gauss-Kronrod results.
template <typename F>
auto simpson(F&& f, double a, double b, int panels) -> decltype(f(a)) {
  using T = decltype(f(a));
  const double h = (b - a) / (2 * panels);
  T sum = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i)
    sum = sum + (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return (h / 3.0) * sum;
}

/// CDF of one coordinate of a trivariate density, obtained by brute-force
/// quadrature: tensor Gauss-Legendre over the other two coordinates on a
/// fine grid, then a cumulative Simpson pass. Independent of the library's
/// closed-form marginal machinery.
class NumericMarginalCdf {
 public:
  NumericMarginalCdf(const std::function<double(const Eigen::Vector3d&)>& pdf,
                     int axis, double lo, double hi, int grid_points = 501,
                     double other_half_width = 6.5, int other_points = 32)
      : lo_(lo), hi_(hi) {
    if (grid_points % 2 == 0) ++grid_points;
    auto rule = ghztomo::quad::gauss_legendre(other_points, -other_half_width,
                                              other_half_width);
    xs_.resize(grid_points);
    std::vector<double> density(grid_points);
    for (int i = 0; i < grid_points; ++i) {
      xs_[i] = lo + (hi - lo) * i / (grid_points - 1.0);
      double p = 0.0;
      for (int a = 0; a < other_points; ++a)
        for (int b = 0; b < other_points; ++b) {
          Eigen::Vector3d x;
          x[axis] = xs_[i];
          x[(axis + 1) % 3] = rule.nodes[a];
          x[(axis + 2) % 3] = rule.nodes[b];
          p += rule.weights[a] * rule.weights[b] * pdf(x);
        }
      density[i] = p;
    }
    cdf_.assign(grid_points, 0.0);
    const double h = (hi - lo) / (grid_points - 1.0);
    for (int i = 2; i < grid_points; i += 2)
      cdf_[i] = cdf_[i - 2] + h / 3.0 * (density[i - 2] + 4.0 * density[i - 1] +
                                         density[i]);
    for (int i = 1; i < grid_points; i += 2)
      cdf_[i] = 0.5 * (cdf_[i - 1] + (i + 1 < grid_points ? cdf_[i + 1] : total()));
    const double z = total();
    for (auto& c : cdf_) c /= z;
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const double t = (x - lo_) / (hi_ - lo_) * (xs_.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(t), xs_.size() - 2);
    const double frac = t - static_cast<double>(i);
    return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
  }

 private:
  double total() const { return cdf_.empty() ? 1.0 : cdf_.back(); }
  double lo_, hi_;
  std::vector<double> xs_, cdf_;
};

}  // namespace testsupport
