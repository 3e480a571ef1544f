// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace ghztomo::quad {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15),
// positive abscissae half. Nodes 1, 3, 5 and the centre are the Gauss-7
// subset.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

inline double error_norm(double v) { return std::abs(v); }
inline double error_norm(const std::complex<double>& v) { return std::abs(v); }
inline double error_norm(const Eigen::VectorXcd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}
template <int N>
double error_norm(const Eigen::Matrix<std::complex<double>, N, 1>& v) {
  return v.cwiseAbs().maxCoeff();
}

template <typename T>
struct Integral {
  T value{};
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

namespace detail {

template <typename T, typename F>
void gk15(F&& f, double a, double b, T& k15, double& err, long& evals) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  T centre = f(mid);
  k15 = T(kKronrodWeights[7] * centre);
  T g7 = T(kGaussWeights[3] * centre);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    T fv = T(f(mid + dx) + f(mid - dx));
    k15 = T(k15 + kKronrodWeights[i] * fv);
    if (i % 2 == 1) g7 = T(g7 + kGaussWeights[i / 2] * fv);
  }
  evals += 15;
  k15 = T(half * k15);
  err = error_norm(T(k15 - half * g7));
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] to the given absolute
/// tolerance, refining the segment with the largest error estimate first.
/// The value type may be double, complex<double> or an Eigen vector (the
/// error is then the max over components).
template <typename F>
auto adaptive_gauss_kronrod(F&& f, double a, double b, double abs_tol)
    -> Integral<decltype(f(a))> {
  using T = decltype(f(a));
  struct Segment {
    double a, b, err;
    T value;
  };
  Integral<T> out;
  std::vector<Segment> segments;
  segments.reserve(64);

  auto push = [&](double lo, double hi) {
    Segment s;
    s.a = lo;
    s.b = hi;
    detail::gk15(f, lo, hi, s.value, s.err, out.evaluations);
    segments.push_back(std::move(s));
  };
  push(a, b);
  const std::size_t cap = 1 << 13;
  for (;;) {
    double total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      total_err += segments[i].err;
      if (segments[i].err > segments[worst].err) worst = i;
    }
    if (total_err <= abs_tol) break;
    if (segments.size() >= cap ||
        segments[worst].b - segments[worst].a < 1e-14 * (b - a)) {
      out.converged = false;
      break;
    }
    const Segment split = segments[worst];
    segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(worst));
    const double mid = 0.5 * (split.a + split.b);
    push(split.a, mid);
    push(mid, split.b);
  }
  out.value = segments.front().value;
  out.error = segments.front().err;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    out.value = T(out.value + segments[i].value);
    out.error += segments[i].err;
  }
  return out;
}

struct GaussLegendreRule {
  std::vector<double> nodes;  // ascending
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule (Newton iteration on
/// the Legendre recurrence), mapped to [a, b].
GaussLegendreRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace ghztomo::quad
