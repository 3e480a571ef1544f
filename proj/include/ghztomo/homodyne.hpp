// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "ghztomo/fock.hpp"
#include "ghztomo/polygauss.hpp"
#include "ghztomo/rng.hpp"

namespace ghztomo::homodyne {

using fock::Complex;
using fock::MixedEnsemble;
using fock::PureKet;

/// One two-mode homodyne detector: it measures the quadrature of the
/// effective mode
///   A = e^{-i psi_o} cos(theta) a_o + e^{-i psi_e} sin(theta) a_e.
struct PairSettings {
  double theta = 0.0;  // in [0, pi/2]
  double psi_o = 0.0;  // in [0, 2pi)
  double psi_e = 0.0;

  double u_o() const { return std::cos(theta); }
  double u_e() const { return std::sin(theta); }
};

struct DetectorSettings {
  std::array<PairSettings, 3> pair;
};

struct HomodyneSample {
  Eigen::Vector3d x;  // quadrature outcomes (x_a, x_b, x_c)
  DetectorSettings settings;
  double eta = 1.0;
};

/// Smeared wavefunction cross terms
///   g_{nm}(x) = (phi_n phi_m) convolved with N(0, (1-eta)/(4 eta)),
/// each a polynomial times exp(-x^2 eta * 2) with common variance 1/(4 eta).
class CrossTermTable {
 public:
  CrossTermTable(double eta, int max_occupation);

  const polygauss::GaussPoly& g(int n, int m) const {
    return table_[n * (max_occ_ + 1) + m];
  }
  int max_occupation() const { return max_occ_; }
  double eta() const { return eta_; }
  double variance() const { return variance_; }

 private:
  int max_occ_;
  double eta_, variance_;
  std::vector<polygauss::GaussPoly> table_;
};

/// Reduced density matrix of a state on the three measured modes (the
/// unobserved orthogonal-complement modes are traced out), in the Fock basis
/// with per-pair dimensions dims[j]. Index = k_a + dims[0]*(k_b + dims[1]*k_c).
struct MeasuredState {
  Eigen::MatrixXcd rho;
  std::array<int, 3> dims{1, 1, 1};
};

MeasuredState reduce_to_measured(const PureKet& ket, const DetectorSettings& settings);
MeasuredState reduce_to_measured(const MixedEnsemble& ensemble,
                                 const DetectorSettings& settings);

/// Exact joint density of the three quadrature outcomes; built once per
/// (ensemble, settings, eta) and cheap to evaluate.
class JointDensity {
 public:
  JointDensity(const MixedEnsemble& ensemble, const DetectorSettings& settings,
               double eta);
  JointDensity(MeasuredState state, double eta);

  double pdf(const Eigen::Vector3d& x) const;
  /// Marginal law of coordinate j with the other two integrated out.
  polygauss::GaussPoly marginal(int j) const;

  const MeasuredState& state() const { return state_; }
  const CrossTermTable& table() const { return table_; }

 private:
  MeasuredState state_;
  CrossTermTable table_;
};

/// p(x_a, x_b, x_c) for the ensemble under the given settings and homodyne
/// efficiency eta in (0, 1]. Normalized to unit triple integral.
double joint_pdf(const MixedEnsemble& ensemble, const DetectorSettings& settings,
                 double eta, const Eigen::Vector3d& x);

/// Inverse-CDF sampler for a 1D law q(x) = poly(x) exp(-x^2/(2V)), q >= 0,
/// not necessarily normalized. The CDF is exact (incomplete Gaussian
/// moments); inversion uses a monotone-cubic table on an adaptively refined
/// grid spanning +-6 standard deviations of the law, capped at 4096 points.
class Law1D {
 public:
  explicit Law1D(polygauss::GaussPoly q);

  double cdf(double x) const;        // normalized to [0, 1]
  double quantile(double u) const;   // table-interpolated inverse
  double draw(rng::Stream& stream) const;
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }
  int grid_size() const { return static_cast<int>(xs_.size()); }

 private:
  polygauss::GaussPoly q_;
  double norm_ = 1.0;
  double mean_ = 0.0, stddev_ = 1.0;
  std::vector<double> xs_, us_, slopes_;
};

/// Random detector orientations per the tomographic measure: psi uniform on
/// [0, 2pi), theta = arcsin(sqrt(u)) realizing density 2 sin(theta)cos(theta)
/// on [0, pi/2]; the three detectors are independent.
DetectorSettings draw_settings(rng::Stream& stream);

/// Draws one outcome triple from joint_pdf by sampling a mixture component,
/// then x_a from its marginal and x_b, x_c from the successive conditionals.
HomodyneSample sample(const MixedEnsemble& ensemble, const DetectorSettings& settings,
                      double eta, rng::Stream& stream);

/// Conditional CDF values F(x_a), F(x_b | x_a), F(x_c | x_a, x_b) for a
/// recorded sample; under the exact law these are iid uniform on [0, 1].
Eigen::Vector3d conditional_cdf_chain(const MixedEnsemble& ensemble,
                                      const HomodyneSample& s);

}  // namespace ghztomo::homodyne
