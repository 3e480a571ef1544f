// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ghztomo/kernel.hpp"
#include "ghztomo/source.hpp"

namespace ghztomo::experiment {

using Complex = std::complex<double>;

struct PhiGrid {
  double start = 0.0;
  double stop = 2.0 * std::numbers::pi;
  int points = 17;

  std::vector<double> values() const;
};

struct ExperimentConfig {
  source::CrystalParams crystal;
  double homodyne_eta = 0.85;
  long samples = 1000000;
  int blocks = 20;
  std::uint64_t seed = 1;
  PhiGrid grid;
  std::string output;

  /// Throws std::invalid_argument with a reason on any violated constraint.
  void validate() const;
};

struct ResultRow {
  double phi = 0.0;
  double c_est = 0.0;
  double c_err = 0.0;
  double c_theory = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  ExperimentConfig config;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  double p_phi = 0.0, p_rho = 0.0;
  double ghz_phase = 0.0;
  // The three accumulated matrix-element estimators <ooo|rho|ooo>,
  // <eee|rho|eee>, <ooo|rho|eee>.
  kernel::EstimatorResult d_ooo, d_eee, off_diag;
  double wall_seconds = 0.0;

  /// CSV with a commented metadata header; the timestamp and wall-clock
  /// lines are dropped when with_timestamp is false so that identical
  /// (config, seed) runs are byte-identical.
  std::string to_csv(bool with_timestamp = true) const;
};

/// Closed-form C(phi) = p1 [1 - cos(phi - Phi)] / 2 with Phi the heralded
/// GHZ phase (phi1 + phi_a + phi_b, plus pi on the minus port).
double theoretical_C(const ExperimentConfig& config, double phi);

/// <phi|rho|phi> by direct Fock-space contraction of the heralded ensemble
/// with the projector onto (|ooo> + e^{i phi}|eee>)/sqrt(2); an independent
/// cross-check of theoretical_C.
double oracle_C(const ExperimentConfig& config, double phi);

/// Full tomographic Monte-Carlo run: heralds the source state, streams
/// samples in `blocks` deterministic blocks (parallelized over threads; the
/// GHZTOMO_THREADS environment variable overrides the worker count), and
/// assembles C(phi) with block standard errors. One sample set serves every
/// grid point. Bit-reproducible for fixed (config, seed).
ResultTable run(const ExperimentConfig& config);

/// Same Monte-Carlo machinery on a caller-supplied ensemble (test hook).
ResultTable run_with_ensemble(const ExperimentConfig& config,
                              const source::HeraldedOutput& herald);

}  // namespace ghztomo::experiment
