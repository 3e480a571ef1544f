// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "ghztomo/fock.hpp"

namespace ghztomo::source {

using fock::Complex;
using fock::LayoutPtr;
using fock::MixedEnsemble;
using fock::PureKet;

/// Which polarizing-beam-splitter output the heralding detector D2 watches.
/// kPlus detects the (d_e + d_o)/sqrt(2) combination of the input d modes,
/// kMinus the (d_o - d_e)/sqrt(2) one. The choice shifts the relative phase
/// of the heralded GHZ component by pi; it is reported in HeraldedOutput.
enum class HeraldPort { kPlus, kMinus };

struct CrystalParams {
  double gamma = 0.1;   // type-II effective coupling
  double phi1 = 0.0;    // type-II relative phase
  double chi = 0.0;     // type-I coupling, shared by crystals A and B
  double phi_a = 0.0;   // type-I phase, crystal A
  double phi_b = 0.0;   // type-I phase, crystal B
  double eta1 = 1.0;    // quantum efficiency of detector D1
  double eta2 = 1.0;    // quantum efficiency of detector D2
  HeraldPort port = HeraldPort::kPlus;

  void validate() const;
};

struct HeraldedOutput {
  MixedEnsemble state;    // mixture over the six signal modes
  double p_phi = 0.0;     // probability of the D2 click
  double p_rho = 0.0;     // overall heralding probability
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  double ghz_phase = 0.0; // relative phase of the GHZ component, in [0, 2pi)
};

/// Signal-mode layout [a_o, a_e, b_o, b_e, c_o, c_e] with the three detector
/// pair groups set.
LayoutPtr signal_layout(int n_max = 2);

/// All twelve modes of the optical scheme: the six signal modes first, then
/// d_e, d_o, f_e, f_o, g_o, g_e, so conditioning away the auxiliary modes
/// leaves the signal layout.
LayoutPtr full_layout(int n_max = 2);

/// Wave-plate map on (c_e, c_o): c_e -> c_o, c_o -> -c_e.
Eigen::Matrix2cd wave_plate_matrix();
/// Beam-splitter map on (d_e, d_o): d_e -> (d_e+d_o)/sqrt(2),
/// d_o -> (d_o-d_e)/sqrt(2).
Eigen::Matrix2cd pbs_matrix();

/// Two-photon state of the type-II downconverter,
///   (1+2 gamma^2)^(-1/2) [ |0> + gamma (|1f_e,1g_o> + e^{i phi1} |1f_o,1g_e>) ],
/// embedded in `layout` (default full_layout()).
PureKet type2_state(double gamma, double phi1, LayoutPtr layout = nullptr);

/// Action of the two type-I crystals on single-photon pump branches:
///   |1f_e> -> cos(chi)|1f_e> + sin(chi)|1a_o,1b_o>
///   |1f_o> -> cos(chi)|1f_o> + e^{i phi_a} sin(chi)|1a_e,1b_e>
///   |1g_o> -> cos(chi)|1g_o> + sin(chi)|1c_e,1d_e>
///   |1g_e> -> cos(chi)|1g_e> + e^{i phi_b} sin(chi)|1c_o,1d_o>
/// Throws if any pump mode carries more than one photon.
PureKet apply_type1_crystals(const PureKet& state, double chi, double phi_a,
                             double phi_b);

struct D2Result {
  double p_phi = 0.0;
  PureKet state;  // normalized; empty when p_phi == 0
};

/// Applies the wave-plate and PBS transforms, conditions on one photon in the
/// chosen PBS output (click probability scaled by eta2), and traces away the
/// d and g modes. Returns the heralded state on [signal modes + f_e + f_o].
D2Result condition_on_D2(const PureKet& state, double eta2,
                         HeraldPort port = HeraldPort::kPlus);

/// Conditions on detector D1 (efficiency eta1) seeing nothing in the f modes
/// and traces them out: branches with a surviving f photon are kept with
/// weight (1-eta1) and lose their coherence with the rest. Throws when the
/// no-click probability vanishes (chi = 0 with eta1 = 1).
HeraldedOutput condition_on_D1_no_click(const D2Result& phi, double eta1,
                                        double chi);

/// Closed-form mixture weights of the heralded state:
///   p1 = sin^2(chi) / (1 - eta1 cos^2(chi)),  p2 = p3 = (1-p1)/2.
void heralded_weights(double chi, double eta1, double& p1, double& p2, double& p3);

/// Full source pipeline for a parameter set.
HeraldedOutput herald(const CrystalParams& params);

}  // namespace ghztomo::source
