// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ghztomo::source {

using fock::ModeLayout;
using fock::OccupationVector;

void CrystalParams::validate() const {
  if (gamma < 0.0) throw std::invalid_argument("CrystalParams: gamma must be >= 0");
  if (eta1 < 0.0 || eta1 > 1.0)
    throw std::invalid_argument("CrystalParams: eta1 must be in [0, 1]");
  if (eta2 < 0.0 || eta2 > 1.0)
    throw std::invalid_argument("CrystalParams: eta2 must be in [0, 1]");
}

LayoutPtr signal_layout(int n_max) {
  auto layout = std::make_shared<ModeLayout>(
      std::vector<std::string>{"a_o", "a_e", "b_o", "b_e", "c_o", "c_e"}, n_max);
  layout->set_pair_groups({{"a_o", "a_e"}, {"b_o", "b_e"}, {"c_o", "c_e"}});
  return layout;
}

LayoutPtr full_layout(int n_max) {
  auto layout = std::make_shared<ModeLayout>(
      std::vector<std::string>{"a_o", "a_e", "b_o", "b_e", "c_o", "c_e", "d_e",
                               "d_o", "f_e", "f_o", "g_o", "g_e"},
      n_max);
  layout->set_pair_groups({{"a_o", "a_e"}, {"b_o", "b_e"}, {"c_o", "c_e"}});
  return layout;
}

Eigen::Matrix2cd wave_plate_matrix() {
  Eigen::Matrix2cd u;
  u << 0, -1, 1, 0;
  return u;
}

Eigen::Matrix2cd pbs_matrix() {
  const double s = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix2cd u;
  u << s, -s, s, s;
  return u;
}

PureKet type2_state(double gamma, double phi1, LayoutPtr layout) {
  if (gamma < 0.0) throw std::invalid_argument("type2_state: gamma must be >= 0");
  if (!layout) layout = full_layout();
  const double norm = 1.0 / std::sqrt(1.0 + 2.0 * gamma * gamma);
  PureKet ket(layout);
  ket.add(OccupationVector::vacuum(*layout), norm);
  if (gamma > 0.0) {
    const int fe = layout->index_of("f_e");
    const int fo = layout->index_of("f_o");
    const int go = layout->index_of("g_o");
    const int ge = layout->index_of("g_e");
    auto vac = OccupationVector::vacuum(*layout);
    ket.add(vac.with_count(fe, 1).with_count(go, 1), norm * gamma);
    ket.add(vac.with_count(fo, 1).with_count(ge, 1),
            norm * gamma * std::polar(1.0, phi1));
  }
  return ket;
}

namespace {

struct ConversionRule {
  int pump;
  int out1, out2;
  Complex phase;
};

void expand_branches(const OccupationVector& occ, Complex amp,
                     const std::vector<ConversionRule>& rules, std::size_t i,
                     double cos_chi, double sin_chi, PureKet& out) {
  if (i == rules.size()) {
    out.add(occ, amp);
    return;
  }
  const auto& rule = rules[i];
  if (occ.count(rule.pump) == 0) {
    expand_branches(occ, amp, rules, i + 1, cos_chi, sin_chi, out);
    return;
  }
  // keep the pump photon
  expand_branches(occ, amp * cos_chi, rules, i + 1, cos_chi, sin_chi, out);
  // convert it into the signal pair
  auto converted = occ.with_count(rule.pump, 0)
                       .with_count(rule.out1, occ.count(rule.out1) + 1)
                       .with_count(rule.out2, occ.count(rule.out2) + 1);
  expand_branches(converted, amp * sin_chi * rule.phase, rules, i + 1, cos_chi,
                  sin_chi, out);
}

}  // namespace

PureKet apply_type1_crystals(const PureKet& state, double chi, double phi_a,
                             double phi_b) {
  const ModeLayout& layout = state.layout();
  const std::vector<ConversionRule> rules = {
      {layout.index_of("f_e"), layout.index_of("a_o"), layout.index_of("b_o"),
       Complex(1.0, 0.0)},
      {layout.index_of("f_o"), layout.index_of("a_e"), layout.index_of("b_e"),
       std::polar(1.0, phi_a)},
      {layout.index_of("g_o"), layout.index_of("c_e"), layout.index_of("d_e"),
       Complex(1.0, 0.0)},
      {layout.index_of("g_e"), layout.index_of("c_o"), layout.index_of("d_o"),
       std::polar(1.0, phi_b)},
  };
  state.for_each([&](const OccupationVector& occ, Complex) {
    for (const auto& rule : rules)
      if (occ.count(rule.pump) > 1)
        throw std::domain_error(
            "apply_type1_crystals: pump mode carries more than one photon");
  });

  const double c = std::cos(chi), s = std::sin(chi);
  PureKet out(state.layout_ptr());
  state.for_each([&](const OccupationVector& occ, Complex amp) {
    expand_branches(occ, amp, rules, 0, c, s, out);
  });
  return out.pruned(0.0);
}

D2Result condition_on_D2(const PureKet& state, double eta2, HeraldPort port) {
  if (eta2 < 0.0 || eta2 > 1.0)
    throw std::invalid_argument("condition_on_D2: eta2 must be in [0, 1]");
  PureKet transformed =
      apply_pair_unitary(state, "c_e", "c_o", wave_plate_matrix());
  transformed = apply_pair_unitary(transformed, "d_e", "d_o", pbs_matrix());

  // In the substitution convention the post-transform label d_o is the port
  // detecting the input combination (d_e + d_o)/sqrt(2).
  const std::string heralded = port == HeraldPort::kPlus ? "d_o" : "d_e";
  const std::string other = port == HeraldPort::kPlus ? "d_e" : "d_o";

  auto click = project_mode_count(transformed, heralded, 1);
  D2Result result{eta2 * click.probability, click.reduced};
  if (result.p_phi <= 0.0) {
    result.p_phi = 0.0;
    return result;
  }
  // The surviving branches are empty on the other PBS output and on the g
  // modes; conditioning on vacuum there just removes the modes.
  for (const auto& mode : {other, std::string("g_o"), std::string("g_e")}) {
    auto r = project_mode_count(result.state, mode, 0);
    if (std::abs(r.probability - 1.0) > 1e-12)
      throw std::logic_error("condition_on_D2: unexpected photons in mode " + mode);
    result.state = r.reduced;
  }
  return result;
}

HeraldedOutput condition_on_D1_no_click(const D2Result& phi, double eta1,
                                        double chi) {
  if (eta1 < 0.0 || eta1 > 1.0)
    throw std::invalid_argument("condition_on_D1_no_click: eta1 must be in [0, 1]");
  if (phi.p_phi <= 0.0)
    throw std::domain_error("condition_on_D1_no_click: D2 never clicked");

  // Split |Phi> by the f-mode occupation. The f-vacuum branch survives a
  // no-click with certainty; a branch with a surviving f photon does so with
  // probability (1 - eta1) and decoheres from the rest once f is traced out.
  const PureKet& state = phi.state;
  auto fe_vac = project_mode_count(state, "f_e", 0);
  auto ghz_branch = project_mode_count(fe_vac.reduced, "f_o", 0);
  double w_ghz = fe_vac.probability * ghz_branch.probability;

  auto fe_one = project_mode_count(state, "f_e", 1);
  double w_fe = fe_one.probability;
  auto fo_part = project_mode_count(state, "f_o", 1);
  double w_fo = fo_part.probability;

  double p_noclick = w_ghz + (1.0 - eta1) * (w_fe + w_fo);
  if (p_noclick <= 0.0 || (std::sin(chi) == 0.0 && eta1 == 1.0))
    throw std::domain_error(
        "condition_on_D1_no_click: no-click probability is zero");

  HeraldedOutput out;
  out.p_phi = phi.p_phi;
  out.p_rho = phi.p_phi * p_noclick;
  out.p1 = w_ghz / p_noclick;
  out.p2 = (1.0 - eta1) * w_fe / p_noclick;
  out.p3 = (1.0 - eta1) * w_fo / p_noclick;

  if (out.p1 > 0.0) out.state.add_component(out.p1, ghz_branch.reduced);
  if (out.p2 > 0.0) {
    auto ket = project_mode_count(fe_one.reduced, "f_o", 0);
    out.state.add_component(out.p2, ket.reduced);
  }
  if (out.p3 > 0.0) {
    auto ket = project_mode_count(fo_part.reduced, "f_e", 0);
    out.state.add_component(out.p3, ket.reduced);
  }
  out.state.validate(1e-9);

  if (out.p1 > 0.0) {
    const auto& layout = ghz_branch.reduced.layout();
    std::vector<int> ooo(layout.size(), 0), eee(layout.size(), 0);
    for (const auto& m : {"a_o", "b_o", "c_o"}) ooo[layout.index_of(m)] = 1;
    for (const auto& m : {"a_e", "b_e", "c_e"}) eee[layout.index_of(m)] = 1;
    Complex a_o = ghz_branch.reduced.amplitude(OccupationVector(layout, ooo));
    Complex a_e = ghz_branch.reduced.amplitude(OccupationVector(layout, eee));
    if (std::abs(a_o) > 1e-12) {
      double theta = std::arg(-a_e / a_o);
      out.ghz_phase = theta < 0.0 ? theta + 2.0 * std::numbers::pi : theta;
    }
  }
  return out;
}

void heralded_weights(double chi, double eta1, double& p1, double& p2, double& p3) {
  const double s2 = std::sin(chi) * std::sin(chi);
  const double c2 = std::cos(chi) * std::cos(chi);
  const double denom = 1.0 - eta1 * c2;
  if (denom <= 0.0)
    throw std::domain_error("heralded_weights: no-click probability is zero");
  p1 = s2 / denom;
  p2 = (1.0 - eta1) * c2 / (2.0 * denom);
  p3 = p2;
}

HeraldedOutput herald(const CrystalParams& params) {
  params.validate();
  PureKet seed = type2_state(params.gamma, params.phi1);
  PureKet converted = apply_type1_crystals(seed, params.chi, params.phi_a,
                                           params.phi_b);
  D2Result d2 = condition_on_D2(converted, params.eta2, params.port);
  if (d2.p_phi <= 0.0)
    throw std::domain_error("herald: D2 click probability is zero "
                            "(gamma, chi or eta2 vanishes)");
  return condition_on_D1_no_click(d2, params.eta1, params.chi);
}

}  // namespace ghztomo::source
