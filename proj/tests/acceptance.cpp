// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each test case checks one release criterion at
// its stated tolerance and prints one PASS/FAIL line.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ghztomo/experiment.hpp"
#include "ghztomo/homodyne.hpp"
#include "ghztomo/source.hpp"
#include "support.hpp"
#include "tomo_oracle.hpp"

using namespace ghztomo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

experiment::ExperimentConfig fig2_config(double chi_over_pi, double eta) {
  experiment::ExperimentConfig cfg;
  cfg.crystal.gamma = 0.1;
  cfg.crystal.chi = chi_over_pi * kPi;
  cfg.crystal.eta1 = 0.3;
  cfg.crystal.eta2 = 0.3;
  cfg.homodyne_eta = eta;
  cfg.blocks = 20;
  return cfg;
}

fock::PureKet two_mode_state(int which) {
  auto layout = source::signal_layout();
  using fock::PureKet;
  const double r = 1.0 / std::numbers::sqrt2;
  switch (which) {
    case 0: return PureKet::vacuum(layout);
    case 1: return PureKet::basis(layout, {{"a_o", 1}});
    case 2:
      return PureKet::basis(layout, {{"a_o", 1}})
          .plus(PureKet::basis(layout, {{"a_e", 1}}))
          .scaled(r);
    default:
      return PureKet::basis(layout, {{"a_o", 1}})
          .plus(PureKet::basis(layout, {{"a_e", 1}})
                    .scaled(std::complex<double>(0.0, 1.0)))
          .scaled(r);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("criterion 1: Fig.2-left reproduction at reduced N") {
  auto cfg = fig2_config(0.3, 0.85);
  cfg.samples = 1000000;
  cfg.seed = 120001;
  cfg.grid = {0.0, 2.0 * kPi * 15.0 / 16.0, 16};

  auto table = experiment::run(cfg);
  int within = 0;
  for (const auto& row : table.rows)
    if (std::abs(row.c_est - row.c_theory) <= 3.0 * row.c_err) ++within;
  const auto& peak = table.rows[8];  // phi = pi
  const bool peak_ok = std::abs(peak.c_est - 0.730) <= 3.0 * peak.c_err;
  const bool ok = within >= 14 && peak_ok;

  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%d/16 points within 3 sigma; C(pi) = %.4f +- %.4f vs 0.730",
                within, peak.c_est, peak.c_err);
  report(1, "Fig.2-left reproduction at reduced N", ok, detail);
  CHECK(within >= 14);
  CHECK(peak_ok);
}

TEST_CASE("criterion 2: Fig.2-right spot check at reduced N") {
  auto cfg = fig2_config(0.4, 0.9);
  cfg.samples = 2000000;
  cfg.seed = 120002;
  cfg.grid = {kPi, kPi, 1};

  auto table = experiment::run(cfg);
  const auto& row = table.rows[0];
  const bool ok = std::abs(row.c_est - 0.9312) <= 3.0 * row.c_err;
  char detail[120];
  std::snprintf(detail, sizeof detail, "C(pi) = %.4f +- %.4f vs 0.9312", row.c_est,
                row.c_err);
  report(2, "Fig.2-right spot check at reduced N", ok, detail);
  CHECK(ok);
}

TEST_CASE("criterion 3: deterministic unbiasedness oracle") {
  double worst = 0.0;
  for (int which = 0; which < 4; ++which) {
    auto ket = two_mode_state(which);
    for (double eta : {1.0, 0.85}) {
      Eigen::Matrix3cd expected = testsupport::exact_sector_matrix(ket);
      Eigen::Matrix3cd averaged = testsupport::averaged_sector_matrix(ket, eta);
      worst = std::max(worst, (averaged - expected).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst < 1e-6;
  char detail[120];
  std::snprintf(detail, sizeof detail,
                "worst |averaged - exact| = %.2e over 4 states x {1, 0.85}", worst);
  report(3, "unbiasedness oracle (no sampling)", ok, detail);
  CHECK(ok);
}

TEST_CASE("criterion 4: closed-form heralding vs brute-force pipeline") {
  rng::Stream stream(424242);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    source::CrystalParams p;
    p.gamma = stream.uniform(0.02, 0.3);
    p.chi = stream.uniform(0.05, 0.45) * kPi;
    p.phi1 = stream.uniform(0.0, 2.0 * kPi);
    p.phi_a = stream.uniform(0.0, 2.0 * kPi);
    p.phi_b = stream.uniform(0.0, 2.0 * kPi);
    p.eta1 = stream.uniform(0.05, 1.0);
    p.eta2 = stream.uniform(0.05, 1.0);

    auto converted = source::apply_type1_crystals(
        source::type2_state(p.gamma, p.phi1), p.chi, p.phi_a, p.phi_b);
    auto d2 = source::condition_on_D2(converted, p.eta2);
    auto out = source::condition_on_D1_no_click(d2, p.eta1, p.chi);

    const double s2 = std::pow(std::sin(p.chi), 2);
    const double c2 = std::pow(std::cos(p.chi), 2);
    double p1, p2, p3;
    source::heralded_weights(p.chi, p.eta1, p1, p2, p3);

    worst = std::max(worst, std::abs(d2.p_phi - p.eta2 * p.gamma * p.gamma * s2 /
                                                    (1.0 + 2.0 * p.gamma * p.gamma)));
    worst = std::max(worst, std::abs(out.p1 - p1));
    worst = std::max(worst, std::abs(out.p2 - p2));
    worst = std::max(worst, std::abs(out.p3 - p3));
    worst = std::max(worst, std::abs(out.p1 + out.p2 + out.p3 - 1.0));
    worst = std::max(worst, std::abs(out.p_rho - out.p_phi * (1.0 - p.eta1 * c2)));

    // state match: GHZ component with the phase-law relative phase
    const auto& layout = out.state.component(0).layout();
    std::vector<int> ooo(layout.size(), 0), eee(layout.size(), 0);
    for (const auto& m : {"a_o", "b_o", "c_o"}) ooo[layout.index_of(m)] = 1;
    for (const auto& m : {"a_e", "b_e", "c_e"}) eee[layout.index_of(m)] = 1;
    fock::PureKet ghz(out.state.component(0).layout_ptr());
    ghz.add(fock::OccupationVector(layout, ooo), 1.0 / std::numbers::sqrt2);
    ghz.add(fock::OccupationVector(layout, eee),
            -std::polar(1.0 / std::numbers::sqrt2, p.phi1 + p.phi_a + p.phi_b));
    worst = std::max(
        worst, std::abs(fock::inner_product(ghz, out.state.component(0)) - 1.0));
  }
  const bool ok = worst < 1e-12;
  char detail[120];
  std::snprintf(detail, sizeof detail, "worst deviation = %.2e over 100 draws", worst);
  report(4, "closed-form heralding", ok, detail);
  CHECK(ok);
}

TEST_CASE("criterion 5: sampler fidelity (KS at N = 1e5)") {
  auto params = fig2_config(0.3, 0.85).crystal;
  auto herald = source::herald(params);

  rng::Stream stream(555001);
  const int n = 100000;
  const double critical = testsupport::ks_critical(n, 0.01);
  double worst = 0.0;
  bool ok = true;
  for (int draw = 0; draw < 20; ++draw) {
    auto settings = homodyne::draw_settings(stream);
    const double eta = stream.uniform(0.55, 1.0);

    std::vector<double> xs(n), u1(n), u2(n);
    for (int i = 0; i < n; ++i) {
      auto s = homodyne::sample(herald.state, settings, eta, stream);
      xs[i] = s.x[0];
      auto u = homodyne::conditional_cdf_chain(herald.state, s);
      u1[i] = u[1];
      u2[i] = u[2];
    }

    homodyne::JointDensity density(herald.state, settings, eta);
    testsupport::NumericMarginalCdf cdf(
        [&](const Eigen::Vector3d& x) { return density.pdf(x); }, 0, -7.5, 7.5);
    const double d_marginal =
        testsupport::ks_distance(xs, [&](double x) { return cdf(x); });
    auto uniform = [](double v) { return std::clamp(v, 0.0, 1.0); };
    const double d_cond1 = testsupport::ks_distance(u1, uniform);
    const double d_cond2 = testsupport::ks_distance(u2, uniform);
    worst = std::max({worst, d_marginal, d_cond1, d_cond2});
    ok = ok && d_marginal < critical && d_cond1 < critical && d_cond2 < critical;
  }
  char detail[140];
  std::snprintf(detail, sizeof detail,
                "worst KS distance %.4f vs critical %.4f over 20 draws x 3 tests",
                worst, critical);
  report(5, "sampler fidelity (marginal + two conditionals)", ok, detail);
  CHECK(ok);
}

TEST_CASE("criterion 6: pdf normalization by deterministic quadrature") {
  rng::Stream stream(666001);
  auto layout = source::signal_layout();
  auto rule = quad::gauss_legendre(48, -7.0, 7.0);

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    fock::MixedEnsemble ens;
    const int parts = 1 + static_cast<int>(stream.bits() % 3);
    std::vector<double> w(parts);
    double total_w = 0.0;
    for (auto& v : w) {
      v = stream.uniform(0.1, 1.0);
      total_w += v;
    }
    for (int k = 0; k < parts; ++k)
      ens.add_component(w[k] / total_w, testsupport::random_sparse_ket(layout, stream));
    auto settings = homodyne::draw_settings(stream);
    const double eta = stream.uniform(0.55, 1.0);
    homodyne::JointDensity density(ens, settings, eta);

    double integral = 0.0;
    for (int i = 0; i < 48; ++i)
      for (int j = 0; j < 48; ++j)
        for (int k = 0; k < 48; ++k)
          integral += rule.weights[i] * rule.weights[j] * rule.weights[k] *
                      density.pdf({rule.nodes[i], rule.nodes[j], rule.nodes[k]});
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  const bool ok = worst < 1e-6;
  char detail[120];
  std::snprintf(detail, sizeof detail, "worst |integral - 1| = %.2e over 20 ensembles",
                worst);
  report(6, "joint pdf normalization", ok, detail);
  CHECK(ok);
}

TEST_CASE("criterion 7: byte-identical CSV across worker counts") {
  const std::string cli = GHZTOMO_CLI_PATH;
  const std::string cfg = std::string(GHZTOMO_CONFIG_DIR) + "/fig2_left.json";
  fs::path out1 = fs::temp_directory_path() / "ghztomo_acc_t1.csv";
  fs::path out4 = fs::temp_directory_path() / "ghztomo_acc_t4.csv";

  auto invoke = [&](const std::string& threads, const fs::path& out) {
    std::string cmd = "env GHZTOMO_THREADS=" + threads + " \"" + cli +
                      "\" simulate --config \"" + cfg +
                      "\" --samples 20000 --seed 777 --no-timestamp --out \"" +
                      out.string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int s1 = invoke("1", out1);
  const int s4 = invoke("4", out4);
  const std::string a = slurp(out1), b = slurp(out4);
  const bool ok = s1 == 0 && s4 == 0 && !a.empty() && a == b;
  char detail[120];
  std::snprintf(detail, sizeof detail, "%zu bytes, %s", a.size(),
                ok ? "identical" : "MISMATCH");
  report(7, "deterministic CSV across worker counts", ok, detail);
  CHECK(ok);
  fs::remove(out1);
  fs::remove(out4);
}
