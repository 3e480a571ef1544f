// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "ghztomo/experiment.hpp"
#include "ghztomo/homodyne.hpp"
#include "support.hpp"

using namespace ghztomo;
using experiment::ExperimentConfig;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig fig2_left_config() {
  ExperimentConfig cfg;
  cfg.crystal.gamma = 0.1;
  cfg.crystal.chi = 0.3 * kPi;
  cfg.crystal.eta1 = 0.3;
  cfg.crystal.eta2 = 0.3;
  cfg.homodyne_eta = 0.85;
  cfg.samples = 20000;
  cfg.blocks = 10;
  cfg.seed = 5150;
  cfg.grid = {0.0, 2.0 * kPi * 15.0 / 16.0, 16};
  return cfg;
}

source::HeraldedOutput vacuum_herald() {
  source::HeraldedOutput h;
  h.p1 = 1.0;
  h.p_phi = 1.0;
  h.p_rho = 1.0;
  h.state.add_component(1.0, fock::PureKet::vacuum(source::signal_layout()));
  return h;
}

}  // namespace

TEST_CASE("phi grid") {
  experiment::PhiGrid grid{0.0, 2.0 * kPi * 15.0 / 16.0, 16};
  auto v = grid.values();
  REQUIRE(v.size() == 16);
  CHECK(v[8] == doctest::Approx(kPi).epsilon(1e-15));
  experiment::PhiGrid single{1.5, 9.0, 1};
  CHECK(single.values() == std::vector<double>{1.5});
}

TEST_CASE("theoretical C(phi)") {
  auto cfg = fig2_left_config();

  SUBCASE("zero at the GHZ phase, p1 at the opposite phase") {
    CHECK(experiment::theoretical_C(cfg, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    double p1, p2, p3;
    source::heralded_weights(cfg.crystal.chi, cfg.crystal.eta1, p1, p2, p3);
    CHECK(experiment::theoretical_C(cfg, kPi) == doctest::Approx(p1).epsilon(1e-14));
    CHECK(p1 == doctest::Approx(0.730191).epsilon(1e-5));
  }
  SUBCASE("Fig.-2-right peak value") {
    cfg.crystal.chi = 0.4 * kPi;
    CHECK(experiment::theoretical_C(cfg, kPi) ==
          doctest::Approx(0.93118).epsilon(2e-5));
  }
  SUBCASE("phase offset shifts the curve") {
    cfg.crystal.phi1 = 0.8;
    cfg.crystal.phi_a = 1.3;
    cfg.crystal.phi_b = 0.4;
    const double offset = 0.8 + 1.3 + 0.4;
    CHECK(experiment::theoretical_C(cfg, offset) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("oracle C(phi) agrees with the closed form") {
  rng::Stream stream(1234);
  for (int trial = 0; trial < 6; ++trial) {
    ExperimentConfig cfg = fig2_left_config();
    cfg.crystal.gamma = stream.uniform(0.05, 0.25);
    cfg.crystal.chi = stream.uniform(0.1, 0.45) * kPi;
    cfg.crystal.phi1 = stream.uniform(0.0, 2.0 * kPi);
    cfg.crystal.phi_a = stream.uniform(0.0, 2.0 * kPi);
    cfg.crystal.phi_b = stream.uniform(0.0, 2.0 * kPi);
    cfg.crystal.eta1 = stream.uniform(0.1, 1.0);
    cfg.crystal.port =
        stream.bits() % 2 ? source::HeraldPort::kPlus : source::HeraldPort::kMinus;
    for (int i = 0; i < 32; ++i) {
      const double phi = 2.0 * kPi * i / 32.0;
      CHECK(std::abs(experiment::oracle_C(cfg, phi) -
                     experiment::theoretical_C(cfg, phi)) < 1e-12);
    }
  }

  SUBCASE("pure GHZ overlap reaches 1") {
    auto cfg = fig2_left_config();
    cfg.crystal.eta1 = 1.0;
    CHECK(experiment::oracle_C(cfg, kPi) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("single-photon component never overlaps the projector") {
    auto layout = source::signal_layout();
    auto one_co = fock::PureKet::basis(layout, {{"c_o", 1}});
    for (double phi : {0.0, 1.0, kPi}) {
      fock::PureKet projector(layout);
      std::vector<int> ooo(layout->size(), 0), eee(layout->size(), 0);
      for (const auto& m : {"a_o", "b_o", "c_o"}) ooo[layout->index_of(m)] = 1;
      for (const auto& m : {"a_e", "b_e", "c_e"}) eee[layout->index_of(m)] = 1;
      projector.add(fock::OccupationVector(*layout, ooo), 1.0 / std::numbers::sqrt2);
      projector.add(fock::OccupationVector(*layout, eee),
                    std::polar(1.0 / std::numbers::sqrt2, phi));
      CHECK(std::norm(fock::inner_product(projector, one_co)) == 0.0);
    }
  }
}

TEST_CASE("config validation messages") {
  auto cfg = fig2_left_config();
  cfg.samples = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "N >= B >= 2 violated", std::invalid_argument);
  cfg = fig2_left_config();
  cfg.blocks = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = fig2_left_config();
  cfg.homodyne_eta = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = fig2_left_config();
  cfg.grid.points = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("vacuum ensemble gives C = 0 within errors") {
  auto cfg = fig2_left_config();
  cfg.samples = 20000;
  auto table = experiment::run_with_ensemble(cfg, vacuum_herald());
  for (const auto& row : table.rows) {
    CHECK(row.c_err > 0.0);
    CHECK(std::abs(row.c_est) < 5.0 * row.c_err);
  }
}

TEST_CASE("run on the heralded ensemble") {
  auto cfg = fig2_left_config();
  cfg.samples = 60000;
  auto table = experiment::run(cfg);

  double p1, p2, p3;
  source::heralded_weights(cfg.crystal.chi, cfg.crystal.eta1, p1, p2, p3);

  SUBCASE("rows assemble the three estimators exactly") {
    for (const auto& row : table.rows) {
      const std::complex<double> rot = std::polar(1.0, row.phi);
      const double expected =
          0.5 * (table.d_ooo.mean.real() + table.d_eee.mean.real() +
                 2.0 * (rot * table.off_diag.mean).real());
      CHECK(row.c_est == doctest::Approx(expected).epsilon(1e-14));
      CHECK(row.c_theory ==
            doctest::Approx(experiment::theoretical_C(cfg, row.phi)).epsilon(1e-14));
      CHECK(row.c_theory >= 0.0);
      CHECK(row.c_theory <= p1 + 1e-12);
    }
  }

  SUBCASE("diagonal estimators are real within errors and near p1/2") {
    CHECK(std::abs(table.d_ooo.mean.imag()) < 5.0 * table.d_ooo.std_error.imag());
    CHECK(std::abs(table.d_eee.mean.imag()) < 5.0 * table.d_eee.std_error.imag());
    CHECK(std::abs(table.d_ooo.mean.real() - 0.5 * p1) <
          5.0 * table.d_ooo.std_error.real());
    CHECK(std::abs(table.d_eee.mean.real() - 0.5 * p1) <
          5.0 * table.d_eee.std_error.real());
  }

  SUBCASE("the curve is a sinusoid with alpha ~ beta ~ p1/2") {
    const double alpha = 0.5 * (table.d_ooo.mean.real() + table.d_eee.mean.real());
    const double beta = std::abs(table.off_diag.mean);
    const double err = table.d_ooo.std_error.real() + table.d_eee.std_error.real() +
                       2.0 * std::abs(table.off_diag.std_error);
    CHECK(std::abs(alpha - beta) < 5.0 * err);
    CHECK(std::abs(alpha + beta - p1) < 5.0 * err);
  }

  SUBCASE("metadata propagated") {
    CHECK(table.p1 == doctest::Approx(p1).epsilon(1e-12));
    CHECK(table.ghz_phase == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(table.p_rho ==
          doctest::Approx(table.p_phi *
                          (1.0 - cfg.crystal.eta1 *
                                     std::pow(std::cos(cfg.crystal.chi), 2)))
              .epsilon(1e-12));
  }
}

TEST_CASE("bit-reproducible across worker counts") {
  auto cfg = fig2_left_config();
  cfg.samples = 6000;
  cfg.blocks = 6;

  setenv("GHZTOMO_THREADS", "1", 1);
  auto serial = experiment::run(cfg).to_csv(false);
  setenv("GHZTOMO_THREADS", "2", 1);
  auto threaded = experiment::run(cfg).to_csv(false);
  unsetenv("GHZTOMO_THREADS");
  CHECK(serial == threaded);

  // a different seed must change the estimates
  cfg.seed += 1;
  auto other = experiment::run(cfg).to_csv(false);
  CHECK(other != serial);
}

TEST_CASE("coverage of 2-sigma intervals over independent runs") {
  auto cfg = fig2_left_config();
  cfg.samples = 100000;
  cfg.grid = {kPi / 4.0, 7.0 * kPi / 4.0, 4};

  int covered = 0, total = 0;
  for (int run_idx = 0; run_idx < 30; ++run_idx) {
    cfg.seed = 9000 + run_idx;
    auto table = experiment::run(cfg);
    for (const auto& row : table.rows) {
      ++total;
      if (std::abs(row.c_est - row.c_theory) <= 2.0 * row.c_err) ++covered;
    }
  }
  // nominal 2-sigma coverage ~95%; require >= 90%
  CHECK(covered >= static_cast<int>(0.9 * total));
}
