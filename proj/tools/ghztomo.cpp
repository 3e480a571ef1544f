// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end: simulate | theory | herald-info | kernel-check | sample-dump.
// Exit codes: 0 ok, 2 config/validation error, 3 kernel quadrature failure,
// 4 kernel-check deviation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "ghztomo/config.hpp"
#include "ghztomo/experiment.hpp"
#include "ghztomo/homodyne.hpp"
#include "ghztomo/kernel.hpp"
#include "ghztomo/rng.hpp"
#include "ghztomo/source.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitDeviation = 4;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw std::invalid_argument("output directory does not exist: " + parent.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write output file: " + path);
  out << text;
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> samples;
  std::string out;
  bool no_timestamp = false;
};

ghztomo::experiment::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  auto cfg = ghztomo::config::load(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.samples) cfg.samples = *opts.samples;
  if (!opts.out.empty()) cfg.output = opts.out;
  return cfg;
}

int run_simulate(const CommonOpts& opts) {
  auto cfg = load_with_overrides(opts);
  cfg.validate();
  auto table = ghztomo::experiment::run(cfg);
  write_output(cfg.output, table.to_csv(!opts.no_timestamp));
  return kExitOk;
}

int run_theory(const CommonOpts& opts) {
  auto cfg = load_with_overrides(opts);
  cfg.validate();
  double p1, p2, p3;
  ghztomo::source::heralded_weights(cfg.crystal.chi, cfg.crystal.eta1, p1, p2, p3);
  std::string text = "# generator: ghztomo theory\n# p1: " + fmt(p1) + "\n";
  text += "phi,c_theory\n";
  for (double phi : cfg.grid.values())
    text += fmt(phi) + "," + fmt(ghztomo::experiment::theoretical_C(cfg, phi)) + "\n";
  write_output(cfg.output, text);
  return kExitOk;
}

int run_herald_info(const CommonOpts& opts) {
  auto cfg = load_with_overrides(opts);
  cfg.crystal.validate();
  auto herald = ghztomo::source::herald(cfg.crystal);
  const double phase_sum = cfg.crystal.phi1 + cfg.crystal.phi_a + cfg.crystal.phi_b;
  std::cout << "p1:        " << fmt(herald.p1) << "\n"
            << "p2:        " << fmt(herald.p2) << "\n"
            << "p3:        " << fmt(herald.p3) << "\n"
            << "P_Phi:     " << fmt(herald.p_phi) << "\n"
            << "P_rho:     " << fmt(herald.p_rho) << "\n"
            << "phi_sum:   " << fmt(phase_sum) << "\n"
            << "ghz_phase: " << fmt(herald.ghz_phase) << "\n";
  return kExitOk;
}

int run_kernel_check(double eta, long trials, std::uint64_t seed) {
  using ghztomo::kernel::generic_operator_kernel;
  using ghztomo::kernel::matrix_element_kernel;
  ghztomo::rng::Stream stream(seed);
  double worst = 0.0;
  long worst_trial = -1;
  ghztomo::kernel::PairRequest worst_req;
  double worst_x = 0.0;

  for (long trial = 0; trial < trials; ++trial) {
    ghztomo::homodyne::PairSettings settings;
    settings.theta = std::asin(std::sqrt(stream.uniform()));
    settings.psi_o = 2.0 * std::numbers::pi * stream.uniform();
    settings.psi_e = 2.0 * std::numbers::pi * stream.uniform();
    const double x = stream.uniform(-4.0, 4.0);
    ghztomo::kernel::PairRequest req;
    req.n_o = static_cast<int>(stream.bits() % 3);
    req.m_o = static_cast<int>(stream.bits() % 3);
    req.n_e = static_cast<int>(stream.bits() % 3);
    req.m_e = static_cast<int>(stream.bits() % 3);

    auto direct = matrix_element_kernel(x, settings, req, eta);

    const int cutoff = std::max({req.n_o, req.m_o, req.n_e, req.m_e});
    const int dim = (cutoff + 1) * (cutoff + 1);
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
    const int row = req.m_o + (cutoff + 1) * req.m_e;  // |{m}><{n}|
    const int col = req.n_o + (cutoff + 1) * req.n_e;
    op(row, col) = 1.0;
    auto generic = generic_operator_kernel(op, cutoff, x, settings, eta);

    const double dev = std::abs(direct.value - generic.value);
    if (dev > worst) {
      worst = dev;
      worst_trial = trial;
      worst_req = req;
      worst_x = x;
    }
  }

  std::cout << "kernel-check: " << trials << " trials at eta = " << fmt(eta)
            << ", max |Eq.(10) - Eq.(8)| = " << fmt(worst) << "\n";
  if (worst >= 1e-8) {
    std::cout << "worst trial " << worst_trial << ": x = " << fmt(worst_x)
              << ", request (n_o,m_o,n_e,m_e) = (" << worst_req.n_o << ","
              << worst_req.m_o << "," << worst_req.n_e << "," << worst_req.m_e
              << ")\n";
    return kExitDeviation;
  }
  return kExitOk;
}

int run_sample_dump(const CommonOpts& opts, long n_samples) {
  auto cfg = load_with_overrides(opts);
  cfg.crystal.validate();
  auto herald = ghztomo::source::herald(cfg.crystal);

  std::string text = "# generator: ghztomo sample-dump\n";
  text += "# modes: ";
  const auto& layout = herald.state.component(0).layout();
  for (int i = 0; i < layout.size(); ++i)
    text += (i ? "," : "") + layout.label(i);
  text += "\n";
  for (int k = 0; k < herald.state.size(); ++k) {
    text += "# component " + std::to_string(k) + " weight " +
            fmt(herald.state.weight(k)) + "\n";
    text += herald.state.component(k).dump();
  }

  if (n_samples > 0) {
    text += "# samples: " + std::to_string(n_samples) + "\n";
    text += "# columns: theta_a psi_a_o psi_a_e theta_b psi_b_o psi_b_e "
            "theta_c psi_c_o psi_c_e x_a x_b x_c\n";
    ghztomo::rng::Stream stream = ghztomo::rng::Stream::for_block(cfg.seed, 0);
    for (long i = 0; i < n_samples; ++i) {
      auto settings = ghztomo::homodyne::draw_settings(stream);
      auto s = ghztomo::homodyne::sample(herald.state, settings, cfg.homodyne_eta,
                                         stream);
      std::string line;
      for (int j = 0; j < 3; ++j)
        line += fmt(settings.pair[j].theta) + "\t" + fmt(settings.pair[j].psi_o) +
                "\t" + fmt(settings.pair[j].psi_e) + "\t";
      line += fmt(s.x[0]) + "\t" + fmt(s.x[1]) + "\t" + fmt(s.x[2]) + "\n";
      text += line;
    }
  }
  write_output(cfg.output, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GHZ-state source simulator and homodyne tomography estimator"};
  app.require_subcommand(1);

  CommonOpts opts;
  double eta = 1.0;
  long trials = 1000;
  long dump_samples = 0;
  std::uint64_t check_seed = 1;

  enum class Overrides { kNone, kNoSamples, kAll };
  auto add_common = [&](CLI::App* cmd, Overrides mode = Overrides::kAll) {
    cmd->add_option("--config", opts.config_path, "Config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (mode != Overrides::kNone) {
      cmd->add_option("--seed", opts.seed, "Master seed override");
      cmd->add_option("--out", opts.out, "Output path override ('-' = stdout)");
      if (mode == Overrides::kAll)
        cmd->add_option("--samples", opts.samples, "Sample count override");
    }
  };

  auto* simulate = app.add_subcommand("simulate", "Run the tomographic Monte Carlo");
  add_common(simulate);
  simulate->add_flag("--no-timestamp", opts.no_timestamp,
                     "Suppress timestamp and wall-clock metadata");

  auto* theory = app.add_subcommand("theory", "Write the closed-form C(phi) curve");
  add_common(theory);

  auto* herald_info =
      app.add_subcommand("herald-info", "Print heralding weights and probabilities");
  add_common(herald_info, Overrides::kNone);

  auto* kernel_check = app.add_subcommand(
      "kernel-check", "Compare the factorized and generic operator kernels");
  kernel_check->add_option("--eta", eta, "Homodyne efficiency")->required();
  kernel_check->add_option("--trials", trials, "Number of random trials");
  kernel_check->add_option("--seed", check_seed, "RNG seed");

  auto* sample_dump = app.add_subcommand(
      "sample-dump", "Dump the heralded state and optional homodyne samples");
  add_common(sample_dump, Overrides::kNoSamples);
  sample_dump->add_option("--samples", dump_samples, "Number of homodyne samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(opts);
    if (theory->parsed()) return run_theory(opts);
    if (herald_info->parsed()) return run_herald_info(opts);
    if (kernel_check->parsed()) return run_kernel_check(eta, trials, check_seed);
    if (sample_dump->parsed()) return run_sample_dump(opts, dump_samples);
  } catch (const ghztomo::kernel::ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerics;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
