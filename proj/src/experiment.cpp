// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ghztomo/homodyne.hpp"
#include "ghztomo/rng.hpp"

namespace ghztomo::experiment {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("GHZTOMO_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double effective_ghz_phase(const source::CrystalParams& c) {
  double phase = c.phi1 + c.phi_a + c.phi_b;
  if (c.port == source::HeraldPort::kMinus) phase += std::numbers::pi;
  phase = std::fmod(phase, 2.0 * std::numbers::pi);
  if (phase < 0.0) phase += 2.0 * std::numbers::pi;
  return phase;
}

std::vector<kernel::KernelRequest> ghz_requests(double eta) {
  kernel::KernelRequest d_ooo, d_eee, off;
  for (int j = 0; j < 3; ++j) {
    d_ooo.pair[j] = {1, 1, 0, 0};
    d_eee.pair[j] = {0, 0, 1, 1};
    off.pair[j] = {1, 0, 0, 1};  // <ooo| on the left, |eee> on the right
  }
  d_ooo.eta = d_eee.eta = off.eta = eta;
  return {d_ooo, d_eee, off};
}

}  // namespace

std::vector<double> PhiGrid::values() const {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i)
    v[i] = points == 1 ? start : start + (stop - start) * i / (points - 1.0);
  return v;
}

void ExperimentConfig::validate() const {
  crystal.validate();
  if (samples < blocks || blocks < 2)
    throw std::invalid_argument("N >= B >= 2 violated");
  if (homodyne_eta <= 0.5 || homodyne_eta > 1.0)
    throw std::invalid_argument("homodyne eta must be in (0.5, 1]");
  if (grid.points < 1) throw std::invalid_argument("phi grid must be non-empty");
}

double theoretical_C(const ExperimentConfig& config, double phi) {
  double p1, p2, p3;
  source::heralded_weights(config.crystal.chi, config.crystal.eta1, p1, p2, p3);
  const double offset = effective_ghz_phase(config.crystal);
  return 0.5 * p1 * (1.0 - std::cos(phi - offset));
}

double oracle_C(const ExperimentConfig& config, double phi) {
  const source::HeraldedOutput herald = source::herald(config.crystal);
  const auto& layout = herald.state.component(0).layout();
  auto layout_ptr = herald.state.component(0).layout_ptr();

  fock::PureKet projector(layout_ptr);
  std::vector<int> ooo(layout.size(), 0), eee(layout.size(), 0);
  for (const auto& m : {"a_o", "b_o", "c_o"}) ooo[layout.index_of(m)] = 1;
  for (const auto& m : {"a_e", "b_e", "c_e"}) eee[layout.index_of(m)] = 1;
  const double s = 1.0 / std::numbers::sqrt2;
  projector.add(fock::OccupationVector(layout, ooo), s);
  projector.add(fock::OccupationVector(layout, eee), s * std::polar(1.0, phi));

  double c = 0.0;
  for (int k = 0; k < herald.state.size(); ++k)
    c += herald.state.weight(k) *
         std::norm(fock::inner_product(projector, herald.state.component(k)));
  return c;
}

ResultTable run(const ExperimentConfig& config) {
  config.validate();
  return run_with_ensemble(config, source::herald(config.crystal));
}

ResultTable run_with_ensemble(const ExperimentConfig& config,
                              const source::HeraldedOutput& herald) {
  config.validate();
  herald.state.validate(1e-9);
  const auto t0 = std::chrono::steady_clock::now();

  const int blocks = config.blocks;
  const long n = config.samples;
  kernel::TomographyAccumulator acc(ghz_requests(config.homodyne_eta), blocks);

  // Deterministic partition: block b owns n/B samples plus one of the
  // remainder, with its own RNG stream; workers grab blocks off a counter,
  // so the result is independent of the worker count.
  std::atomic<int> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    try {
      for (;;) {
        const int b = next_block.fetch_add(1);
        if (b >= blocks) return;
        rng::Stream stream = rng::Stream::for_block(config.seed, b);
        const long quota = n / blocks + (b < n % blocks ? 1 : 0);
        for (long i = 0; i < quota; ++i) {
          auto settings = homodyne::draw_settings(stream);
          auto sample = homodyne::sample(herald.state, settings,
                                         config.homodyne_eta, stream);
          acc.add(sample, b);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const int workers = std::min(worker_count(), blocks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  auto results = acc.finalize();

  ResultTable table;
  table.config = config;
  table.p1 = herald.p1;
  table.p2 = herald.p2;
  table.p3 = herald.p3;
  table.p_phi = herald.p_phi;
  table.p_rho = herald.p_rho;
  table.ghz_phase = herald.ghz_phase;
  table.d_ooo = results[0];
  table.d_eee = results[1];
  table.off_diag = results[2];

  for (double phi : config.grid.values()) {
    ResultRow row;
    row.phi = phi;
    const Complex rot = std::polar(1.0, phi);
    row.c_est = 0.5 * (results[0].mean.real() + results[1].mean.real() +
                       2.0 * (rot * results[2].mean).real());
    // Block spread of the same linear assembly.
    double var = 0.0;
    double mean_b = 0.0;
    std::vector<double> c_blocks(blocks);
    for (int b = 0; b < blocks; ++b) {
      c_blocks[b] = 0.5 * (results[0].block_means[b].real() +
                           results[1].block_means[b].real() +
                           2.0 * (rot * results[2].block_means[b]).real());
      mean_b += c_blocks[b];
    }
    mean_b /= blocks;
    for (int b = 0; b < blocks; ++b)
      var += (c_blocks[b] - mean_b) * (c_blocks[b] - mean_b);
    var /= blocks - 1;
    row.c_err = std::sqrt(var / blocks);
    row.c_theory = theoretical_C(config, phi);
    table.rows.push_back(row);
  }

  table.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

std::string ResultTable::to_csv(bool with_timestamp) const {
  std::ostringstream os;
  os << "# generator: ghztomo simulate\n";
  os << "# seed: " << config.seed << "\n";
  os << "# samples: " << config.samples << "\n";
  os << "# blocks: " << config.blocks << "\n";
  os << "# gamma: " << fmt(config.crystal.gamma) << "\n";
  os << "# phi1: " << fmt(config.crystal.phi1) << "\n";
  os << "# chi: " << fmt(config.crystal.chi) << "\n";
  os << "# phi_a: " << fmt(config.crystal.phi_a) << "\n";
  os << "# phi_b: " << fmt(config.crystal.phi_b) << "\n";
  os << "# eta1: " << fmt(config.crystal.eta1) << "\n";
  os << "# eta2: " << fmt(config.crystal.eta2) << "\n";
  os << "# herald_port: "
     << (config.crystal.port == source::HeraldPort::kPlus ? "plus" : "minus") << "\n";
  os << "# homodyne_eta: " << fmt(config.homodyne_eta) << "\n";
  os << "# p1: " << fmt(p1) << "\n";
  os << "# p2: " << fmt(p2) << "\n";
  os << "# p3: " << fmt(p3) << "\n";
  os << "# p_phi: " << fmt(p_phi) << "\n";
  os << "# p_rho: " << fmt(p_rho) << "\n";
  os << "# ghz_phase: " << fmt(ghz_phase) << "\n";
  os << "# d_ooo: " << fmt(d_ooo.mean.real()) << " " << fmt(d_ooo.mean.imag()) << " +- "
     << fmt(d_ooo.std_error.real()) << " " << fmt(d_ooo.std_error.imag()) << "\n";
  os << "# d_eee: " << fmt(d_eee.mean.real()) << " " << fmt(d_eee.mean.imag()) << " +- "
     << fmt(d_eee.std_error.real()) << " " << fmt(d_eee.std_error.imag()) << "\n";
  os << "# off_diag: " << fmt(off_diag.mean.real()) << " " << fmt(off_diag.mean.imag())
     << " +- " << fmt(off_diag.std_error.real()) << " " << fmt(off_diag.std_error.imag())
     << "\n";
  if (with_timestamp) {
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# timestamp: " << stamp << "\n";
    os << "# wall_clock_s: " << fmt(wall_seconds) << "\n";
  }
  os << "phi,c_est,c_err,c_theory\n";
  for (const auto& row : rows)
    os << fmt(row.phi) << "," << fmt(row.c_est) << "," << fmt(row.c_err) << ","
       << fmt(row.c_theory) << "\n";
  return os.str();
}

}  // namespace ghztomo::experiment
