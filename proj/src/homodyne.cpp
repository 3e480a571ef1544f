// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace ghztomo::homodyne {

using polygauss::GaussPoly;
using polygauss::Poly;

namespace {

// Mode map taking the (o, e) pair into the measured mode A and its
// orthogonal complement B (column action on single-photon states):
//   |1_o> -> e^{-i psi_o} u_o |1_A> - e^{+i psi_e} u_e |1_B>
//   |1_e> -> e^{-i psi_e} u_e |1_A> + e^{+i psi_o} u_o |1_B>
Eigen::Matrix2cd measurement_matrix(const PairSettings& s) {
  const double uo = s.u_o(), ue = s.u_e();
  Eigen::Matrix2cd w;
  w << std::polar(uo, -s.psi_o), std::polar(ue, -s.psi_e),
       -std::polar(ue, s.psi_e), std::polar(uo, s.psi_o);
  return w;
}

MeasuredState reduce_with_dims(const PureKet& ket, const DetectorSettings& settings,
                               const std::array<int, 3>& dims) {
  const auto& groups = ket.layout().pair_groups();
  if (groups.size() != 3)
    throw std::invalid_argument("reduce_to_measured: layout needs 3 detector pairs");

  PureKet rotated = ket;
  for (int j = 0; j < 3; ++j)
    rotated = apply_pair_unitary(rotated, groups[j].first, groups[j].second,
                                 measurement_matrix(settings.pair[j]));

  const int dim = dims[0] * dims[1] * dims[2];
  MeasuredState out;
  out.dims = dims;
  out.rho = Eigen::MatrixXcd::Zero(dim, dim);

  // Group amplitudes by the unobserved occupations: everything except the
  // measured (o-slot) counts of the three pairs.
  std::map<std::uint64_t, std::vector<std::pair<int, Complex>>> buckets;
  rotated.for_each([&](const fock::OccupationVector& occ, Complex amp) {
    int idx = 0, stride = 1;
    fock::OccupationVector rest = occ;
    for (int j = 0; j < 3; ++j) {
      const int n = occ.count(groups[j].first);
      if (n >= dims[j])
        throw std::logic_error("reduce_to_measured: measured occupation beyond bound");
      idx += stride * n;
      stride *= dims[j];
      rest = rest.with_count(groups[j].first, 0);
    }
    buckets[rest.key()].emplace_back(idx, amp);
  });
  for (const auto& [key, terms] : buckets)
    for (const auto& [i, a] : terms)
      for (const auto& [j, b] : terms) out.rho(i, j) += a * std::conj(b);
  return out;
}

std::array<int, 3> pair_dims(const PureKet& ket) {
  const auto& groups = ket.layout().pair_groups();
  if (groups.size() != 3)
    throw std::invalid_argument("reduce_to_measured: layout needs 3 detector pairs");
  std::array<int, 3> dims;
  for (int j = 0; j < 3; ++j)
    dims[j] = 1 + ket.max_photons({groups[j].first, groups[j].second});
  return dims;
}

// Working view of a partially conditioned state: the first `dims.size()`
// detector pairs not yet fixed.
struct ChainState {
  Eigen::MatrixXcd rho;
  std::vector<int> dims;
};

// Weight matrix of the first remaining pair with the others traced out.
Eigen::MatrixXcd front_marginal(const ChainState& s) {
  const int d0 = s.dims[0];
  const int rest = static_cast<int>(s.rho.rows()) / d0;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(d0, d0);
  for (int n = 0; n < d0; ++n)
    for (int m = 0; m < d0; ++m)
      for (int r = 0; r < rest; ++r) w(n, m) += s.rho(n + d0 * r, m + d0 * r);
  return w;
}

GaussPoly law_from_weights(const Eigen::MatrixXcd& w, const CrossTermTable& table) {
  GaussPoly q;
  q.variance = table.variance();
  q.poly = Poly::Zero(2 * (w.rows() - 1) + 1);
  for (int n = 0; n < w.rows(); ++n)
    for (int m = 0; m < w.cols(); ++m) {
      const Poly& g = table.g(n, m).poly;
      q.poly.head(g.size()) += w(n, m).real() * g;
    }
  return q;
}

// Contracts the first pair against the cross-term values at outcome x.
ChainState condition_front(const ChainState& s, double x, const CrossTermTable& table) {
  const int d0 = s.dims[0];
  const int rest = static_cast<int>(s.rho.rows()) / d0;
  Eigen::MatrixXd g(d0, d0);
  for (int n = 0; n < d0; ++n)
    for (int m = 0; m < d0; ++m) g(n, m) = table.g(n, m)(x);
  ChainState out;
  out.dims.assign(s.dims.begin() + 1, s.dims.end());
  out.rho = Eigen::MatrixXcd::Zero(rest, rest);
  for (int r = 0; r < rest; ++r)
    for (int c = 0; c < rest; ++c) {
      Complex sum(0.0, 0.0);
      for (int n = 0; n < d0; ++n)
        for (int m = 0; m < d0; ++m) sum += s.rho(n + d0 * r, m + d0 * c) * g(n, m);
      out.rho(r, c) = sum;
    }
  return out;
}

}  // namespace

CrossTermTable::CrossTermTable(double eta, int max_occupation)
    : max_occ_(max_occupation), eta_(eta) {
  if (eta <= 0.0 || eta > 1.0)
    throw std::invalid_argument("CrossTermTable: eta must be in (0, 1]");
  variance_ = 0.25 / eta;
  const double sigma2 = 0.25 * (1.0 - eta) / eta;
  const double norm = std::sqrt(2.0 / std::numbers::pi);
  table_.reserve((max_occ_ + 1) * (max_occ_ + 1));
  for (int n = 0; n <= max_occ_; ++n)
    for (int m = 0; m <= max_occ_; ++m) {
      GaussPoly base{norm * polygauss::mul(polygauss::hermite_basis(n),
                                           polygauss::hermite_basis(m)),
                     0.25};
      table_.push_back(sigma2 > 0.0 ? polygauss::convolve_with_gaussian(base, sigma2)
                                    : base);
    }
}

MeasuredState reduce_to_measured(const PureKet& ket, const DetectorSettings& settings) {
  return reduce_with_dims(ket, settings, pair_dims(ket));
}

MeasuredState reduce_to_measured(const MixedEnsemble& ensemble,
                                 const DetectorSettings& settings) {
  if (ensemble.size() == 0)
    throw std::invalid_argument("reduce_to_measured: empty ensemble");
  std::array<int, 3> dims{1, 1, 1};
  for (int k = 0; k < ensemble.size(); ++k) {
    auto d = pair_dims(ensemble.component(k));
    for (int j = 0; j < 3; ++j) dims[j] = std::max(dims[j], d[j]);
  }
  MeasuredState out;
  out.dims = dims;
  const int dim = dims[0] * dims[1] * dims[2];
  out.rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < ensemble.size(); ++k)
    out.rho += ensemble.weight(k) *
               reduce_with_dims(ensemble.component(k), settings, dims).rho;
  return out;
}

JointDensity::JointDensity(const MixedEnsemble& ensemble,
                           const DetectorSettings& settings, double eta)
    : JointDensity(reduce_to_measured(ensemble, settings), eta) {}

JointDensity::JointDensity(MeasuredState state, double eta)
    : state_(std::move(state)),
      table_(eta, *std::max_element(state_.dims.begin(), state_.dims.end()) - 1) {}

double JointDensity::pdf(const Eigen::Vector3d& x) const {
  const auto& dims = state_.dims;
  std::array<Eigen::MatrixXd, 3> g;
  for (int j = 0; j < 3; ++j) {
    g[j].resize(dims[j], dims[j]);
    for (int n = 0; n < dims[j]; ++n)
      for (int m = 0; m < dims[j]; ++m) g[j](n, m) = table_.g(n, m)(x[j]);
  }
  const int dim = dims[0] * dims[1] * dims[2];
  Complex sum(0.0, 0.0);
  for (int r = 0; r < dim; ++r) {
    const int ra = r % dims[0], rb = (r / dims[0]) % dims[1], rc = r / (dims[0] * dims[1]);
    for (int c = 0; c < dim; ++c) {
      const Complex rho = state_.rho(r, c);
      if (rho == Complex(0.0, 0.0)) continue;
      const int ca = c % dims[0], cb = (c / dims[0]) % dims[1], cc = c / (dims[0] * dims[1]);
      sum += rho * (g[0](ra, ca) * g[1](rb, cb) * g[2](rc, cc));
    }
  }
  return std::max(sum.real(), 0.0);
}

polygauss::GaussPoly JointDensity::marginal(int j) const {
  const auto& dims = state_.dims;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(dims[j], dims[j]);
  const int dim = dims[0] * dims[1] * dims[2];
  const int stride = j == 0 ? 1 : (j == 1 ? dims[0] : dims[0] * dims[1]);
  const int dj = dims[j];
  for (int r = 0; r < dim; ++r) {
    const int kj = (r / stride) % dj;
    const int base = r - kj * stride;
    for (int m = 0; m < dj; ++m) w(kj, m) += state_.rho(r, base + m * stride);
  }
  return law_from_weights(w, table_);
}

double joint_pdf(const MixedEnsemble& ensemble, const DetectorSettings& settings,
                 double eta, const Eigen::Vector3d& x) {
  return JointDensity(ensemble, settings, eta).pdf(x);
}

Law1D::Law1D(GaussPoly q) : q_(std::move(q)) {
  norm_ = q_.integral();
  if (!(norm_ > 0.0)) throw std::domain_error("Law1D: law does not integrate to > 0");
  mean_ = q_.mean();
  const double var = q_.second_moment() - mean_ * mean_;
  stddev_ = std::sqrt(std::max(var, 1e-300));

  const double lo = mean_ - 6.0 * stddev_, hi = mean_ + 6.0 * stddev_;
  const int initial = 17;
  xs_.resize(initial);
  for (int i = 0; i < initial; ++i)
    xs_[i] = lo + (hi - lo) * i / static_cast<double>(initial - 1);
  us_.resize(xs_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) us_[i] = cdf(xs_[i]);

  // Refine until no interval carries more than 1/32 of the mass; intervals
  // that are wide in x are also split as long as they hold appreciable mass,
  // which keeps the tail bracketing tight. The Newton polish in quantile()
  // removes the remaining interpolation error.
  const double max_mass = 1.0 / 32.0;
  const double max_width = (hi - lo) / 32.0;
  const std::size_t cap = 4096;
  bool changed = true;
  while (changed && xs_.size() < cap) {
    changed = false;
    std::vector<double> nx, nu;
    nx.reserve(2 * xs_.size());
    nu.reserve(2 * xs_.size());
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
      nx.push_back(xs_[i]);
      nu.push_back(us_[i]);
      const double mass = us_[i + 1] - us_[i];
      const bool split =
          mass > max_mass || (xs_[i + 1] - xs_[i] > max_width && mass > 1e-7);
      if (split && nx.size() + xs_.size() < cap) {
        const double mid = 0.5 * (xs_[i] + xs_[i + 1]);
        nx.push_back(mid);
        nu.push_back(cdf(mid));
        changed = true;
      }
    }
    nx.push_back(xs_.back());
    nu.push_back(us_.back());
    xs_.swap(nx);
    us_.swap(nu);
  }

  // Monotone (Fritsch-Butland) slopes for the inverse map x(u).
  const std::size_t n = xs_.size();
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double du = us_[i + 1] - us_[i];
    delta[i] = du > 0.0 ? (xs_[i + 1] - xs_[i]) / du : 0.0;
  }
  slopes_.assign(n, 0.0);
  slopes_[0] = delta[0];
  slopes_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] > 0.0 && delta[i] > 0.0)
      slopes_[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
  }
}

double Law1D::cdf(double x) const {
  return std::clamp(q_.lower_integral(x) / norm_, 0.0, 1.0);
}

double Law1D::quantile(double u) const {
  u = std::clamp(u, us_.front(), us_.back());
  auto it = std::upper_bound(us_.begin(), us_.end(), u);
  std::size_t i = it == us_.begin() ? 0 : static_cast<std::size_t>(it - us_.begin()) - 1;
  i = std::min(i, us_.size() - 2);
  const double du = us_[i + 1] - us_[i];
  if (du <= 0.0) return xs_[i];
  const double t = (u - us_[i]) / du;
  const double t2 = t * t, t3 = t2 * t;
  double x = (2 * t3 - 3 * t2 + 1) * xs_[i] + (t3 - 2 * t2 + t) * du * slopes_[i] +
             (-2 * t3 + 3 * t2) * xs_[i + 1] + (t3 - t2) * du * slopes_[i + 1];
  // Newton polish against the exact CDF; skipped where the density is too
  // small for a stable step.
  for (int iter = 0; iter < 4; ++iter) {
    const double density = q_(x) / norm_;
    if (!(density > 1e-12)) break;
    const double step = (cdf(x) - u) / density;
    if (!(std::abs(step) < xs_[i + 1] - xs_[i] + 1e-300)) break;
    x -= step;
    if (std::abs(step) < 1e-12 * (1.0 + std::abs(x))) break;
  }
  return std::clamp(x, xs_[i] - (xs_[i + 1] - xs_[i]), xs_[i + 1] + (xs_[i + 1] - xs_[i]));
}

double Law1D::draw(rng::Stream& stream) const {
  const double u = us_.front() + (us_.back() - us_.front()) * stream.uniform();
  return quantile(u);
}

DetectorSettings draw_settings(rng::Stream& stream) {
  DetectorSettings s;
  for (int j = 0; j < 3; ++j) {
    s.pair[j].theta = std::asin(std::sqrt(stream.uniform()));
    s.pair[j].psi_o = 2.0 * std::numbers::pi * stream.uniform();
    s.pair[j].psi_e = 2.0 * std::numbers::pi * stream.uniform();
  }
  return s;
}

HomodyneSample sample(const MixedEnsemble& ensemble, const DetectorSettings& settings,
                      double eta, rng::Stream& stream) {
  ensemble.validate(1e-9);
  // Mixture component, then the conditional chain x_a -> x_b -> x_c.
  int pick = ensemble.size() - 1;
  double u = stream.uniform() * ensemble.total_weight();
  double acc = 0.0;
  for (int k = 0; k < ensemble.size(); ++k) {
    acc += ensemble.weight(k);
    if (u < acc) {
      pick = k;
      break;
    }
  }
  MeasuredState ms = reduce_to_measured(ensemble.component(pick), settings);
  CrossTermTable table(eta, *std::max_element(ms.dims.begin(), ms.dims.end()) - 1);
  ChainState chain{ms.rho, {ms.dims.begin(), ms.dims.end()}};

  HomodyneSample out;
  out.settings = settings;
  out.eta = eta;
  for (int j = 0; j < 3; ++j) {
    Law1D law(law_from_weights(front_marginal(chain), table));
    out.x[j] = law.draw(stream);
    if (j < 2) chain = condition_front(chain, out.x[j], table);
  }
  return out;
}

Eigen::Vector3d conditional_cdf_chain(const MixedEnsemble& ensemble,
                                      const HomodyneSample& s) {
  MeasuredState ms = reduce_to_measured(ensemble, s.settings);
  CrossTermTable table(s.eta, *std::max_element(ms.dims.begin(), ms.dims.end()) - 1);
  ChainState chain{ms.rho, {ms.dims.begin(), ms.dims.end()}};
  Eigen::Vector3d u;
  for (int j = 0; j < 3; ++j) {
    GaussPoly q = law_from_weights(front_marginal(chain), table);
    u[j] = std::clamp(q.lower_integral(s.x[j]) / q.integral(), 0.0, 1.0);
    if (j < 2) chain = condition_front(chain, s.x[j], table);
  }
  return u;
}

}  // namespace ghztomo::homodyne
