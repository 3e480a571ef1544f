// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/kernel.hpp"

#include <cmath>
#include <numbers>

#include "ghztomo/polygauss.hpp"
#include "ghztomo/quadrature.hpp"

namespace ghztomo::kernel {

using polygauss::Poly;

namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kTailTol = 1e-12;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

Complex ipow_minus_i(int e) {
  static const Complex table[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return table[e % 4];
}

// Coefficients of L_n^alpha(z) in z.
Poly laguerre_poly(int n, int alpha) {
  Poly prev = Poly::Zero(1), cur = Poly::Zero(std::max(n, 1) + 1);
  prev[0] = 1.0;
  if (n == 0) return prev;
  cur.setZero();
  cur[0] = 1.0 + alpha;
  cur[1] = -1.0;
  Poly prev_full = Poly::Zero(n + 1);
  prev_full[0] = 1.0;
  Poly cur_full = Poly::Zero(n + 1);
  cur_full.head(2) = cur.head(2);
  for (int k = 1; k < n; ++k) {
    Poly next = Poly::Zero(n + 1);
    next.head(k + 2).tail(k + 1) -= cur_full.head(k + 1);           // -z L_k
    next.head(k + 1) += (2 * k + 1 + alpha) * cur_full.head(k + 1); // (2k+1+a) L_k
    next.head(k + 1) -= (k + alpha) * prev_full.head(k + 1);        // -(k+a) L_{k-1}
    next /= k + 1.0;
    prev_full = cur_full;
    cur_full = next;
  }
  return cur_full;
}

// Polynomial part of the pair-kernel integrand after t = s^2:
//   P(s) = 2 s^{3 + d_o + d_e} L_{nu_o}^{d_o}(kappa u_o^2 s^2)
//                               L_{nu_e}^{d_e}(kappa u_e^2 s^2).
Poly integrand_poly(const PairRequest& r, double kappa, double u_o, double u_e) {
  const int mu_o = std::max(r.n_o, r.m_o), nu_o = std::min(r.n_o, r.m_o);
  const int mu_e = std::max(r.n_e, r.m_e), nu_e = std::min(r.n_e, r.m_e);
  Poly in_s = Poly::Zero(4 + (mu_o - nu_o) + (mu_e - nu_e));
  in_s[in_s.size() - 1] = 2.0;
  for (int side = 0; side < 2; ++side) {
    const int nu = side == 0 ? nu_o : nu_e;
    const int d = side == 0 ? mu_o - nu_o : mu_e - nu_e;
    const double u = side == 0 ? u_o : u_e;
    Poly lag = laguerre_poly(nu, d);
    Poly in_s2 = Poly::Zero(2 * (lag.size() - 1) + 1);
    double scale = 1.0;
    for (Eigen::Index k = 0; k < lag.size(); ++k) {
      in_s2[2 * k] = lag[k] * scale;
      scale *= kappa * u * u;
    }
    in_s = polygauss::mul(in_s, in_s2);
  }
  return in_s;
}

// integral_R^inf |P_k| s^k e^{-s^2} ds summed over monomials.
double tail_bound(const Poly& p, double R) {
  std::vector<double> ik(p.size());
  const double g = std::exp(-R * R);
  if (p.size() > 0) ik[0] = 0.5 * std::sqrt(std::numbers::pi) * std::erfc(R);
  if (p.size() > 1) ik[1] = 0.5 * g;
  double rpow = R;  // R^{k-1}
  for (Eigen::Index k = 2; k < p.size(); ++k) {
    ik[k] = 0.5 * (rpow * g + (k - 1) * ik[k - 2]);
    rpow *= R;
  }
  double bound = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) bound += std::abs(p[k]) * ik[k];
  return bound;
}

double upper_limit(std::span<const Poly> polys) {
  double R = 6.0;
  while (R < 16.0) {
    double worst = 0.0;
    for (const auto& p : polys) worst = std::max(worst, tail_bound(p, R));
    if (worst <= kTailTol) break;
    R += 1.0;
  }
  return R;
}

// Fixed-size quadrature pass over up to N request polynomials; keeps the
// inner loop free of heap traffic.
template <int N>
void integrate_requests(const std::vector<Poly>& polys, double beta, double upper,
                        std::span<KernelValue> out) {
  using Vec = Eigen::Matrix<Complex, N, 1>;
  auto integrand = [&](double s) -> Vec {
    const Complex osc = std::exp(Complex(-s * s, 2.0 * beta * s));
    Vec v;
    for (int i = 0; i < N; ++i) v[i] = polygauss::eval(polys[i], s) * osc;
    return v;
  };
  auto integral = quad::adaptive_gauss_kronrod(integrand, 0.0, upper, kQuadTol);
  for (int i = 0; i < N; ++i) out[i] = {integral.value[i], integral.converged};
}

// <p| exp(zeta a) |q> in a truncated single-mode basis.
Eigen::MatrixXcd lowering_exponential(Complex zeta, int dim) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int q = 0; q < dim; ++q) {
    Complex zpow(1.0, 0.0);
    for (int p = q; p >= 0; --p) {
      const int k = q - p;
      m(p, q) = zpow * std::sqrt(factorial(q) / factorial(p)) / factorial(k);
      zpow *= zeta;
    }
  }
  return m;
}

struct GenericEval {
  Complex value;
  bool converged;
};

GenericEval generic_eval(const Eigen::MatrixXcd& op, const std::vector<int>& cutoffs,
                         double x, const GenericSettings& settings, double kappa) {
  const int modes = static_cast<int>(cutoffs.size());
  const double beta = std::sqrt(kappa) * x;
  const int big_m = modes - 1;

  std::vector<int> dims(modes);
  int dim = 1;
  for (int l = 0; l < modes; ++l) {
    dims[l] = cutoffs[l] + 1;
    dim *= dims[l];
  }
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("generic_operator_kernel: operator dimension mismatch");

  auto integrand = [&](double s) -> Complex {
    // Per-mode normally ordered displacement blocks S_l = F_l^H G_l with
    // F = exp(+i sqrt(kappa) s A), G = exp(-i sqrt(kappa) s A).
    std::vector<Eigen::MatrixXcd> blocks(modes);
    for (int l = 0; l < modes; ++l) {
      const Complex zg = Complex(0.0, -1.0) * std::sqrt(kappa) * s *
                         std::polar(settings.u[l], -settings.psi[l]);
      Eigen::MatrixXcd g = lowering_exponential(zg, dims[l]);
      // (e^{-i sqrt(kappa t) A^dag})^dag = e^{+i sqrt(kappa t) A}
      Eigen::MatrixXcd f = lowering_exponential(-zg, dims[l]);
      blocks[l] = f.adjoint() * g;
    }
    Complex trace(0.0, 0.0);
    for (int p = 0; p < dim; ++p)
      for (int q = 0; q < dim; ++q) {
        const Complex o = op(p, q);
        if (o == Complex(0.0, 0.0)) continue;
        Complex s_qp(1.0, 0.0);
        int pp = p, qq = q;
        for (int l = 0; l < modes; ++l) {
          s_qp *= blocks[l](qq % dims[l], pp % dims[l]);
          pp /= dims[l];
          qq /= dims[l];
        }
        trace += o * s_qp;
      }
    double spow = 2.0 * s;  // 2 s^{2M+1}
    for (int k = 0; k < 2 * big_m; ++k) spow *= s;
    return spow * std::exp(Complex(-s * s, 2.0 * beta * s)) * trace;
  };

  double upper = 6.0;
  while (upper < 16.0 && std::max(std::abs(integrand(upper)),
                                  std::abs(integrand(upper - 0.25))) > kTailTol)
    upper += 1.0;
  auto integral = quad::adaptive_gauss_kronrod(integrand, 0.0, upper, kQuadTol);
  const double prefactor = std::pow(kappa, modes) / factorial(big_m);
  return {prefactor * integral.value, integral.converged};
}

Eigen::MatrixXcd embed_operator(const Eigen::MatrixXcd& op,
                                const std::vector<int>& cutoffs,
                                const std::vector<int>& grown) {
  const int modes = static_cast<int>(cutoffs.size());
  int dim_small = 1, dim_big = 1;
  for (int l = 0; l < modes; ++l) {
    dim_small *= cutoffs[l] + 1;
    dim_big *= grown[l] + 1;
  }
  auto map_index = [&](int idx) {
    int out = 0, stride = 1;
    for (int l = 0; l < modes; ++l) {
      out += (idx % (cutoffs[l] + 1)) * stride;
      idx /= cutoffs[l] + 1;
      stride *= grown[l] + 1;
    }
    return out;
  };
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(dim_big, dim_big);
  for (int p = 0; p < dim_small; ++p)
    for (int q = 0; q < dim_small; ++q) big(map_index(p), map_index(q)) = op(p, q);
  return big;
}

}  // namespace

double kappa_of(double eta) {
  if (eta <= 0.5 || eta > 1.0)
    throw std::invalid_argument("kappa_of: eta must be in (0.5, 1]");
  return 2.0 * eta / (2.0 * eta - 1.0);
}

double laguerre(int n, int alpha, double z) {
  if (n < 0 || alpha < 0) throw std::invalid_argument("laguerre: n, alpha must be >= 0");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - z;
  for (int k = 1; k < n; ++k) {
    double next = ((2 * k + 1 + alpha - z) * cur - (k + alpha) * prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

void KernelRequest::validate() const {
  if (eta <= 0.5 || eta > 1.0)
    throw std::invalid_argument("KernelRequest: eta must be in (0.5, 1]");
  for (const auto& p : pair)
    if (p.n_o < 0 || p.m_o < 0 || p.n_e < 0 || p.m_e < 0)
      throw std::invalid_argument("KernelRequest: negative occupation");
}

std::vector<KernelValue> matrix_element_kernel(double x,
                                               const homodyne::PairSettings& settings,
                                               std::span<const PairRequest> requests,
                                               double eta) {
  const double kappa = kappa_of(eta);
  const double u_o = settings.u_o(), u_e = settings.u_e();
  const double beta = std::sqrt(kappa) * x;
  const auto n = static_cast<Eigen::Index>(requests.size());

  std::vector<Poly> polys(requests.size());
  Eigen::VectorXcd prefactors(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PairRequest& r = requests[i];
    polys[i] = integrand_poly(r, kappa, u_o, u_e);
    const int d_o = std::abs(r.n_o - r.m_o), d_e = std::abs(r.n_e - r.m_e);
    const int nu_o = std::min(r.n_o, r.m_o), mu_o = std::max(r.n_o, r.m_o);
    const int nu_e = std::min(r.n_e, r.m_e), mu_e = std::max(r.n_e, r.m_e);
    Complex pref = kappa * kappa;
    // Phase orientation fixed by the unbiasedness oracle: the average of the
    // kernel is <{n}|rho|{m}>.
    pref *= std::polar(1.0, (r.n_o - r.m_o) * settings.psi_o +
                                (r.n_e - r.m_e) * settings.psi_e);
    pref *= ipow_minus_i(d_o + d_e) * std::pow(std::sqrt(kappa) * u_o, d_o) *
            std::pow(std::sqrt(kappa) * u_e, d_e);
    pref *= std::sqrt(factorial(nu_o) / factorial(mu_o)) *
            std::sqrt(factorial(nu_e) / factorial(mu_e));
    prefactors[i] = pref;
  }

  const double upper = upper_limit(polys);
  std::vector<KernelValue> out(requests.size());
  switch (n) {
    case 1: integrate_requests<1>(polys, beta, upper, out); break;
    case 2: integrate_requests<2>(polys, beta, upper, out); break;
    case 3: integrate_requests<3>(polys, beta, upper, out); break;
    case 4: integrate_requests<4>(polys, beta, upper, out); break;
    default: {
      auto integrand = [&](double s) -> Eigen::VectorXcd {
        const Complex osc = std::exp(Complex(-s * s, 2.0 * beta * s));
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = polygauss::eval(polys[i], s) * osc;
        return v;
      };
      auto integral = quad::adaptive_gauss_kronrod(integrand, 0.0, upper, kQuadTol);
      for (Eigen::Index i = 0; i < n; ++i)
        out[i] = {integral.value[i], integral.converged};
      break;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) out[i].value *= prefactors[i];
  return out;
}

KernelValue matrix_element_kernel(double x, const homodyne::PairSettings& settings,
                                  const PairRequest& request, double eta) {
  return matrix_element_kernel(x, settings, std::span(&request, 1), eta)[0];
}

Complex sample_estimate(const homodyne::HomodyneSample& s, const KernelRequest& request) {
  request.validate();
  Complex product(1.0, 0.0);
  for (int j = 0; j < 3; ++j) {
    KernelValue v = matrix_element_kernel(s.x[j], s.settings.pair[j], request.pair[j],
                                          request.eta);
    if (!v.converged)
      throw ConvergenceError("matrix_element_kernel: quadrature did not converge");
    product *= v.value;
  }
  return product;
}

Eigen::VectorXcd sample_estimates(const homodyne::HomodyneSample& s,
                                  std::span<const KernelRequest> requests) {
  const auto n = static_cast<Eigen::Index>(requests.size());
  if (n == 0) return Eigen::VectorXcd();
  for (const auto& r : requests) {
    r.validate();
    if (r.eta != requests[0].eta)
      throw std::invalid_argument("sample_estimates: requests disagree on eta");
  }
  Eigen::VectorXcd products = Eigen::VectorXcd::Ones(n);
  std::vector<PairRequest> parts(requests.size());
  for (int j = 0; j < 3; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) parts[i] = requests[i].pair[j];
    auto values = matrix_element_kernel(s.x[j], s.settings.pair[j], parts,
                                        requests[0].eta);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!values[i].converged)
        throw ConvergenceError("matrix_element_kernel: quadrature did not converge");
      products[i] *= values[i].value;
    }
  }
  return products;
}

KernelValue generic_operator_kernel(const Eigen::MatrixXcd& op,
                                    const std::vector<int>& cutoffs, double x,
                                    const GenericSettings& settings, double eta) {
  if (settings.u.size() != cutoffs.size() || settings.psi.size() != cutoffs.size())
    throw std::invalid_argument("generic_operator_kernel: settings size mismatch");
  double unorm = 0.0;
  for (double u : settings.u) unorm += u * u;
  if (std::abs(unorm - 1.0) > 1e-9)
    throw std::invalid_argument("generic_operator_kernel: u is not normalized");
  const double kappa = kappa_of(eta);

  GenericEval base = generic_eval(op, cutoffs, x, settings, kappa);
  std::vector<int> grown(cutoffs);
  for (int& c : grown) ++c;
  GenericEval check =
      generic_eval(embed_operator(op, cutoffs, grown), grown, x, settings, kappa);
  if (std::abs(base.value - check.value) > 1e-8)
    throw ConvergenceError("generic_operator_kernel: trace not converged in the "
                           "truncated basis");
  return {base.value, base.converged && check.converged};
}

KernelValue generic_operator_kernel(const Eigen::MatrixXcd& op, int cutoff, double x,
                                    const homodyne::PairSettings& settings, double eta) {
  GenericSettings gs{{settings.u_o(), settings.u_e()}, {settings.psi_o, settings.psi_e}};
  return generic_operator_kernel(op, {cutoff, cutoff}, x, gs, eta);
}

TomographyAccumulator::TomographyAccumulator(std::vector<KernelRequest> requests,
                                             int blocks)
    : requests_(std::move(requests)), blocks_(blocks) {
  if (blocks_ < 2) throw std::invalid_argument("TomographyAccumulator: need >= 2 blocks");
  for (const auto& r : requests_) r.validate();
  block_counts_.assign(blocks_, 0);
  block_sums_.assign(blocks_,
                     Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(requests_.size())));
}

void TomographyAccumulator::add(const homodyne::HomodyneSample& s, int block) {
  add_estimates(sample_estimates(s, requests_), block);
}

void TomographyAccumulator::add_estimates(const Eigen::VectorXcd& estimates, int block) {
  block_sums_.at(block) += estimates;
  ++block_counts_.at(block);
}

void TomographyAccumulator::merge_block_from(const TomographyAccumulator& other,
                                             int block) {
  block_sums_.at(block) += other.block_sums_.at(block);
  block_counts_.at(block) += other.block_counts_.at(block);
}

long TomographyAccumulator::count() const {
  long n = 0;
  for (long c : block_counts_) n += c;
  return n;
}

std::vector<EstimatorResult> TomographyAccumulator::finalize() const {
  const long n = count();
  if (n == 0) throw std::invalid_argument("TomographyAccumulator: no samples");
  for (long c : block_counts_)
    if (c == 0) throw std::invalid_argument("TomographyAccumulator: empty block");

  std::vector<EstimatorResult> out(requests_.size());
  for (std::size_t r = 0; r < requests_.size(); ++r) {
    Complex total(0.0, 0.0);
    out[r].block_means.resize(blocks_);
    for (int b = 0; b < blocks_; ++b) {
      total += block_sums_[b][static_cast<Eigen::Index>(r)];
      out[r].block_means[b] =
          block_sums_[b][static_cast<Eigen::Index>(r)] / static_cast<double>(block_counts_[b]);
    }
    out[r].mean = total / static_cast<double>(n);
    double var_re = 0.0, var_im = 0.0;
    for (int b = 0; b < blocks_; ++b) {
      const Complex d = out[r].block_means[b] - out[r].mean;
      var_re += d.real() * d.real();
      var_im += d.imag() * d.imag();
    }
    var_re /= blocks_ - 1;
    var_im /= blocks_ - 1;
    out[r].std_error = Complex(std::sqrt(var_re / blocks_), std::sqrt(var_im / blocks_));
  }
  return out;
}

std::vector<EstimatorResult> estimator_average(
    std::span<const homodyne::HomodyneSample> samples,
    std::vector<KernelRequest> requests, int blocks) {
  if (static_cast<long>(samples.size()) < blocks)
    throw std::invalid_argument("estimator_average: fewer samples than blocks");
  TomographyAccumulator acc(std::move(requests), blocks);
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i)
    acc.add(samples[i], static_cast<int>(i * blocks / n));
  return acc.finalize();
}

}  // namespace ghztomo::kernel
