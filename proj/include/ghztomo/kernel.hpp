// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ghztomo/homodyne.hpp"

namespace ghztomo::kernel {

using Complex = std::complex<double>;

/// Raised when a kernel quadrature fails to reach its tolerance or an
/// operator trace is not converged in the truncated basis.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// kappa = 2 eta / (2 eta - 1); finite only for eta > 1/2.
double kappa_of(double eta);

/// Generalized Laguerre polynomial L_n^alpha(z) by the three-term recurrence.
double laguerre(int n, int alpha, double z);

/// Occupation pairs (n, m) of one matrix element <{n}|rho|{m}> restricted to
/// one detector pair; entries index the (ordinary, extraordinary) modes.
struct PairRequest {
  int n_o = 0, m_o = 0;
  int n_e = 0, m_e = 0;
};

/// Full three-detector matrix-element request with the homodyne efficiency
/// the kernel compensates for.
struct KernelRequest {
  std::array<PairRequest, 3> pair;
  double eta = 1.0;

  double kappa() const { return kappa_of(eta); }
  void validate() const;
};

struct KernelValue {
  Complex value{0.0, 0.0};
  bool converged = true;
};

/// Single-detector estimator kernel: averaged over homodyne data of one pair
/// it reproduces the two-mode matrix element <(n_o,n_e)|rho|(m_o,m_e)>.
/// Evaluated as a half-line integral of polynomial * exp(-s^2 + 2i sqrt(kappa) x s)
/// by adaptive Gauss-Kronrod quadrature (1e-10 absolute), truncated where the
/// analytic tail bound drops below 1e-12.
KernelValue matrix_element_kernel(double x, const homodyne::PairSettings& settings,
                                  const PairRequest& request, double eta);

/// Same, for several requests sharing one quadrature pass.
std::vector<KernelValue> matrix_element_kernel(double x,
                                               const homodyne::PairSettings& settings,
                                               std::span<const PairRequest> requests,
                                               double eta);

/// Per-sample estimator of a full request: the product of the three pair
/// kernels at the sample's outcomes and settings.
Complex sample_estimate(const homodyne::HomodyneSample& s, const KernelRequest& request);

/// Batched variant sharing pair quadratures across requests.
Eigen::VectorXcd sample_estimates(const homodyne::HomodyneSample& s,
                                  std::span<const KernelRequest> requests);

/// Estimator kernel for a generic operator on M+1 modes, given as a matrix in
/// the truncated product Fock basis with the stated per-mode cutoffs
/// (index = sum occ_l * stride_l, mode 0 fastest). The trace against the
/// normally ordered displacement is evaluated exactly per mode; the result is
/// cross-checked by growing every cutoff once (1e-8), and a ConvergenceError
/// is thrown when that disagrees.
struct GenericSettings {
  std::vector<double> u;    // |u| = M+1, sum of squares 1
  std::vector<double> psi;  // |psi| = M+1
};

KernelValue generic_operator_kernel(const Eigen::MatrixXcd& op,
                                    const std::vector<int>& cutoffs, double x,
                                    const GenericSettings& settings, double eta);

/// Convenience for one detector pair (M = 1).
KernelValue generic_operator_kernel(const Eigen::MatrixXcd& op, int cutoff, double x,
                                    const homodyne::PairSettings& settings, double eta);

struct EstimatorResult {
  Complex mean{0.0, 0.0};
  Complex std_error{0.0, 0.0};  // per real/imag component
  std::vector<Complex> block_means;
};

/// Running block statistics of the per-sample estimators of a fixed request
/// list. Blocks may be filled concurrently as long as each block index is
/// touched by a single thread; results merge in fixed block order.
class TomographyAccumulator {
 public:
  TomographyAccumulator(std::vector<KernelRequest> requests, int blocks);

  void add(const homodyne::HomodyneSample& s, int block);
  /// Direct accumulation of precomputed per-sample estimates.
  void add_estimates(const Eigen::VectorXcd& estimates, int block);
  void merge_block_from(const TomographyAccumulator& other, int block);

  const std::vector<KernelRequest>& requests() const { return requests_; }
  int blocks() const { return blocks_; }
  long count() const;
  std::vector<EstimatorResult> finalize() const;

 private:
  std::vector<KernelRequest> requests_;
  int blocks_;
  std::vector<long> block_counts_;
  std::vector<Eigen::VectorXcd> block_sums_;
};

/// Mean and block standard error of each request's estimator over a sample
/// set; the sample stream is split into `blocks` consecutive blocks.
std::vector<EstimatorResult> estimator_average(
    std::span<const homodyne::HomodyneSample> samples,
    std::vector<KernelRequest> requests, int blocks = 20);

}  // namespace ghztomo::kernel
