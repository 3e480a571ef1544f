// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace ghztomo::fock {

using Complex = std::complex<double>;

/// Ordered set of bosonic mode labels, with the polarization-pair grouping
/// used by the detectors and a per-mode photon cutoff.
///
/// The layout is immutable after construction and shared between kets; two
/// layouts are interchangeable iff they compare equal (same labels in the
/// same order, same cutoff).
class ModeLayout {
 public:
  ModeLayout(std::vector<std::string> labels, int n_max = 2);

  int size() const { return static_cast<int>(labels_.size()); }
  int n_max() const { return n_max_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }

  /// Index of a label; throws std::invalid_argument if absent.
  int index_of(const std::string& label) const;
  bool has_mode(const std::string& label) const;

  /// Marks (ordinary, extraordinary) mode pairs measured by the detectors.
  void set_pair_groups(std::vector<std::pair<std::string, std::string>> groups);
  const std::vector<std::pair<int, int>>& pair_groups() const { return groups_; }

  /// Layout with one mode removed (pair groups touching it are dropped).
  ModeLayout without_mode(int index) const;

  bool operator==(const ModeLayout& other) const {
    return n_max_ == other.n_max_ && labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::pair<int, int>> groups_;
  int n_max_;
};

using LayoutPtr = std::shared_ptr<const ModeLayout>;

LayoutPtr make_layout(std::vector<std::string> labels, int n_max = 2);

/// Per-mode photon counts, packed 4 bits per mode (counts <= 15, <= 16
/// modes). Value type; cheap to copy and hash.
class OccupationVector {
 public:
  OccupationVector() : bits_(0), size_(0) {}
  OccupationVector(const ModeLayout& layout, const std::vector<int>& counts);
  static OccupationVector vacuum(const ModeLayout& layout) {
    OccupationVector v;
    v.size_ = layout.size();
    return v;
  }

  int size() const { return size_; }
  int count(int mode) const { return static_cast<int>((bits_ >> (4 * mode)) & 0xF); }
  int total() const;
  OccupationVector with_count(int mode, int n) const;
  /// Drops one mode, shifting the higher ones down.
  OccupationVector without_mode(int mode) const;

  std::vector<int> counts() const;
  std::uint64_t key() const { return bits_; }

  bool operator==(const OccupationVector& o) const {
    return bits_ == o.bits_ && size_ == o.size_;
  }

 private:
  std::uint64_t bits_;
  int size_;
};

struct OccupationHash {
  std::size_t operator()(const OccupationVector& v) const {
    std::uint64_t z = v.key() + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

/// Sparse multimode ket: map occupation -> complex amplitude over a fixed
/// ModeLayout. Immutable in spirit: all operations return new kets.
class PureKet {
 public:
  explicit PureKet(LayoutPtr layout) : layout_(std::move(layout)) {}

  static PureKet vacuum(LayoutPtr layout);
  /// Basis ket |n_0 n_1 ...> given as {label: count}; unlisted modes are 0.
  static PureKet basis(LayoutPtr layout, const std::map<std::string, int>& occ);

  const ModeLayout& layout() const { return *layout_; }
  LayoutPtr layout_ptr() const { return layout_; }

  void add(const OccupationVector& occ, Complex amplitude);
  Complex amplitude(const OccupationVector& occ) const;
  std::size_t term_count() const { return amps_.size(); }

  double norm2() const;
  PureKet normalized() const;
  PureKet scaled(Complex factor) const;
  PureKet plus(const PureKet& other) const;
  /// Drops stored amplitudes with |amp| <= threshold.
  PureKet pruned(double threshold) const;

  /// Max total photon count across the stored terms of a mode subset.
  int max_photons(const std::vector<int>& modes) const;

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [occ, amp] : amps_) f(occ, amp);
  }

  /// Text dump, one line per basis term: `n0,n1,...  re  im` (tab-separated),
  /// terms sorted by occupation. Inverse of parse_ket_dump.
  std::string dump() const;

 private:
  LayoutPtr layout_;
  std::unordered_map<OccupationVector, Complex, OccupationHash> amps_;
};

PureKet parse_ket_dump(LayoutPtr layout, const std::string& text);

/// Probability-weighted mixture of normalized pure kets.
class MixedEnsemble {
 public:
  MixedEnsemble() = default;
  void add_component(double weight, PureKet ket);
  int size() const { return static_cast<int>(parts_.size()); }
  double weight(int i) const { return parts_.at(i).first; }
  const PureKet& component(int i) const { return parts_.at(i).second; }
  double total_weight() const;
  /// Throws unless weights are >= 0 and sum to 1 within tol.
  void validate(double tol = 1e-12) const;

 private:
  std::vector<std::pair<double, PureKet>> parts_;
};

/// <bra|ket>. Layouts must match.
Complex inner_product(const PureKet& bra, const PureKet& ket);

/// Rewrites the ket under the passive mode map with single-photon action
///   |1 mode1> -> U(0,0)|1 mode1> + U(1,0)|1 mode2>,
///   |1 mode2> -> U(0,1)|1 mode1> + U(1,1)|1 mode2>,
/// i.e. the creation-operator substitution mode_i^dag -> sum_j U(j,i) mode_j^dag
/// for a unitary U (checked to 1e-12). Successive transforms compose as
/// matrix products: apply(U2, apply(U1, s)) == apply(U2*U1, s). Norm and
/// photon number are preserved. Throws on a non-unitary matrix or when a
/// transformed occupation would exceed the layout cutoff.
PureKet apply_pair_unitary(const PureKet& state, int mode1, int mode2,
                           const Eigen::Matrix2cd& u);
PureKet apply_pair_unitary(const PureKet& state, const std::string& mode1,
                           const std::string& mode2, const Eigen::Matrix2cd& u);

struct ProjectionResult {
  double probability = 0.0;
  PureKet reduced;  // renormalized, with the measured mode removed
};

/// Projects onto `count` photons in `mode` and removes the mode. The input
/// must be normalized. A zero-probability branch yields probability 0 and an
/// empty ket on the reduced layout.
ProjectionResult project_mode_count(const PureKet& state, int mode, int count);
ProjectionResult project_mode_count(const PureKet& state, const std::string& mode,
                                    int count);

}  // namespace ghztomo::fock
