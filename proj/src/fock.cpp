// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ghztomo::fock {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Integer power by repeated multiplication; std::pow(complex, 0) is NaN for
// a zero base.
Complex ipow(Complex base, int e) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

ModeLayout::ModeLayout(std::vector<std::string> labels, int n_max)
    : labels_(std::move(labels)), n_max_(n_max) {
  if (labels_.empty() || labels_.size() > 16)
    throw std::invalid_argument("ModeLayout: need between 1 and 16 modes");
  if (n_max_ < 0 || n_max_ > 15)
    throw std::invalid_argument("ModeLayout: n_max must be in [0, 15]");
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw std::invalid_argument("ModeLayout: duplicate mode label '" + labels_[i] + "'");
  }
}

int ModeLayout::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end())
    throw std::invalid_argument("ModeLayout: unknown mode label '" + label + "'");
  return it->second;
}

bool ModeLayout::has_mode(const std::string& label) const {
  return index_.count(label) != 0;
}

void ModeLayout::set_pair_groups(std::vector<std::pair<std::string, std::string>> groups) {
  groups_.clear();
  for (const auto& [o, e] : groups) groups_.emplace_back(index_of(o), index_of(e));
}

ModeLayout ModeLayout::without_mode(int index) const {
  std::vector<std::string> labels;
  labels.reserve(labels_.size() - 1);
  for (int i = 0; i < size(); ++i)
    if (i != index) labels.push_back(labels_[i]);
  ModeLayout out(std::move(labels), n_max_);
  for (const auto& [o, e] : groups_) {
    if (o == index || e == index) continue;
    out.groups_.emplace_back(o - (o > index ? 1 : 0), e - (e > index ? 1 : 0));
  }
  return out;
}

LayoutPtr make_layout(std::vector<std::string> labels, int n_max) {
  return std::make_shared<const ModeLayout>(std::move(labels), n_max);
}

OccupationVector::OccupationVector(const ModeLayout& layout, const std::vector<int>& counts)
    : bits_(0), size_(layout.size()) {
  if (static_cast<int>(counts.size()) != size_)
    throw std::invalid_argument("OccupationVector: count list does not match layout size");
  for (int i = 0; i < size_; ++i) {
    if (counts[i] < 0 || counts[i] > layout.n_max())
      throw std::invalid_argument("OccupationVector: count outside [0, n_max]");
    bits_ |= static_cast<std::uint64_t>(counts[i]) << (4 * i);
  }
}

int OccupationVector::total() const {
  int t = 0;
  for (int i = 0; i < size_; ++i) t += count(i);
  return t;
}

OccupationVector OccupationVector::with_count(int mode, int n) const {
  OccupationVector v = *this;
  v.bits_ &= ~(0xFULL << (4 * mode));
  v.bits_ |= static_cast<std::uint64_t>(n) << (4 * mode);
  return v;
}

OccupationVector OccupationVector::without_mode(int mode) const {
  OccupationVector v;
  v.size_ = size_ - 1;
  std::uint64_t low = bits_ & ((1ULL << (4 * mode)) - 1);
  std::uint64_t high = bits_ >> (4 * (mode + 1));
  v.bits_ = low | (high << (4 * mode));
  return v;
}

std::vector<int> OccupationVector::counts() const {
  std::vector<int> c(size_);
  for (int i = 0; i < size_; ++i) c[i] = count(i);
  return c;
}

PureKet PureKet::vacuum(LayoutPtr layout) {
  PureKet k(layout);
  k.add(OccupationVector::vacuum(*layout), Complex(1.0, 0.0));
  return k;
}

PureKet PureKet::basis(LayoutPtr layout, const std::map<std::string, int>& occ) {
  std::vector<int> counts(layout->size(), 0);
  for (const auto& [label, n] : occ) counts[layout->index_of(label)] = n;
  PureKet k(layout);
  k.add(OccupationVector(*layout, counts), Complex(1.0, 0.0));
  return k;
}

void PureKet::add(const OccupationVector& occ, Complex amplitude) {
  if (occ.size() != layout_->size())
    throw std::invalid_argument("PureKet: occupation does not match layout");
  auto [it, inserted] = amps_.emplace(occ, amplitude);
  if (!inserted) it->second += amplitude;
}

Complex PureKet::amplitude(const OccupationVector& occ) const {
  auto it = amps_.find(occ);
  return it == amps_.end() ? Complex(0.0, 0.0) : it->second;
}

double PureKet::norm2() const {
  double s = 0.0;
  for (const auto& [occ, amp] : amps_) s += std::norm(amp);
  return s;
}

PureKet PureKet::normalized() const {
  double n2 = norm2();
  if (n2 <= 0.0) throw std::domain_error("PureKet: cannot normalize the zero ket");
  return scaled(1.0 / std::sqrt(n2));
}

PureKet PureKet::scaled(Complex factor) const {
  PureKet out(layout_);
  for (const auto& [occ, amp] : amps_) out.amps_.emplace(occ, amp * factor);
  return out;
}

PureKet PureKet::plus(const PureKet& other) const {
  if (!(*layout_ == other.layout()))
    throw std::invalid_argument("PureKet::plus: layout mismatch");
  PureKet out = *this;
  for (const auto& [occ, amp] : other.amps_) out.add(occ, amp);
  return out;
}

PureKet PureKet::pruned(double threshold) const {
  PureKet out(layout_);
  for (const auto& [occ, amp] : amps_)
    if (std::abs(amp) > threshold) out.amps_.emplace(occ, amp);
  return out;
}

int PureKet::max_photons(const std::vector<int>& modes) const {
  int best = 0;
  for (const auto& [occ, amp] : amps_) {
    int t = 0;
    for (int m : modes) t += occ.count(m);
    best = std::max(best, t);
  }
  return best;
}

std::string PureKet::dump() const {
  std::vector<std::pair<std::vector<int>, Complex>> rows;
  rows.reserve(amps_.size());
  for (const auto& [occ, amp] : amps_) rows.emplace_back(occ.counts(), amp);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::ostringstream os;
  char buf[64];
  for (const auto& [counts, amp] : rows) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (i) os << ',';
      os << counts[i];
    }
    std::snprintf(buf, sizeof buf, "%.17g", amp.real());
    os << '\t' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", amp.imag());
    os << '\t' << buf << '\n';
  }
  return os.str();
}

PureKet parse_ket_dump(LayoutPtr layout, const std::string& text) {
  PureKet ket(layout);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string occ_field;
    double re = 0.0, im = 0.0;
    if (!(ls >> occ_field >> re >> im))
      throw std::invalid_argument("parse_ket_dump: malformed line '" + line + "'");
    std::vector<int> counts;
    std::istringstream os(occ_field);
    std::string tok;
    while (std::getline(os, tok, ',')) counts.push_back(std::stoi(tok));
    ket.add(OccupationVector(*layout, counts), Complex(re, im));
  }
  return ket;
}

void MixedEnsemble::add_component(double weight, PureKet ket) {
  if (weight < 0.0) throw std::invalid_argument("MixedEnsemble: negative weight");
  parts_.emplace_back(weight, std::move(ket));
}

double MixedEnsemble::total_weight() const {
  double s = 0.0;
  for (const auto& [w, k] : parts_) s += w;
  return s;
}

void MixedEnsemble::validate(double tol) const {
  for (const auto& [w, k] : parts_) {
    if (w < -tol) throw std::domain_error("MixedEnsemble: negative weight");
    if (std::abs(k.norm2() - 1.0) > 1e-9)
      throw std::domain_error("MixedEnsemble: component ket not normalized");
  }
  if (std::abs(total_weight() - 1.0) > tol)
    throw std::domain_error("MixedEnsemble: weights do not sum to 1");
}

Complex inner_product(const PureKet& bra, const PureKet& ket) {
  if (!(bra.layout() == ket.layout()))
    throw std::invalid_argument("inner_product: layout mismatch");
  Complex s(0.0, 0.0);
  // Iterate the smaller map.
  if (bra.term_count() <= ket.term_count()) {
    bra.for_each([&](const OccupationVector& occ, Complex a) {
      s += std::conj(a) * ket.amplitude(occ);
    });
  } else {
    ket.for_each([&](const OccupationVector& occ, Complex a) {
      s += std::conj(bra.amplitude(occ)) * a;
    });
  }
  return s;
}

PureKet apply_pair_unitary(const PureKet& state, int mode1, int mode2,
                           const Eigen::Matrix2cd& u) {
  if (mode1 == mode2) throw std::invalid_argument("apply_pair_unitary: modes must differ");
  Eigen::Matrix2cd uut = u * u.adjoint();
  if ((uut - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("apply_pair_unitary: matrix is not unitary");

  const int n_max = state.layout().n_max();
  PureKet out(state.layout_ptr());
  state.for_each([&](const OccupationVector& occ, Complex amp) {
    const int n1 = occ.count(mode1);
    const int n2 = occ.count(mode2);
    if (n1 == 0 && n2 == 0) {
      out.add(occ, amp);
      return;
    }
    // (U00 a1 + U10 a2)^n1 (U01 a1 + U11 a2)^n2 expanded binomially over the
    // creation operators, with the bosonic sqrt(n!) normalization of the
    // source and target kets.
    const double norm_in = std::sqrt(factorial(n1) * factorial(n2));
    for (int j = 0; j <= n1; ++j) {
      for (int k = 0; k <= n2; ++k) {
        const int p1 = j + k;                 // photons ending in mode1
        const int p2 = n1 + n2 - p1;          // photons ending in mode2
        Complex coeff = ipow(u(0, 0), j) * ipow(u(1, 0), n1 - j) *
                        ipow(u(0, 1), k) * ipow(u(1, 1), n2 - k);
        coeff *= binomial(n1, j) * binomial(n2, k);
        if (std::abs(coeff) == 0.0) continue;
        if (p1 > n_max || p2 > n_max)
          throw std::domain_error("apply_pair_unitary: cutoff overflow");
        coeff *= std::sqrt(factorial(p1) * factorial(p2)) / norm_in;
        out.add(occ.with_count(mode1, p1).with_count(mode2, p2), amp * coeff);
      }
    }
  });
  return out.pruned(0.0);
}

PureKet apply_pair_unitary(const PureKet& state, const std::string& mode1,
                           const std::string& mode2, const Eigen::Matrix2cd& u) {
  return apply_pair_unitary(state, state.layout().index_of(mode1),
                            state.layout().index_of(mode2), u);
}

ProjectionResult project_mode_count(const PureKet& state, int mode, int count) {
  auto reduced_layout = std::make_shared<const ModeLayout>(state.layout().without_mode(mode));
  PureKet reduced(reduced_layout);
  double prob = 0.0;
  state.for_each([&](const OccupationVector& occ, Complex amp) {
    if (occ.count(mode) != count) return;
    prob += std::norm(amp);
    reduced.add(occ.without_mode(mode), amp);
  });
  ProjectionResult r{prob, reduced};
  if (prob > 0.0) r.reduced = reduced.scaled(1.0 / std::sqrt(prob));
  return r;
}

ProjectionResult project_mode_count(const PureKet& state, const std::string& mode,
                                    int count) {
  return project_mode_count(state, state.layout().index_of(mode), count);
}

}  // namespace ghztomo::fock
