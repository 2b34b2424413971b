// Copyright 2026 The qdyn developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "qdyn/common.hpp"
#include "qdyn/rng.hpp"

namespace qdyn {

// Dense register of 2^n complex amplitudes. Basis-state index bit q is the
// state of qubit q, so qubit 0 is the least significant bit of the index.
// Gates update the array in place through stride-based index pairing; no
// general matrix product appears anywhere in the evolution path.
template <typename RealT = double>
class StateVector {
 public:
  using Real = RealT;
  using Complex = std::complex<RealT>;
  using Amplitudes = Eigen::Vector<Complex, Eigen::Dynamic>;

  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubit_count(n_qubits);
    amps_ = Amplitudes::Zero(dim_of(n_qubits));
  }

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return amps_.size(); }

  Amplitudes& amps() { return amps_; }
  const Amplitudes& amps() const { return amps_; }

  Complex& operator[](Index i) { return amps_[i]; }
  const Complex& operator[](Index i) const { return amps_[i]; }

 private:
  int n_qubits_;
  Amplitudes amps_;
};

using StateVectorD = StateVector<double>;

// |basis> with all other amplitudes zero.
template <typename R = double>
StateVector<R> init_basis_state(int n_qubits, Index basis) {
  StateVector<R> s(n_qubits);
  if (basis < 0 || basis >= s.dim())
    throw DomainError("basis index out of range");
  s[basis] = typename StateVector<R>::Complex(1, 0);
  return s;
}

namespace detail {

// Index with a zero inserted at bit position q: enumerate the half-space of
// pair partners i0 < i0|mask for a single target qubit.
inline Index insert_zero_bit(Index i, int q) {
  const Index lo = (Index{1} << q) - 1;
  return ((i & ~lo) << 1) | (i & lo);
}

// Optional control restriction shared by every kernel: an op acts only on
// indices i with (i & mask) == value. mask == 0 recovers the plain gate.
struct ControlMask {
  Index mask = 0;
  Index value = 0;
  bool admits(Index i) const { return (i & mask) == value; }
};

}  // namespace detail

template <typename R>
void apply_hadamard(StateVector<R>& s, int q,
                    detail::ControlMask cm = {}) {
  check_qubit_index(q, s.n_qubits());
  using C = typename StateVector<R>::Complex;
  const R inv_sqrt2 = R(1) / std::sqrt(R(2));
  const Index mask = Index{1} << q;
  const Index half = s.dim() >> 1;
  auto* a = s.amps().data();
  for (Index h = 0; h < half; ++h) {
    const Index i0 = detail::insert_zero_bit(h, q);
    if (!cm.admits(i0)) continue;
    const Index i1 = i0 | mask;
    const C v0 = a[i0], v1 = a[i1];
    a[i0] = inv_sqrt2 * (v0 + v1);
    a[i1] = inv_sqrt2 * (v0 - v1);
  }
}

// |1> picks up exp(i*delta); |0> untouched.
template <typename R>
void apply_phase_shift(StateVector<R>& s, int q, double delta,
                       detail::ControlMask cm = {}) {
  check_qubit_index(q, s.n_qubits());
  if (!std::isfinite(delta)) throw DomainError("phase must be finite");
  using C = typename StateVector<R>::Complex;
  const C phase = std::polar(R(1), static_cast<R>(delta));
  const Index mask = Index{1} << q;
  const Index half = s.dim() >> 1;
  auto* a = s.amps().data();
  for (Index h = 0; h < half; ++h) {
    const Index i1 = detail::insert_zero_bit(h, q) | mask;
    if (!cm.admits(i1)) continue;
    a[i1] *= phase;
  }
}

template <typename R>
void apply_cnot(StateVector<R>& s, int control, int target,
                detail::ControlMask cm = {}) {
  check_qubit_index(control, s.n_qubits());
  check_qubit_index(target, s.n_qubits());
  if (control == target)
    throw DomainError("cnot control and target must differ");
  const Index cmask = Index{1} << control;
  const Index tmask = Index{1} << target;
  const Index half = s.dim() >> 1;
  auto* a = s.amps().data();
  for (Index h = 0; h < half; ++h) {
    const Index i0 = detail::insert_zero_bit(h, target);
    if ((i0 & cmask) == 0 || !cm.admits(i0)) continue;
    std::swap(a[i0], a[i0 | tmask]);
  }
}

// Diagonal phase on an ordered qubit pair: amplitude with bits (b0, b1) on
// (q0, q1) is multiplied by exp(i*phases[(b0<<1)|b1]). q0 == q1 is allowed
// and uses the (b,b) entries only, degenerating to a single-qubit diagonal.
template <typename R>
void apply_two_qubit_diagonal(StateVector<R>& s, int q0, int q1,
                              const std::array<double, 4>& phases,
                              detail::ControlMask cm = {}) {
  check_qubit_index(q0, s.n_qubits());
  check_qubit_index(q1, s.n_qubits());
  using C = typename StateVector<R>::Complex;
  for (double p : phases)
    if (!std::isfinite(p)) throw DomainError("phase must be finite");
  std::array<C, 4> w;
  for (int b = 0; b < 4; ++b) w[b] = std::polar(R(1), static_cast<R>(phases[b]));
  const Index n = s.dim();
  auto* a = s.amps().data();
  if (cm.mask == 0) {
    for (Index i = 0; i < n; ++i)
      a[i] *= w[(bit_of(i, q0) << 1) | bit_of(i, q1)];
  } else {
    for (Index i = 0; i < n; ++i)
      if (cm.admits(i)) a[i] *= w[(bit_of(i, q0) << 1) | bit_of(i, q1)];
  }
}

// exp(i*phi) on |11> of a distinct pair; symmetric in its operands.
template <typename R>
void apply_controlled_phase(StateVector<R>& s, int q0, int q1, double phi,
                            detail::ControlMask cm = {}) {
  check_qubit_index(q0, s.n_qubits());
  check_qubit_index(q1, s.n_qubits());
  if (q0 == q1)
    throw DomainError("controlled phase operands must differ");
  if (!std::isfinite(phi)) throw DomainError("phase must be finite");
  using C = typename StateVector<R>::Complex;
  const C phase = std::polar(R(1), static_cast<R>(phi));
  const Index both = (Index{1} << q0) | (Index{1} << q1);
  const Index n = s.dim();
  auto* a = s.amps().data();
  for (Index i = 0; i < n; ++i)
    if ((i & both) == both && cm.admits(i)) a[i] *= phase;
}

// X on target for every basis state whose control qubits match the given
// polarities. An empty control list is a plain X.
template <typename R>
void apply_multi_controlled_x(StateVector<R>& s, int target,
                              const std::vector<std::pair<int, bool>>& controls,
                              detail::ControlMask cm = {}) {
  check_qubit_index(target, s.n_qubits());
  Index want_mask = 0, want_value = 0;
  for (const auto& [q, v] : controls) {
    check_qubit_index(q, s.n_qubits());
    if (q == target)
      throw DomainError("multi-controlled x target duplicated in controls");
    const Index m = Index{1} << q;
    if (want_mask & m)
      throw DomainError("multi-controlled x control repeated");
    want_mask |= m;
    if (v) want_value |= m;
  }
  const Index tmask = Index{1} << target;
  const Index half = s.dim() >> 1;
  auto* a = s.amps().data();
  for (Index h = 0; h < half; ++h) {
    const Index i0 = detail::insert_zero_bit(h, target);
    if ((i0 & want_mask) != want_value || !cm.admits(i0)) continue;
    std::swap(a[i0], a[i0 | tmask]);
  }
}

// <sigma_axis> on one qubit; axis in {'x','y','z'}.
template <typename R>
double expectation_pauli(const StateVector<R>& s, int q, char axis) {
  check_qubit_index(q, s.n_qubits());
  const Index mask = Index{1} << q;
  const Index half = s.dim() >> 1;
  const auto* a = s.amps().data();
  double acc = 0;
  switch (axis) {
    case 'z':
      for (Index i = 0; i < s.dim(); ++i)
        acc += (i & mask) ? -std::norm(a[i]) : std::norm(a[i]);
      return acc;
    case 'x':
      for (Index h = 0; h < half; ++h) {
        const Index i0 = detail::insert_zero_bit(h, q);
        acc += 2.0 * (std::conj(a[i0]) * a[i0 | mask]).real();
      }
      return acc;
    case 'y':
      for (Index h = 0; h < half; ++h) {
        const Index i0 = detail::insert_zero_bit(h, q);
        acc += 2.0 * (std::conj(a[i0]) * a[i0 | mask]).imag();
      }
      return acc;
    default:
      throw DomainError("pauli axis must be one of x, y, z");
  }
}

// <a|b> with the first argument conjugated.
template <typename DerivedA, typename DerivedB>
auto overlap(const Eigen::MatrixBase<DerivedA>& a,
             const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw DimensionError("overlap requires equal-length vectors");
  return a.dot(b);
}

template <typename R>
std::complex<R> overlap(const StateVector<R>& a, const StateVector<R>& b) {
  return overlap(a.amps(), b.amps());
}

// |norm - 1|. Norm drift is monitored, never silently repaired.
template <typename R>
double norm_error(const StateVector<R>& s) {
  return std::abs(s.amps().norm() - 1.0);
}

template <typename R>
void renormalize(StateVector<R>& s) {
  const R n = s.amps().norm();
  if (n <= R(0)) throw NumericalError("cannot renormalize a zero vector");
  s.amps() /= n;
}

struct MeasurementRecord {
  int n_qubits = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;  // seed of the stream the shots were drawn from
  std::map<std::uint64_t, std::uint64_t> counts;  // outcome -> multiplicity
};

// Computational-basis sampling by inverse CDF; consumes exactly one draw per
// shot from the supplied stream.
template <typename R>
MeasurementRecord sample_measurements(const StateVector<R>& s,
                                      std::uint64_t shots, Rng& rng) {
  if (shots < 1) throw DomainError("shot count must be at least 1");
  MeasurementRecord rec;
  rec.n_qubits = s.n_qubits();
  rec.shots = shots;
  rec.seed = rng.seed();
  const Index n = s.dim();
  std::vector<double> cdf(static_cast<size_t>(n));
  double acc = 0;
  for (Index i = 0; i < n; ++i) {
    acc += std::norm(s[i]);
    cdf[static_cast<size_t>(i)] = acc;
  }
  const double total = acc;
  for (std::uint64_t t = 0; t < shots; ++t) {
    const double u = rng.uniform() * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    Index out = static_cast<Index>(it - cdf.begin());
    if (out >= n) out = n - 1;
    ++rec.counts[static_cast<std::uint64_t>(out)];
  }
  return rec;
}

}  // namespace qdyn
