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
#include <utility>

#include "qdyn/circuit.hpp"
#include "qdyn/common.hpp"
#include "qdyn/rng.hpp"

namespace qdyn {

// Exact synthesis of arbitrary one- and two-qubit unitaries over the
// elementary gate set {H, P, CNOT, two-qubit diagonal}. Fixed op counts:
// 5 per single-qubit unitary, 25 per two-qubit unitary (2 CNOTs).

namespace detail {

inline void check_unitary(const Eigen::MatrixXcd& u, double tol) {
  const Eigen::MatrixXcd g =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols());
  if (g.cwiseAbs().maxCoeff() > tol)
    throw DomainError("matrix is not unitary");
}

}  // namespace detail

// A = e^{i g} P(aa) H P(b) H P(cc), emitted as ops [P(cc) H P(b) H P(aa)]
// with g folded into the circuit's global phase. The middle angle comes from
// an atan2 of averaged row magnitudes and the last phase from arg(det A), so
// every reconstructed entry carries a phase error proportional to its own
// magnitude; near-diagonal and near-antidiagonal inputs stay exact.
inline void append_single_qubit_unitary(Circuit& c,
                                        const Eigen::Matrix2cd& a, int q) {
  detail::check_unitary(a, 1e-10);
  const double h_diag = 0.5 * (std::abs(a(0, 0)) + std::abs(a(1, 1)));
  const double h_off = 0.5 * (std::abs(a(0, 1)) + std::abs(a(1, 0)));
  const double b = 2.0 * std::atan2(h_off, h_diag);
  const double phi = std::arg(a(0, 0));
  const double cc = std::arg(a(0, 1)) - phi + kPi / 2.0;
  const double aa = std::arg(a.determinant()) - 2.0 * phi - cc;
  append(c, make_phase_shift(q, cc));
  append(c, make_hadamard(q));
  append(c, make_phase_shift(q, b));
  append(c, make_hadamard(q));
  append(c, make_phase_shift(q, aa));
  c.global_phase += phi - b / 2.0;
}

namespace detail {

// Magic basis: columns are Bell states up to unit phases; conjugation by it
// carries SU(2) x SU(2) to SO(4) and the canonical interaction to a diagonal.
inline Eigen::Matrix4cd magic_basis() {
  const std::complex<double> i(0, 1);
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix4cd m;
  m << s, 0, 0, i * s,  //
      0, i * s, s, 0,   //
      0, i * s, -s, 0,  //
      s, 0, 0, -i * s;
  return m;
}

// Split a Kronecker product into one-qubit factors (high ⊗ low), anchoring
// on the 2x2 block with the largest weight; for a unitary input that block
// has determinant magnitude at least one half.
inline std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> factor_tensor(
    const Eigen::Matrix4cd& m) {
  int ba = 0, bb = 0;
  double best = -1;
  for (int r = 0; r < 2; ++r)
    for (int col = 0; col < 2; ++col) {
      const double w = m.block<2, 2>(2 * r, 2 * col).cwiseAbs().sum();
      if (w > best) {
        best = w;
        ba = r;
        bb = col;
      }
    }
  const Eigen::Matrix2cd anchor = m.block<2, 2>(2 * ba, 2 * bb);
  const std::complex<double> det = anchor.determinant();
  if (std::abs(det) < 1e-9)
    throw NumericalError("tensor factor anchor block is singular");
  const Eigen::Matrix2cd low = anchor / std::sqrt(det);
  Eigen::Matrix2cd high;
  double err = 0;
  for (int r = 0; r < 2; ++r)
    for (int col = 0; col < 2; ++col) {
      const Eigen::Matrix2cd block = m.block<2, 2>(2 * r, 2 * col);
      high(r, col) = 0.5 * (block * low.adjoint()).trace();
      err = std::max(err,
                     (block - high(r, col) * low).cwiseAbs().maxCoeff());
    }
  if (err > 1e-9)
    throw NumericalError("matrix is not a tensor product of qubit factors");
  return {high, low};
}

struct CartanSplit {
  Eigen::Matrix2cd left_high, left_low;    // applied last
  Eigen::Matrix2cd right_high, right_low;  // applied first
  std::array<double, 4> bell_phases;       // Phi+, Psi+, Phi-, Psi- order
  double global_phase = 0;
};

// Cartan decomposition U = e^{i phi} (L1 x L0) K (R1 x R0) with K diagonal
// over the Bell projectors. The simultaneous eigenbasis of the real and
// imaginary parts of V^T V is found through mixes Re + t Im, retrying other
// mix weights when a degeneracy makes the eigenvectors fail to diagonalize
// the imaginary part too.
inline CartanSplit cartan_split(const Eigen::Matrix4cd& u) {
  check_unitary(u, 1e-10);
  CartanSplit out;
  out.global_phase = std::arg(u.determinant()) / 4.0;
  const Eigen::Matrix4cd u4 = u * std::polar(1.0, -out.global_phase);
  const Eigen::Matrix4cd mb = magic_basis();
  const Eigen::Matrix4cd v = mb.adjoint() * u4 * mb;
  const Eigen::Matrix4cd w = v.transpose() * v;
  const Eigen::Matrix4d wr = w.real();
  const Eigen::Matrix4d wi = w.imag();

  const double mixes[] = {0.36787944117144233, 0.0,
                          1.0,                 -0.57721566490153287,
                          2.7182818284590452,  -3.1415926535897932,
                          0.1234567891011121,  5.6470316844153421};
  Eigen::Matrix4d o;
  Eigen::Vector4cd d;
  bool found = false;
  for (double t : mixes) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(wr + t * wi);
    o = es.eigenvectors();
    const Eigen::Matrix4cd dw = o.transpose() * w * o;
    double off = 0;
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col)
        if (r != col) off = std::max(off, std::abs(dw(r, col)));
    if (off > 1e-10) continue;
    for (int j = 0; j < 4; ++j) d[j] = dw(j, j);
    found = true;
    break;
  }
  if (!found)
    throw NumericalError("interaction part could not be diagonalized");
  if (o.determinant() < 0) o.col(0) = -o.col(0);

  std::array<double, 4> theta;
  for (int j = 0; j < 4; ++j) theta[j] = 0.5 * std::arg(d[j]);
  const Eigen::Matrix4cd oc = o.cast<std::complex<double>>();
  auto build = [&](const std::array<double, 4>& th) {
    Eigen::Vector4cd inv;
    for (int j = 0; j < 4; ++j) inv[j] = std::polar(1.0, -th[j]);
    return Eigen::Matrix4cd(v * oc * inv.asDiagonal());
  };
  Eigen::Matrix4cd q1 = build(theta);
  if (q1.imag().cwiseAbs().maxCoeff() > 1e-8)
    throw NumericalError("orthogonal factor failed the reality check");
  if (q1.real().determinant() < 0) {
    theta[0] += kPi;
    q1 = build(theta);
  }

  const Eigen::Matrix4cd left = mb * q1 * mb.adjoint();
  const Eigen::Matrix4cd right = mb * oc.transpose() * mb.adjoint();
  std::tie(out.left_high, out.left_low) = factor_tensor(left);
  std::tie(out.right_high, out.right_low) = factor_tensor(right);
  // Magic columns are (Phi+, i Psi+, Psi-, i Phi-): reorder the eigenphases
  // to the Bell-transform ordering (Phi+, Psi+, Phi-, Psi-).
  out.bell_phases = {theta[0], theta[1], theta[3], theta[2]};
  return out;
}

}  // namespace detail

// Appends an arbitrary two-qubit unitary on (q_high, q_low), where q_high
// selects the more significant index bit of the 4x4 matrix. Always 25 ops:
// four single-qubit dressings around a Bell-diagonal core CNOT H D H CNOT.
inline void append_two_qubit_unitary(Circuit& c, const Eigen::Matrix4cd& u,
                                     int q_high, int q_low) {
  if (q_high == q_low)
    throw DomainError("two-qubit unitary needs distinct qubits");
  const auto split = detail::cartan_split(u);
  append_single_qubit_unitary(c, split.right_low, q_low);
  append_single_qubit_unitary(c, split.right_high, q_high);
  append(c, make_cnot(q_high, q_low));
  append(c, make_hadamard(q_high));
  append(c, make_two_qubit_diagonal(q_high, q_low, split.bell_phases));
  append(c, make_hadamard(q_high));
  append(c, make_cnot(q_high, q_low));
  append_single_qubit_unitary(c, split.left_low, q_low);
  append_single_qubit_unitary(c, split.left_high, q_high);
  c.global_phase += split.global_phase;
}

inline Circuit two_qubit_circuit(const Eigen::Matrix4cd& u) {
  Circuit c{2};
  append_two_qubit_unitary(c, u, 1, 0);
  return c;
}

// Haar-distributed unitary of the given dimension: complex Gaussian matrix,
// QR, and the phase fix that makes the factor unique.
inline Eigen::MatrixXcd random_unitary(int dim, Rng& rng) {
  if (dim < 1) throw DomainError("dimension must be positive");
  Eigen::MatrixXcd a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int col = 0; col < dim; ++col)
      a(r, col) = std::complex<double>(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const std::complex<double> rj = r(j, j);
    const double m = std::abs(rj);
    q.col(j) *= m > 0 ? rj / m : std::complex<double>(1, 0);
  }
  return q;
}

}  // namespace qdyn
