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
#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "qdyn/ancilla.hpp"
#include "qdyn/circuit.hpp"
#include "qdyn/fourier.hpp"
#include "qdyn/qft.hpp"

using oracle::Cplx;
using qdyn::Circuit;
using qdyn::GateKind;
using qdyn::Index;

namespace {

Circuit random_circuit(int n, int n_ops, qdyn::Rng& rng, bool allow_mcx) {
  Circuit c{n};
  for (int i = 0; i < n_ops; ++i) {
    const int q0 = int(rng.next_below(std::uint64_t(n)));
    int q1 = q0;
    if (n >= 2)
      while (q1 == q0) q1 = int(rng.next_below(std::uint64_t(n)));
    switch (rng.next_below(allow_mcx && n >= 2 ? 6 : 4)) {
      case 0: append(c, qdyn::make_hadamard(q0)); break;
      case 1: append(c, qdyn::make_phase_shift(q0, rng.uniform(-4.0, 4.0))); break;
      case 2:
        if (n >= 2)
          append(c, qdyn::make_cnot(q0, q1));
        else
          append(c, qdyn::make_hadamard(q0));
        break;
      case 3:
        if (n >= 2)
          append(c, qdyn::make_controlled_phase(q0, q1, rng.uniform(-4.0, 4.0)));
        else
          append(c, qdyn::make_phase_shift(q0, rng.uniform(-4.0, 4.0)));
        break;
      case 4:
        append(c, qdyn::make_two_qubit_diagonal(
                      q0, q1,
                      {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0),
                       rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)}));
        break;
      default:
        append(c, qdyn::make_multi_controlled_x(
                      q0, {{q1, rng.uniform() < 0.5}}));
        break;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("circuit text form round trips exactly") {
  qdyn::Rng rng(21);
  Circuit c = random_circuit(4, 30, rng, true);
  c.bit_reversal_at_end = true;
  c.global_phase = 0.1234567891234567;

  const std::string text = qdyn::serialize_circuit(c);
  Circuit back = qdyn::parse_circuit(text);
  CHECK(back.n_qubits == c.n_qubits);
  CHECK(back.bit_reversal_at_end == c.bit_reversal_at_end);
  CHECK(back.global_phase == c.global_phase);
  REQUIRE(back.ops.size() == c.ops.size());
  for (size_t i = 0; i < c.ops.size(); ++i) {
    CHECK(back.ops[i].kind == c.ops[i].kind);
    CHECK(back.ops[i].q0 == c.ops[i].q0);
    CHECK(back.ops[i].q1 == c.ops[i].q1);
    CHECK(back.ops[i].params == c.ops[i].params);  // bitwise, via %.17g
    CHECK(back.ops[i].controls == c.ops[i].controls);
  }

  CHECK_THROWS_AS(qdyn::parse_circuit("bogus"), qdyn::DomainError);
  CHECK_THROWS_AS(qdyn::parse_circuit("QUBITS 2\nFROB 0"), qdyn::DomainError);
  CHECK_THROWS_AS(qdyn::parse_circuit("QUBITS 2\nH 5"), qdyn::DomainError);
}

TEST_CASE("inverse circuit undoes the forward circuit") {
  qdyn::Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + int(rng.next_below(3));
    Circuit c = random_circuit(n, 25, rng, true);
    c.global_phase = rng.uniform(-3.0, 3.0);
    auto v = oracle::random_state_vec(n, rng);
    auto s = oracle::to_state(n, v);
    qdyn::apply_circuit(s, c);
    qdyn::apply_circuit(s, qdyn::inverse_circuit(c));
    CHECK(oracle::max_abs_diff(s.amps(), v) < 1e-11);
  }
}

TEST_CASE("dense circuit product matches the statevector path") {
  qdyn::Rng rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + int(rng.next_below(3));
    Circuit c = random_circuit(n, 20, rng, true);
    c.bit_reversal_at_end = (trial % 2 == 0);
    c.global_phase = rng.uniform(-3.0, 3.0);
    auto v = oracle::random_state_vec(n, rng);
    auto s = oracle::to_state(n, v);
    qdyn::apply_circuit(s, c);
    oracle::Vec want = oracle::dense_circuit(c) * v;
    CHECK(oracle::max_abs_diff(s.amps(), want) < 1e-12);
  }
}

TEST_CASE("lowering keeps the full unitary including global phase") {
  qdyn::Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + int(rng.next_below(2));
    Circuit c = random_circuit(n, 15, rng, true);
    Circuit low = qdyn::lower_to_basic(c);
    for (const auto& op : low.ops) {
      const bool basic = op.kind == GateKind::Hadamard ||
                         op.kind == GateKind::PhaseShift ||
                         op.kind == GateKind::Cnot;
      CHECK(basic);
    }
    CHECK(oracle::max_abs_diff(oracle::dense_circuit(c),
                               oracle::dense_circuit(low)) < 1e-12);
  }

  Circuit c{3};
  append(c, qdyn::make_multi_controlled_x(0, {{1, true}, {2, true}}));
  CHECK_THROWS_AS(qdyn::lower_to_basic(c), qdyn::DomainError);
}

TEST_CASE("controlled application of a whole circuit") {
  qdyn::Rng rng(25);
  const int n = 3;        // circuit register width
  const int control = 3;  // extra qubit
  for (int trial = 0; trial < 6; ++trial) {
    Circuit c = random_circuit(n, 12, rng, false);
    c.global_phase = rng.uniform(-3.0, 3.0);

    auto v = oracle::random_state_vec(n + 1, rng);
    auto s = oracle::to_state(n + 1, v);
    qdyn::apply_circuit_controlled(s, c, control);

    // |0><0| (x) I + |1><1| (x) U, built densely.
    Circuit wide{n + 1};
    wide.ops = c.ops;
    oracle::Mat u =
        oracle::dense_circuit(wide) * std::polar(1.0, c.global_phase);
    oracle::Mat sel1 = oracle::embed(n + 1, {{control, oracle::proj(1)}});
    oracle::Mat sel0 = oracle::Mat::Identity(16, 16) - sel1;
    oracle::Vec want = sel0 * v + u * (sel1 * v);
    CHECK(oracle::max_abs_diff(s.amps(), want) < 1e-12);
  }

  Circuit narrow{3};
  append(narrow, qdyn::make_hadamard(1));
  auto s = qdyn::init_basis_state(4, 0);
  // Control inside the circuit's own register range collides with an op.
  CHECK_THROWS_AS(qdyn::apply_circuit_controlled(s, narrow, 1),
                  qdyn::DomainError);
  auto tight = qdyn::init_basis_state(3, 0);
  CHECK_THROWS_AS(qdyn::apply_circuit_controlled(tight, narrow, 2),
                  qdyn::DimensionError);
}

TEST_CASE("transform circuit has the triangular gate count") {
  for (int n = 1; n <= 12; ++n) {
    Circuit c = qdyn::qft_circuit(n);
    CHECK(Index(c.ops.size()) == Index(n) * (n + 1) / 2);
    CHECK(c.bit_reversal_at_end);
    auto counts = qdyn::kind_counts(c);
    CHECK(counts[GateKind::Hadamard] == std::size_t(n));
    CHECK(counts[GateKind::ControlledPhase] == std::size_t(n) * (n - 1) / 2);
  }
}

TEST_CASE("transform circuit equals the direct summation matrix") {
  for (int n = 1; n <= 8; ++n) {
    oracle::Mat got = oracle::dense_circuit(qdyn::qft_circuit(n));
    oracle::Mat want = oracle::dft_matrix(n, +1.0);
    CHECK(oracle::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("fast transform path matches the matrix on states") {
  qdyn::Rng rng(26);
  for (int n = 1; n <= 10; ++n) {
    auto v = oracle::random_state_vec(n, rng);
    auto s = oracle::to_state(n, v);
    qdyn::apply_qft(s);
    oracle::Vec want = oracle::dft_matrix(n, +1.0) * v;
    CHECK(oracle::max_abs_diff(s.amps(), want) < 1e-10);
    qdyn::apply_qft(s, /*inverse=*/true);
    CHECK(oracle::max_abs_diff(s.amps(), v) < 1e-10);
  }
}

TEST_CASE("transform of the zero state is the uniform superposition") {
  auto s = qdyn::init_basis_state(5, 0);
  qdyn::apply_qft(s);
  for (Index i = 0; i < 32; ++i)
    CHECK(std::abs(s[i] - 1.0 / std::sqrt(32.0)) < 1e-13);
}

TEST_CASE("fft based representation change agrees with the matrix") {
  qdyn::Rng rng(27);
  for (int n : {1, 3, 6, 9}) {
    auto v = oracle::random_state_vec(n, rng);
    auto s = oracle::to_state(n, v);
    qdyn::to_angle_representation(s);
    oracle::Vec want = oracle::dft_matrix(n, +1.0) * v;
    CHECK(oracle::max_abs_diff(s.amps(), want) < 1e-12);
    qdyn::to_action_representation(s);
    CHECK(oracle::max_abs_diff(s.amps(), v) < 1e-12);
  }
}

TEST_CASE("ancilla phase writes the requested diagonal") {
  qdyn::Rng rng(28);
  const int n = 3, m = 4;
  qdyn::AncillaLayout layout{n, m};
  const double c = 0.17;
  std::vector<std::uint64_t> table(8);
  for (auto& t : table) t = rng.next_below(16);

  Circuit circ = qdyn::build_diagonal_phase_via_ancilla(layout, table, c);
  CHECK(circ.n_qubits == n + m);

  // Write stage, phase stage, unwrite stage; the unwrite mirrors the write.
  const size_t writes = (circ.ops.size() - size_t(m)) / 2;
  for (size_t i = 0; i < writes; ++i) {
    CHECK(circ.ops[i].kind == GateKind::MultiControlledX);
    CHECK(circ.ops[circ.ops.size() - 1 - i].q0 == circ.ops[i].q0);
  }
  for (int j = 0; j < m; ++j) {
    const auto& op = circ.ops[writes + size_t(j)];
    CHECK(op.kind == GateKind::PhaseShift);
    CHECK(op.params[0] == doctest::Approx(c * double(Index{1} << j)));
  }

  // Action on data (x) |0...0>_ancilla equals the diagonal phase table.
  auto v = oracle::random_state_vec(n, rng);
  qdyn::StateVectorD s(n + m);
  s.amps().segment(0, 8) = v;  // ancilla bits all zero
  qdyn::apply_circuit(s, circ);
  CHECK(qdyn::ancilla_leakage(s, layout) < 1e-14);
  for (Index x = 0; x < 8; ++x) {
    const Cplx want = std::polar(1.0, c * double(table[size_t(x)])) * v[x];
    CHECK(std::abs(s[x] - want) < 1e-13);
  }

  // The direct table applicator performs the same phase action in place.
  auto d = oracle::to_state(n, v);
  qdyn::apply_diagonal_phase_table(d, table, c);
  for (Index x = 0; x < 8; ++x) CHECK(std::abs(d[x] - s[x]) < 1e-13);

  std::vector<std::uint64_t> too_big(8, 16);
  CHECK_THROWS_AS(qdyn::build_diagonal_phase_via_ancilla(layout, too_big, c),
                  qdyn::CapacityError);
}
