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

#include <cmath>
#include <cstdint>
#include <vector>

#include "qdyn/circuit.hpp"

namespace qdyn {

// Register split for diagonal phase kicks through a scratch register: data
// qubits [0, data_qubits), ancilla bits [data_qubits, data_qubits +
// ancilla_bits). The ancilla starts and ends in |0...0>.
struct AncillaLayout {
  int data_qubits = 0;
  int ancilla_bits = 0;
  int total_qubits() const { return data_qubits + ancilla_bits; }
  int ancilla_qubit(int j) const { return data_qubits + j; }
};

// Builds the three-step kick circuit realizing |x> -> exp(i*c*f(x))|x> on the
// data register for a tabulated f with values below 2^m:
//
//   1. write f(x) into the ancilla: for every table entry, one pattern-
//      controlled bit-set per set bit of f(x) (table-driven, O(2^n) ops of
//      n controls each);
//   2. kick: exactly m single-qubit phase gates, bit j contributing c*2^j;
//   3. unwrite f(x): step 1 reversed (its ops are involutions).
//
// Step 2 is where the entire phase lands, because the ancilla holding value
// f(x) accumulates exactly exp(i*c*f(x)); steps 1 and 3 are permutations, so
// the ancilla provably returns to |0...0>. Structured diagonals with
// quadratic phase profiles have a cheaper direct route (see
// quadratic_phase_gates) and do not need this generic builder.
inline Circuit build_diagonal_phase_via_ancilla(
    const AncillaLayout& layout, const std::vector<std::uint64_t>& f_table,
    double c) {
  if (layout.data_qubits < 1 || layout.ancilla_bits < 1)
    throw DomainError("ancilla layout needs at least one qubit on each side");
  check_qubit_count(layout.total_qubits());
  if (!std::isfinite(c)) throw DomainError("phase scale must be finite");
  const Index n_entries = dim_of(layout.data_qubits);
  if (static_cast<Index>(f_table.size()) != n_entries)
    throw DimensionError("function table must have one entry per data state");
  const int m = layout.ancilla_bits;
  if (m < 64) {
    const std::uint64_t cap = std::uint64_t{1} << m;
    for (Index x = 0; x < n_entries; ++x)
      if (f_table[static_cast<size_t>(x)] >= cap)
        throw CapacityError("function value " +
                            std::to_string(f_table[static_cast<size_t>(x)]) +
                            " at x=" + std::to_string(x) + " overflows " +
                            std::to_string(m) + " ancilla bits");
  }

  Circuit c_out;
  c_out.n_qubits = layout.total_qubits();

  std::vector<GateOp> write_ops;
  for (Index x = 0; x < n_entries; ++x) {
    const std::uint64_t fx = f_table[static_cast<size_t>(x)];
    if (fx == 0) continue;
    std::vector<std::pair<int, bool>> pattern;
    pattern.reserve(static_cast<size_t>(layout.data_qubits));
    for (int q = 0; q < layout.data_qubits; ++q)
      pattern.emplace_back(q, bit_of(x, q) != 0);
    for (int j = 0; j < m; ++j)
      if ((fx >> j) & 1)
        write_ops.push_back(
            make_multi_controlled_x(layout.ancilla_qubit(j), pattern));
  }

  c_out.ops = write_ops;
  for (int j = 0; j < m; ++j)
    append(c_out, make_phase_shift(layout.ancilla_qubit(j),
                                   c * double(std::uint64_t{1} << j)));
  c_out.ops.insert(c_out.ops.end(), write_ops.rbegin(), write_ops.rend());
  return c_out;
}

// The exact action of the kick circuit on the data register, applied without
// materializing the 2^(n+m) joint space: amplitude at x is multiplied by
// exp(i*c*f(x)). Production evolution uses this; the literal circuit is
// exercised on small registers by the tests.
template <typename R>
void apply_diagonal_phase_table(StateVector<R>& s,
                                const std::vector<std::uint64_t>& f_table,
                                double c) {
  if (static_cast<Index>(f_table.size()) != s.dim())
    throw DimensionError("function table must have one entry per state");
  if (!std::isfinite(c)) throw DomainError("phase scale must be finite");
  using C = typename StateVector<R>::Complex;
  auto* a = s.amps().data();
  for (Index i = 0; i < s.dim(); ++i) {
    const double phase = c * static_cast<double>(f_table[static_cast<size_t>(i)]);
    a[i] *= C(std::polar(R(1), static_cast<R>(phase)));
  }
}

// Probability of the ancilla register being anywhere other than |0...0>.
template <typename R>
double ancilla_leakage(const StateVector<R>& s, const AncillaLayout& layout) {
  if (s.n_qubits() != layout.total_qubits())
    throw DimensionError("state width does not match ancilla layout");
  const Index data_dim = dim_of(layout.data_qubits);
  double inside = 0;
  for (Index x = 0; x < data_dim; ++x) inside += std::norm(s[x]);
  return 1.0 - inside;
}

}  // namespace qdyn
