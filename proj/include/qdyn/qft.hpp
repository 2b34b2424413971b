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

#include "qdyn/circuit.hpp"

namespace qdyn {

// Gate body of the Fourier transform: n Hadamards and n(n-1)/2 controlled
// phases, high qubit first. The body alone produces the transform with
// bit-reversed output ordering; composing the final bit reversal R gives the
// unitary normalized transform b_l = (1/sqrt(N)) sum_k exp(+2*pi*i*k*l/N) a_k.
inline std::vector<GateOp> qft_gate_ops(int n_qubits) {
  check_qubit_count(n_qubits);
  std::vector<GateOp> ops;
  ops.reserve(static_cast<size_t>(n_qubits) * (n_qubits + 1) / 2);
  for (int j = n_qubits - 1; j >= 0; --j) {
    ops.push_back(make_hadamard(j));
    for (int m = j - 1; m >= 0; --m)
      ops.push_back(make_controlled_phase(m, j, kPi / double(Index{1} << (j - m))));
  }
  return ops;
}

// Full transform as a circuit: n(n+1)/2 gates plus the zero-cost output
// relabeling. Swap networks are never emitted; the relabeling keeps the
// counted total at n(n+1)/2.
inline Circuit qft_circuit(int n_qubits) {
  Circuit c;
  c.n_qubits = n_qubits;
  c.ops = qft_gate_ops(n_qubits);
  c.bit_reversal_at_end = true;
  return c;
}

// In-place transform of a state. inverse=false applies the gate body then the
// relabeling; inverse=true applies the relabeling then the conjugated body in
// reverse order (the adjoint of the same factorization).
template <typename R>
void apply_qft(StateVector<R>& s, bool inverse = false) {
  const auto ops = qft_gate_ops(s.n_qubits());
  if (!inverse) {
    for (const auto& op : ops) apply_gate(s, op);
    bit_reverse_permute(s);
  } else {
    bit_reverse_permute(s);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it)
      apply_gate(s, inverted(*it));
  }
}

}  // namespace qdyn
