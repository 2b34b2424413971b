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

#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdyn/statevector.hpp"

namespace qdyn {

enum class GateKind : std::uint8_t {
  Hadamard,
  PhaseShift,
  Cnot,
  TwoQubitDiagonal,
  ControlledPhase,
  MultiControlledX,
};

inline const char* kind_token(GateKind k) {
  switch (k) {
    case GateKind::Hadamard: return "H";
    case GateKind::PhaseShift: return "P";
    case GateKind::Cnot: return "CNOT";
    case GateKind::TwoQubitDiagonal: return "D2";
    case GateKind::ControlledPhase: return "CP";
    case GateKind::MultiControlledX: return "MCX";
  }
  return "?";
}

// One executable op. Field usage per kind:
//   Hadamard           q0
//   PhaseShift         q0, params[0] = delta
//   Cnot               q0 = control, q1 = target
//   TwoQubitDiagonal   q0, q1 (q0 == q1 allowed), params = 4 phases indexed
//                      by (bit(q0) << 1) | bit(q1)
//   ControlledPhase    q0, q1 distinct, params[0] = phi (symmetric operands)
//   MultiControlledX   q0 = target, controls = polarized control list
struct GateOp {
  GateKind kind = GateKind::Hadamard;
  int q0 = -1;
  int q1 = -1;
  std::array<double, 4> params{};
  std::vector<std::pair<int, bool>> controls;
};

inline GateOp make_hadamard(int q) { return {GateKind::Hadamard, q, -1, {}, {}}; }
inline GateOp make_phase_shift(int q, double delta) {
  return {GateKind::PhaseShift, q, -1, {delta, 0, 0, 0}, {}};
}
inline GateOp make_cnot(int control, int target) {
  return {GateKind::Cnot, control, target, {}, {}};
}
inline GateOp make_two_qubit_diagonal(int q0, int q1,
                                      const std::array<double, 4>& phases) {
  return {GateKind::TwoQubitDiagonal, q0, q1, phases, {}};
}
inline GateOp make_controlled_phase(int q0, int q1, double phi) {
  return {GateKind::ControlledPhase, q0, q1, {phi, 0, 0, 0}, {}};
}
inline GateOp make_multi_controlled_x(
    int target, std::vector<std::pair<int, bool>> controls) {
  GateOp op{GateKind::MultiControlledX, target, -1, {}, std::move(controls)};
  return op;
}

// Ordered op list on a fixed-width register.
//
// bit_reversal_at_end marks a zero-cost index relabeling (amplitude at index
// i moves to the bit-reversed index) applied after the listed ops; it is how
// the Fourier block reports its output ordering without spending swap gates.
// It is not an op and never enters gate counts.
//
// global_phase accumulates exp(i*global_phase) factors dropped by rewrites
// (diagonal-gate lowering), so lowered circuits stay exactly equal to their
// sources rather than equal up to phase.
struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> ops;
  bool bit_reversal_at_end = false;
  double global_phase = 0.0;

  std::size_t gate_count() const { return ops.size(); }
};

inline std::map<GateKind, std::size_t> kind_counts(const Circuit& c) {
  std::map<GateKind, std::size_t> m;
  for (const auto& op : c.ops) ++m[op.kind];
  return m;
}

inline void append(Circuit& c, GateOp op) { c.ops.push_back(std::move(op)); }

// Concatenation; both parts must have plain (non-relabeled) output ordering.
inline Circuit concat(const Circuit& a, const Circuit& b) {
  if (a.n_qubits != b.n_qubits)
    throw DimensionError("cannot concatenate circuits of different widths");
  if (a.bit_reversal_at_end || b.bit_reversal_at_end)
    throw DomainError("cannot concatenate relabeled circuits");
  Circuit out = a;
  out.ops.insert(out.ops.end(), b.ops.begin(), b.ops.end());
  out.global_phase += b.global_phase;
  return out;
}

namespace detail {

inline void validate_op(const GateOp& op, int n_qubits) {
  switch (op.kind) {
    case GateKind::Hadamard:
    case GateKind::PhaseShift:
      check_qubit_index(op.q0, n_qubits);
      break;
    case GateKind::Cnot:
    case GateKind::ControlledPhase:
      check_qubit_index(op.q0, n_qubits);
      check_qubit_index(op.q1, n_qubits);
      if (op.q0 == op.q1) throw DomainError("two-qubit op needs distinct qubits");
      break;
    case GateKind::TwoQubitDiagonal:
      check_qubit_index(op.q0, n_qubits);
      check_qubit_index(op.q1, n_qubits);
      break;
    case GateKind::MultiControlledX:
      check_qubit_index(op.q0, n_qubits);
      for (const auto& [q, v] : op.controls) {
        (void)v;
        check_qubit_index(q, n_qubits);
      }
      break;
  }
}

// Qubits an op touches (for per-gate noise and control-disjointness checks).
inline std::vector<int> operand_qubits(const GateOp& op) {
  switch (op.kind) {
    case GateKind::Hadamard:
    case GateKind::PhaseShift:
      return {op.q0};
    case GateKind::Cnot:
    case GateKind::ControlledPhase:
      return {op.q0, op.q1};
    case GateKind::TwoQubitDiagonal:
      return op.q0 == op.q1 ? std::vector<int>{op.q0}
                            : std::vector<int>{op.q0, op.q1};
    case GateKind::MultiControlledX: {
      std::vector<int> qs{op.q0};
      for (const auto& [q, v] : op.controls) {
        (void)v;
        qs.push_back(q);
      }
      return qs;
    }
  }
  return {};
}

}  // namespace detail

template <typename R>
void apply_gate(StateVector<R>& s, const GateOp& op,
                detail::ControlMask cm = {}) {
  detail::validate_op(op, s.n_qubits());
  switch (op.kind) {
    case GateKind::Hadamard:
      apply_hadamard(s, op.q0, cm);
      break;
    case GateKind::PhaseShift:
      apply_phase_shift(s, op.q0, op.params[0], cm);
      break;
    case GateKind::Cnot:
      apply_cnot(s, op.q0, op.q1, cm);
      break;
    case GateKind::TwoQubitDiagonal:
      apply_two_qubit_diagonal(s, op.q0, op.q1, op.params, cm);
      break;
    case GateKind::ControlledPhase:
      apply_controlled_phase(s, op.q0, op.q1, op.params[0], cm);
      break;
    case GateKind::MultiControlledX:
      apply_multi_controlled_x(s, op.q0, op.controls, cm);
      break;
  }
}

// Swap amplitudes between each index and its bit reversal.
template <typename R>
void bit_reverse_permute(StateVector<R>& s) {
  const int n = s.n_qubits();
  const Index dim = s.dim();
  auto* a = s.amps().data();
  for (Index i = 0; i < dim; ++i) {
    Index r = 0;
    for (int q = 0; q < n; ++q) r |= ((i >> q) & 1) << (n - 1 - q);
    if (r > i) std::swap(a[i], a[r]);
  }
}

// Executes ops in order, then the relabeling if present, then the recorded
// global phase. Returns the number of gate ops executed.
template <typename R>
std::size_t apply_circuit(StateVector<R>& s, const Circuit& c) {
  if (s.n_qubits() != c.n_qubits)
    throw DimensionError("state width does not match circuit width");
  for (const auto& op : c.ops) apply_gate(s, op);
  if (c.bit_reversal_at_end) bit_reverse_permute(s);
  if (c.global_phase != 0.0) {
    const auto ph = std::polar(R(1), static_cast<R>(c.global_phase));
    s.amps() *= ph;
  }
  return c.ops.size();
}

// Applies the circuit conditioned on one extra control qubit being |1>.
// The circuit must not touch the control and must have plain output ordering
// (a conditional relabeling would not be a local op). The recorded global
// phase becomes a phase shift on the control.
template <typename R>
std::size_t apply_circuit_controlled(StateVector<R>& s, const Circuit& c,
                                     int control) {
  if (s.n_qubits() < c.n_qubits + 1)
    throw DimensionError("state too narrow for controlled application");
  check_qubit_index(control, s.n_qubits());
  if (c.bit_reversal_at_end)
    throw DomainError("cannot control a relabeled circuit");
  for (const auto& op : c.ops)
    for (int q : detail::operand_qubits(op))
      if (q == control)
        throw DomainError("controlled circuit touches its control qubit");
  const detail::ControlMask cm{Index{1} << control, Index{1} << control};
  for (const auto& op : c.ops) apply_gate(s, op, cm);
  if (c.global_phase != 0.0)
    apply_phase_shift(s, control, c.global_phase);
  return c.ops.size();
}

inline GateOp inverted(const GateOp& op) {
  GateOp inv = op;
  switch (op.kind) {
    case GateKind::Hadamard:
    case GateKind::Cnot:
    case GateKind::MultiControlledX:
      break;  // self-inverse
    case GateKind::PhaseShift:
    case GateKind::ControlledPhase:
      inv.params[0] = -op.params[0];
      break;
    case GateKind::TwoQubitDiagonal:
      for (int b = 0; b < 4; ++b) inv.params[b] = -op.params[b];
      break;
  }
  return inv;
}

// Formal inverse: reversed op order with conjugated phases. Defined only for
// plain output ordering.
inline Circuit inverse_circuit(const Circuit& c) {
  if (c.bit_reversal_at_end)
    throw DomainError("inverse of a relabeled circuit is not a plain op list");
  Circuit inv;
  inv.n_qubits = c.n_qubits;
  inv.global_phase = -c.global_phase;
  inv.ops.reserve(c.ops.size());
  for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it)
    inv.ops.push_back(inverted(*it));
  return inv;
}

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// Line-oriented text form: a QUBITS header, one op per line as
// "KIND q0 [q1] [params...]", a BITREV line for the zero-cost relabeling, and
// a GPHASE line when a nonzero global phase is recorded. Phases use 17
// significant digits so parsing reproduces them bit-exactly.
inline std::string serialize_circuit(const Circuit& c) {
  std::ostringstream out;
  out << "QUBITS " << c.n_qubits << "\n";
  for (const auto& op : c.ops) {
    out << kind_token(op.kind);
    switch (op.kind) {
      case GateKind::Hadamard:
        out << ' ' << op.q0;
        break;
      case GateKind::PhaseShift:
        out << ' ' << op.q0 << ' ' << detail::fmt17(op.params[0]);
        break;
      case GateKind::Cnot:
        out << ' ' << op.q0 << ' ' << op.q1;
        break;
      case GateKind::TwoQubitDiagonal:
        out << ' ' << op.q0 << ' ' << op.q1;
        for (int b = 0; b < 4; ++b) out << ' ' << detail::fmt17(op.params[b]);
        break;
      case GateKind::ControlledPhase:
        out << ' ' << op.q0 << ' ' << op.q1 << ' '
            << detail::fmt17(op.params[0]);
        break;
      case GateKind::MultiControlledX:
        out << ' ' << op.q0;
        for (const auto& [q, v] : op.controls)
          out << ' ' << q << ' ' << (v ? 1 : 0);
        break;
    }
    out << "\n";
  }
  if (c.bit_reversal_at_end) out << "BITREV\n";
  if (c.global_phase != 0.0)
    out << "GPHASE " << detail::fmt17(c.global_phase) << "\n";
  return out.str();
}

inline Circuit parse_circuit(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string line;
  bool have_width = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "QUBITS") {
      if (!(ls >> c.n_qubits) || c.n_qubits < 1)
        throw DomainError("bad QUBITS header: " + line);
      have_width = true;
      continue;
    }
    if (!have_width) throw DomainError("circuit text must start with QUBITS");
    if (tok == "BITREV") {
      c.bit_reversal_at_end = true;
      continue;
    }
    if (tok == "GPHASE") {
      if (!(ls >> c.global_phase)) throw DomainError("bad GPHASE line: " + line);
      continue;
    }
    GateOp op;
    if (tok == "H") {
      op.kind = GateKind::Hadamard;
      if (!(ls >> op.q0)) throw DomainError("bad H line: " + line);
    } else if (tok == "P") {
      op.kind = GateKind::PhaseShift;
      if (!(ls >> op.q0 >> op.params[0]))
        throw DomainError("bad P line: " + line);
    } else if (tok == "CNOT") {
      op.kind = GateKind::Cnot;
      if (!(ls >> op.q0 >> op.q1)) throw DomainError("bad CNOT line: " + line);
    } else if (tok == "D2") {
      op.kind = GateKind::TwoQubitDiagonal;
      if (!(ls >> op.q0 >> op.q1 >> op.params[0] >> op.params[1] >>
            op.params[2] >> op.params[3]))
        throw DomainError("bad D2 line: " + line);
    } else if (tok == "CP") {
      op.kind = GateKind::ControlledPhase;
      if (!(ls >> op.q0 >> op.q1 >> op.params[0]))
        throw DomainError("bad CP line: " + line);
    } else if (tok == "MCX") {
      op.kind = GateKind::MultiControlledX;
      if (!(ls >> op.q0)) throw DomainError("bad MCX line: " + line);
      int q, v;
      while (ls >> q >> v) op.controls.emplace_back(q, v != 0);
    } else {
      throw DomainError("unknown op token: " + tok);
    }
    detail::validate_op(op, c.n_qubits);
    c.ops.push_back(std::move(op));
  }
  if (!have_width) throw DomainError("empty circuit text");
  return c;
}

// Rewrites a circuit over {Hadamard, PhaseShift, Cnot} for elementary-gate
// count audits. Diagonal two-qubit kinds expand exactly (phases preserved,
// separated global phase recorded on the output circuit); multi-controlled
// ops with two or more controls are outside this audit's target set.
inline Circuit lower_to_basic(const Circuit& c) {
  Circuit out;
  out.n_qubits = c.n_qubits;
  out.bit_reversal_at_end = c.bit_reversal_at_end;
  out.global_phase = c.global_phase;
  auto emit_cp = [&out](int a, int b, double phi) {
    append(out, make_phase_shift(a, phi / 2));
    append(out, make_phase_shift(b, phi / 2));
    append(out, make_cnot(a, b));
    append(out, make_phase_shift(b, -phi / 2));
    append(out, make_cnot(a, b));
  };
  auto emit_x = [&out](int q) {
    // H P(pi) H = X exactly.
    append(out, make_hadamard(q));
    append(out, make_phase_shift(q, kPi));
    append(out, make_hadamard(q));
  };
  for (const auto& op : c.ops) {
    switch (op.kind) {
      case GateKind::Hadamard:
      case GateKind::PhaseShift:
      case GateKind::Cnot:
        out.ops.push_back(op);
        break;
      case GateKind::ControlledPhase:
        emit_cp(op.q0, op.q1, op.params[0]);
        break;
      case GateKind::TwoQubitDiagonal: {
        const double p00 = op.params[0], p01 = op.params[1];
        const double p10 = op.params[2], p11 = op.params[3];
        if (op.q0 == op.q1) {
          append(out, make_phase_shift(op.q0, p11 - p00));
          out.global_phase += p00;
        } else {
          append(out, make_phase_shift(op.q0, p10 - p00));
          append(out, make_phase_shift(op.q1, p01 - p00));
          emit_cp(op.q0, op.q1, p11 - p10 - p01 + p00);
          out.global_phase += p00;
        }
        break;
      }
      case GateKind::MultiControlledX: {
        if (op.controls.empty()) {
          emit_x(op.q0);
        } else if (op.controls.size() == 1) {
          const auto [cq, cv] = op.controls[0];
          if (cv) {
            append(out, make_cnot(cq, op.q0));
          } else {
            emit_x(cq);
            append(out, make_cnot(cq, op.q0));
            emit_x(cq);
          }
        } else {
          throw DomainError(
              "lowering of multi-controlled ops with 2+ controls is not part "
              "of the elementary-count audit");
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace qdyn
