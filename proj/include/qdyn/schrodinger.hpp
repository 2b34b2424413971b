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
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qdyn/ancilla.hpp"
#include "qdyn/qft.hpp"
#include "qdyn/sawtooth.hpp"

namespace qdyn {

// One-dimensional box [-d, d] split into 2^n cells, sampled at cell centers.
struct SpatialGrid {
  double d = 0;  // half-width
  int n_qubits = 0;

  Index points() const { return dim_of(n_qubits); }
  double delta() const { return 2.0 * d / double(points()); }
  double x(Index i) const { return -d + (double(i) + 0.5) * delta(); }
};

inline void validate(const SpatialGrid& g) {
  check_qubit_count(g.n_qubits);
  if (!std::isfinite(g.d) || g.d <= 0)
    throw DomainError("grid half-width must be positive and finite");
}

struct DiscretizedWavefunction {
  SpatialGrid grid;
  StateVectorD state{1};
  double norm_factor = 0;  // sqrt(sum of squared sample magnitudes)
};

// Split-step evolution parameters. The potential is sampled at the start time
// of each step (left-endpoint rule); a null potential means V = 0.
struct EvolutionSettings {
  double epsilon = 0;  // time step
  double mass = 1.0;
  double hbar = 1.0;
  int steps = 0;
  std::function<double(double, double)> potential;  // V(x, t)
  int ancilla_bits = 16;
};

// Largest ancilla width whose integer levels stay exact in double arithmetic.
inline constexpr int kMaxAncillaBits = 52;

inline void validate(const EvolutionSettings& es) {
  if (!std::isfinite(es.epsilon) || es.epsilon < 0)
    throw DomainError("time step must be non-negative and finite");
  if (!std::isfinite(es.mass) || es.mass <= 0)
    throw DomainError("mass must be positive and finite");
  if (!std::isfinite(es.hbar) || es.hbar <= 0)
    throw DomainError("hbar must be positive and finite");
  if (es.steps < 0) throw DomainError("step count must be non-negative");
  if (es.ancilla_bits < 1) throw DomainError("ancilla needs at least one bit");
  if (es.ancilla_bits > kMaxAncillaBits)
    throw CapacityError("ancilla width beyond exact-integer range of double");
}

// Samples psi on the grid and normalizes; the returned norm_factor restores
// physical amplitudes as sample = norm_factor * amplitude.
inline DiscretizedWavefunction discretize(
    const std::function<std::complex<double>(double)>& psi,
    const SpatialGrid& grid) {
  validate(grid);
  DiscretizedWavefunction wf{grid, StateVectorD(grid.n_qubits), 0.0};
  const Index n = grid.points();
  double sum = 0;
  for (Index i = 0; i < n; ++i) {
    const std::complex<double> v = psi(grid.x(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("wavefunction sample not finite at x = " +
                        std::to_string(grid.x(i)));
    wf.state[i] = v;
    sum += std::norm(v);
  }
  if (sum <= 0) throw DomainError("wavefunction samples are all zero");
  wf.norm_factor = std::sqrt(sum);
  wf.state.amps() /= wf.norm_factor;
  return wf;
}

// Quadratic momentum phase exp(-i*hbar*k^2/(2*mass)*eps) with k = pi*m/d over
// signed momentum labels m, as n^2 diagonal gates (structured fast path; no
// ancilla involved).
inline std::vector<GateOp> kinetic_quadratic_gate_ops(
    const SpatialGrid& grid, const EvolutionSettings& es) {
  validate(grid);
  const double s = -es.hbar * es.epsilon * (kPi / grid.d) * (kPi / grid.d) /
                   (2.0 * es.mass);
  return bilinear_phase_gates(grid.n_qubits, s,
                              signed_action_weights(grid.n_qubits), 0.0);
}

inline std::int64_t kinetic_gate_count(int n_qubits) {
  // Transform body, n^2 quadratic gates, inverse body.
  return std::int64_t(n_qubits) * n_qubits +
         std::int64_t(n_qubits) * (n_qubits + 1);
}

// F^{-1} . diag(exp(-i hbar k^2 eps / (2 mass))) . F on the position register.
// The half-cell offset of the x grid contributes only momentum-diagonal
// phases to the true transform; they commute with the k^2 diagonal and cancel
// between the two transform halves, so the plain register transform is exact
// here. k^2 is even under momentum reflection, which makes the result
// independent of the transform direction as well.
template <typename R>
void kinetic_phase_step(StateVector<R>& s, const SpatialGrid& grid,
                        const EvolutionSettings& es) {
  if (s.n_qubits() != grid.n_qubits)
    throw DimensionError("state width does not match grid");
  validate(es);
  const auto ops = kinetic_quadratic_gate_ops(grid, es);
  apply_qft(s);
  for (const auto& op : ops) apply_gate(s, op);
  apply_qft(s, /*inverse=*/true);
}

// Affinely quantized potential: f_i counts levels of size range/(2^m - 1)
// above the minimum, and c carries the scale so that c * f_i approximates
// -(V(x_i) - min V) * eps / hbar. The dropped minimum is a global phase.
struct PotentialTable {
  std::vector<std::uint64_t> f;
  double c = 0;
  double offset = 0;            // the dropped min V
  double quantization_step = 0; // |c|: worst per-point phase error is half this
};

inline PotentialTable build_potential_table(const SpatialGrid& grid,
                                            const EvolutionSettings& es,
                                            double t) {
  validate(grid);
  validate(es);
  const Index n = grid.points();
  PotentialTable table;
  table.f.assign(static_cast<size_t>(n), 0);
  if (!es.potential) return table;

  std::vector<double> v(static_cast<size_t>(n));
  double lo = 0, hi = 0;
  for (Index i = 0; i < n; ++i) {
    const double vi = es.potential(grid.x(i), t);
    if (!std::isfinite(vi))
      throw DomainError("potential not finite at x = " +
                        std::to_string(grid.x(i)));
    v[static_cast<size_t>(i)] = vi;
    if (i == 0 || vi < lo) lo = vi;
    if (i == 0 || vi > hi) hi = vi;
  }
  table.offset = lo;
  const double range = hi - lo;
  if (range == 0) return table;  // constant potential: pure global phase

  const double levels = double((std::uint64_t{1} << es.ancilla_bits) - 1);
  for (Index i = 0; i < n; ++i) {
    const double scaled = (v[static_cast<size_t>(i)] - lo) / range * levels;
    const auto fi = static_cast<std::uint64_t>(std::llround(scaled));
    if (fi > std::uint64_t((std::uint64_t{1} << es.ancilla_bits) - 1))
      throw CapacityError("potential level overflows the ancilla at x = " +
                          std::to_string(grid.x(i)));
    table.f[static_cast<size_t>(i)] = fi;
  }
  table.c = -es.epsilon * range / (es.hbar * levels);
  table.quantization_step = std::abs(table.c);
  return table;
}

// Executes the quantized diagonal in place; exactly the action of the
// ancilla-register circuit below, which writes f, phases the ancilla bits,
// and unwrites f.
template <typename R>
void potential_phase_step(StateVector<R>& s, const SpatialGrid& grid,
                          const EvolutionSettings& es, double t) {
  if (s.n_qubits() != grid.n_qubits)
    throw DimensionError("state width does not match grid");
  const PotentialTable table = build_potential_table(grid, es, t);
  if (table.c != 0) apply_diagonal_phase_table(s, table.f, table.c);
}

// Literal circuit over data + ancilla qubits realizing the same step.
inline Circuit build_potential_phase_circuit(const SpatialGrid& grid,
                                             const EvolutionSettings& es,
                                             double t) {
  const PotentialTable table = build_potential_table(grid, es, t);
  const AncillaLayout layout{grid.n_qubits, es.ancilla_bits};
  return build_diagonal_phase_via_ancilla(layout, table.f, table.c);
}

inline std::int64_t potential_gate_count(const PotentialTable& table,
                                         int ancilla_bits) {
  std::int64_t writes = 0;
  for (std::uint64_t f : table.f) {
    while (f) {
      writes += f & 1;
      f >>= 1;
    }
  }
  return 2 * writes + ancilla_bits;  // write, m phase gates, unwrite
}

struct TrotterResult {
  DiscretizedWavefunction wf;
  std::int64_t kinetic_gates = 0;
  std::int64_t potential_gates = 0;
};

// steps applications of exp(-i H0 eps) exp(-i V eps): potential phase first,
// then the kinetic step, V sampled at the step's start time.
inline TrotterResult trotter_evolve(const DiscretizedWavefunction& psi0,
                                    const EvolutionSettings& es) {
  validate(psi0.grid);
  validate(es);
  TrotterResult out{psi0, 0, 0};
  for (int j = 0; j < es.steps; ++j) {
    const double t = double(j) * es.epsilon;
    const PotentialTable table =
        build_potential_table(psi0.grid, es, t);
    if (table.c != 0) {
      apply_diagonal_phase_table(out.wf.state, table.f, table.c);
      out.potential_gates += potential_gate_count(table, es.ancilla_bits);
    }
    kinetic_phase_step(out.wf.state, psi0.grid, es);
    out.kinetic_gates += kinetic_gate_count(psi0.grid.n_qubits);
  }
  if (norm_error(out.wf.state) > 1e-6)
    throw NumericalError("norm drift beyond tolerance during evolution");
  return out;
}

// Probability mass carried by momentum labels |m| <= fraction * N/2; a value
// near 1 certifies the state is resolved well inside the aliasing band.
template <typename R>
double momentum_band_mass(const StateVector<R>& s, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw DomainError("band fraction must lie in (0, 1]");
  StateVector<R> copy = s;
  apply_qft(copy);
  const SignedActionMap sam{s.n_qubits()};
  const double cut = fraction * double(s.dim() / 2);
  double mass = 0;
  for (Index l = 0; l < copy.dim(); ++l)
    if (std::abs(double(sam.to_signed(l))) <= cut) mass += std::norm(copy[l]);
  return mass;
}

// Position-space mean and variance of the probability density.
template <typename R>
std::pair<double, double> position_moments(const StateVector<R>& s,
                                           const SpatialGrid& grid) {
  if (s.n_qubits() != grid.n_qubits)
    throw DimensionError("state width does not match grid");
  double mean = 0, second = 0;
  for (Index i = 0; i < s.dim(); ++i) {
    const double p = std::norm(s[i]);
    mean += p * grid.x(i);
    second += p * grid.x(i) * grid.x(i);
  }
  return {mean, second - mean * mean};
}

}  // namespace qdyn
