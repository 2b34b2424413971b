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
#include <optional>
#include <string>
#include <vector>

#include "qdyn/circuit.hpp"
#include "qdyn/fourier.hpp"
#include "qdyn/qft.hpp"
#include "qdyn/rng.hpp"

namespace qdyn {

// Kicked sawtooth rotor on an N = 2^n level torus. One kick period applies
// the angle-diagonal kick exp(i*k*(theta - pi)^2 / 2) followed by the free
// rotation exp(-i*T*I^2/2); the stochasticity parameter is kT. The register
// holds the action representation: basis index i is the action level m
// through SignedActionMap, so a basis state is an action eigenstate and
// measured populations are directly the action distribution.
struct SawtoothParams {
  int n_qubits = 0;
  double k = 0;
  double T = 0;
  long long m0 = 0;  // launch action level, signed

  double kT() const { return k * T; }
};

inline void validate(const SawtoothParams& p) {
  check_qubit_count(p.n_qubits);
  if (!std::isfinite(p.k) || !std::isfinite(p.T))
    throw DomainError("sawtooth parameters must be finite");
  const Index half = dim_of(p.n_qubits) / 2;
  if (p.m0 < -half || p.m0 >= half)
    throw DomainError("launch action m0 outside [-N/2, N/2)");
}

inline SawtoothParams params_from_k_T(int n, double k, double T,
                                      long long m0 = 0) {
  SawtoothParams p{n, k, T, m0};
  validate(p);
  return p;
}

inline SawtoothParams params_from_k_kT(int n, double k, double kT,
                                       long long m0 = 0) {
  if (k == 0) throw DomainError("k must be nonzero to derive T from kT");
  return params_from_k_T(n, k, kT / k, m0);
}

inline SawtoothParams params_from_T_kT(int n, double T, double kT,
                                       long long m0 = 0) {
  if (T == 0) throw DomainError("T must be nonzero to derive k from kT");
  return params_from_k_T(n, kT / T, T, m0);
}

// The classical map is chaotic for kT > 0 or kT < -4; inside [-4, 0] it is
// stable or quasi-integrable and diffusion-based quantities lose meaning.
inline std::optional<std::string> regime_warning(double kT) {
  if (kT >= -4.0 && kT <= 0.0)
    return "kT = " + std::to_string(kT) +
           " lies in [-4, 0]: integrable/quasi-integrable regime, "
           "diffusive observables are not meaningful";
  return std::nullopt;
}

// Two's-complement reading of the register: indices below N/2 are
// non-negative actions, the rest wrap to negative values.
struct SignedActionMap {
  int n_qubits = 0;

  Index dim() const { return dim_of(n_qubits); }
  long long to_signed(Index i) const {
    const Index half = dim() / 2;
    return i < half ? static_cast<long long>(i)
                    : static_cast<long long>(i - dim());
  }
  Index to_index(long long m) const {
    const Index half = dim() / 2;
    if (m < -half || m >= half)
      throw DomainError("signed action out of range");
    return m >= 0 ? static_cast<Index>(m) : static_cast<Index>(m + dim());
  }
};

// Bit weights of the signed action: qubit q carries 2^q except the top qubit,
// which carries -2^(n-1).
inline std::vector<double> signed_action_weights(int n_qubits) {
  std::vector<double> w(static_cast<size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q)
    w[static_cast<size_t>(q)] = double(Index{1} << q);
  w[static_cast<size_t>(n_qubits - 1)] = -double(Index{1} << (n_qubits - 1));
  return w;
}

// Diagonal gates realizing exp(i * sum_{p,q} (a_p u_p - v)(a_q u_q - v) * s)
// over all n^2 ordered qubit pairs, a_q the bit of qubit q. Quadratic phase
// profiles decompose exactly this way, which is what keeps both map halves at
// n^2 two-qubit diagonal gates instead of a generic ancilla evaluation.
// mirror=true emits every gate with qubit indices reflected (q -> n-1-q),
// i.e. the same diagonal conjugated by the bit-reversal relabeling.
inline std::vector<GateOp> bilinear_phase_gates(int n_qubits, double s,
                                                const std::vector<double>& u,
                                                double v, bool mirror = false) {
  if (static_cast<int>(u.size()) != n_qubits)
    throw DimensionError("one weight per qubit required");
  std::vector<GateOp> ops;
  ops.reserve(static_cast<size_t>(n_qubits) * n_qubits);
  for (int p = 0; p < n_qubits; ++p) {
    for (int q = 0; q < n_qubits; ++q) {
      std::array<double, 4> ph{};
      for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b)
          ph[static_cast<size_t>((a << 1) | b)] =
              s * (a * u[static_cast<size_t>(p)] - v) *
              (b * u[static_cast<size_t>(q)] - v);
      const int gp = mirror ? n_qubits - 1 - p : p;
      const int gq = mirror ? n_qubits - 1 - q : q;
      ops.push_back(make_two_qubit_diagonal(gp, gq, ph));
    }
  }
  return ops;
}

// Kick diagonal exp(i*k*(theta_g - pi)^2/2) over angle samples
// theta_g = 2*pi*g/N as n^2 two-qubit diagonal gates: qubit q carries angle
// weight 2*pi*2^q/N and the constant -pi spreads as -2*pi/(2n) per factor.
inline std::vector<GateOp> kick_gate_ops(const SawtoothParams& p,
                                         bool mirror = false) {
  validate(p);
  const int n = p.n_qubits;
  const double N = double(dim_of(n));
  std::vector<double> u(static_cast<size_t>(n));
  for (int q = 0; q < n; ++q)
    u[static_cast<size_t>(q)] = double(Index{1} << q) / N;
  return bilinear_phase_gates(n, 2.0 * kPi * kPi * p.k, u, 1.0 / (2.0 * n),
                              mirror);
}

// Rotation diagonal exp(-i*T*m^2/2) over signed actions as n^2 gates.
inline std::vector<GateOp> rotation_gate_ops(const SawtoothParams& p,
                                             bool mirror = false) {
  validate(p);
  return bilinear_phase_gates(p.n_qubits, -p.T / 2.0,
                              signed_action_weights(p.n_qubits), 0.0, mirror);
}

inline Circuit uk_circuit(const SawtoothParams& p) {
  Circuit c;
  c.n_qubits = p.n_qubits;
  c.ops = kick_gate_ops(p);
  return c;
}

inline Circuit ut_circuit(const SawtoothParams& p) {
  Circuit c;
  c.n_qubits = p.n_qubits;
  c.ops = rotation_gate_ops(p);
  return c;
}

// One full kick period on the action-basis register:
//
//   [Fourier body] [mirrored kick gates] [inverse Fourier body] [rotation]
//
// which is the kick -> transform -> rotation -> transform-back cycle with
// both interior bit-reversal relabelings absorbed: conjugating a diagonal
// gate by the relabeling is the same gate on mirrored qubit indices, so the
// emitted list is pure gates, exactly n^2 + n(n+1)/2 + n^2 + n(n+1)/2
// = 3n^2 + n of them, and the circuit unitary equals
// rotation . F^dag . kick . F with F the normalized transform.
inline Circuit map_step_circuit(const SawtoothParams& p) {
  validate(p);
  Circuit c;
  c.n_qubits = p.n_qubits;
  const auto fwd = qft_gate_ops(p.n_qubits);
  c.ops = fwd;
  const auto kick = kick_gate_ops(p, /*mirror=*/true);
  c.ops.insert(c.ops.end(), kick.begin(), kick.end());
  for (auto it = fwd.rbegin(); it != fwd.rend(); ++it)
    c.ops.push_back(inverted(*it));
  const auto rot = rotation_gate_ops(p);
  c.ops.insert(c.ops.end(), rot.begin(), rot.end());
  return c;
}

// Gate-path evolution: applies the map circuit `steps` times in place.
// Norm drift is checked, never repaired.
template <typename R>
void evolve_quantum(StateVector<R>& s, const SawtoothParams& p, int steps) {
  if (s.n_qubits() != p.n_qubits)
    throw DimensionError("state width does not match map parameters");
  if (steps < 0) throw DomainError("step count must be non-negative");
  const Circuit c = map_step_circuit(p);
  for (int t = 0; t < steps; ++t) apply_circuit(s, c);
  if (norm_error(s) > 1e-6)
    throw NumericalError("norm drift beyond tolerance during evolution");
}

// Reference evolution of the same map through FFT transforms and directly
// exponentiated diagonals. Independent of the gate route end to end.
template <typename R>
void evolve_reference(StateVector<R>& s, const SawtoothParams& p, int steps) {
  if (s.n_qubits() != p.n_qubits)
    throw DimensionError("state width does not match map parameters");
  if (steps < 0) throw DomainError("step count must be non-negative");
  validate(p);
  using C = typename StateVector<R>::Complex;
  const Index N = s.dim();
  const SignedActionMap sam{p.n_qubits};
  typename StateVector<R>::Amplitudes kick(N), rot(N);
  for (Index i = 0; i < N; ++i) {
    const double theta = kTwoPi * double(i) / double(N);
    kick[i] = C(std::polar(R(1), static_cast<R>(p.k * (theta - kPi) *
                                                (theta - kPi) / 2.0)));
    const double m = double(sam.to_signed(i));
    rot[i] = C(std::polar(R(1), static_cast<R>(-p.T * m * m / 2.0)));
  }
  for (int t = 0; t < steps; ++t) {
    to_angle_representation(s);
    s.amps().array() *= kick.array();
    to_action_representation(s);
    s.amps().array() *= rot.array();
  }
}

// --- classical counterpart ---------------------------------------------

// One kick period of the classical map; the action is unbounded.
inline void classical_step(double& theta, double& action, double k, double T) {
  action += k * (theta - kPi);
  theta = std::fmod(theta + T * action, kTwoPi);
  if (theta < 0) theta += kTwoPi;
}

struct ClassicalEnsemble {
  Eigen::VectorXd theta;
  Eigen::VectorXd action;
  double initial_action = 0;
};

// Ensemble at fixed action with angles uniform on [0, 2*pi); trajectory j
// draws only from child stream j, so the ensemble is reproducible under any
// thread count.
inline ClassicalEnsemble init_classical_ensemble(double initial_action,
                                                 std::int64_t count,
                                                 const Rng& rng) {
  if (count < 1) throw DomainError("ensemble needs at least one trajectory");
  ClassicalEnsemble e;
  e.theta.resize(count);
  e.action = Eigen::VectorXd::Constant(count, initial_action);
  e.initial_action = initial_action;
  parallel_chunks(count, 4096, [&](std::int64_t b, std::int64_t eidx) {
    for (std::int64_t j = b; j < eidx; ++j) {
      Rng child = rng.split(static_cast<std::uint64_t>(j));
      e.theta[j] = child.uniform() * kTwoPi;
    }
  });
  return e;
}

inline void evolve_classical(ClassicalEnsemble& e, double k, double T,
                             int steps) {
  if (steps < 0) throw DomainError("step count must be non-negative");
  parallel_chunks(e.theta.size(), 4096, [&](std::int64_t b, std::int64_t eidx) {
    for (std::int64_t j = b; j < eidx; ++j) {
      double th = e.theta[j], ac = e.action[j];
      for (int t = 0; t < steps; ++t) classical_step(th, ac, k, T);
      e.theta[j] = th;
      e.action[j] = ac;
    }
  });
}

// Mean squared action displacement from the launch value.
inline double ensemble_second_moment(const ClassicalEnsemble& e) {
  return (e.action.array() - e.initial_action).square().mean();
}

struct DiffusionFit {
  double d_coefficient = 0;   // slope of <(dI)^2> vs t through the origin
  double r_squared = 1;
  std::vector<double> second_moments;  // index t-1 holds the value at time t
};

// Measures <(dI)^2>(t) for t = 1..t_max from an ensemble launched at the
// params' m0 and fits a line through the origin. R^2 compares residuals
// against variance about the mean; a k = 0 ensemble never moves and reports
// D = 0 with R^2 = 1.
inline DiffusionFit diffusion_coefficient(const SawtoothParams& p,
                                          std::int64_t trajectories, int t_max,
                                          const Rng& rng) {
  if (t_max < 2) throw DomainError("diffusion fit needs t_max >= 2");
  const double k = p.k, T = p.T;
  ClassicalEnsemble e =
      init_classical_ensemble(double(p.m0), trajectories, rng);
  DiffusionFit fit;
  fit.second_moments.reserve(static_cast<size_t>(t_max));
  for (int t = 1; t <= t_max; ++t) {
    evolve_classical(e, k, T, 1);
    fit.second_moments.push_back(ensemble_second_moment(e));
  }
  double stt = 0, sty = 0, ybar = 0;
  for (int t = 1; t <= t_max; ++t) {
    const double y = fit.second_moments[static_cast<size_t>(t - 1)];
    stt += double(t) * double(t);
    sty += double(t) * y;
    ybar += y;
  }
  ybar /= t_max;
  fit.d_coefficient = sty / stt;
  double ss_res = 0, ss_tot = 0;
  for (int t = 1; t <= t_max; ++t) {
    const double y = fit.second_moments[static_cast<size_t>(t - 1)];
    const double r = y - fit.d_coefficient * t;
    ss_res += r * r;
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// First time the quantum spread falls to half the diffusive prediction; the
// localization onset. moments[t-1] holds <(dI)^2> at time t.
inline int break_time_estimate(const std::vector<double>& quantum_moments,
                               double d_coefficient) {
  if (d_coefficient <= 0)
    throw DomainError("break time needs a positive diffusion coefficient");
  for (size_t idx = 0; idx < quantum_moments.size(); ++idx) {
    const int t = static_cast<int>(idx) + 1;
    if (quantum_moments[idx] < 0.5 * d_coefficient * t) return t;
  }
  return static_cast<int>(quantum_moments.size());
}

}  // namespace qdyn
