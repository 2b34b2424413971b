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
#include <functional>
#include <utility>
#include <vector>

#include "qdyn/circuit.hpp"
#include "qdyn/noise.hpp"
#include "qdyn/rng.hpp"
#include "qdyn/statevector.hpp"
#include "qdyn/synthesis.hpp"

namespace qdyn {

// Achievable-volume figure of merit. A register of kappa qubits supports a
// computation of depth d(kappa) = 1 / (kappa * eps(kappa)) before the
// accumulated per-gate error reaches unity; the usable square size is
// min(kappa, d), and the volume is 2 to the largest usable size.

struct QVolumeInput {
  int n_qubits = 0;
  std::function<double(int)> eps_eff;  // per-gate effective error at width k
};

inline QVolumeInput constant_eps(int n_qubits, double eps) {
  return {n_qubits, [eps](int) { return eps; }};
}

struct QVolumeRow {
  int kappa = 0;
  double eps = 0;
  double depth = 0;
  double score = 0;
};

struct QVolumeReport {
  int log2_vq = 0;
  std::uint64_t vq = 0;
  int best_kappa = 0;
  std::vector<QVolumeRow> rows;
};

inline QVolumeReport quantum_volume(const QVolumeInput& in) {
  if (in.n_qubits < 1) throw DomainError("need at least one qubit");
  if (in.n_qubits >= 63) throw CapacityError("volume exceeds 64-bit range");
  if (!in.eps_eff) throw DomainError("missing error-rate function");
  QVolumeReport out;
  out.rows.reserve(in.n_qubits);
  double best = 0;
  for (int k = 1; k <= in.n_qubits; ++k) {
    const double eps = in.eps_eff(k);
    if (!std::isfinite(eps) || eps <= 0)
      throw DomainError("error rate must be positive and finite");
    QVolumeRow row;
    row.kappa = k;
    row.eps = eps;
    row.depth = 1.0 / (k * eps);
    row.score = std::min(static_cast<double>(k), row.depth);
    if (row.score > best) {
      best = row.score;
      out.best_kappa = k;
    }
    out.rows.push_back(row);
  }
  out.log2_vq = static_cast<int>(std::floor(best));
  out.vq = std::uint64_t{1} << out.log2_vq;
  return out;
}

// Brickwork coupling pattern: even layers pair (0,1),(2,3),...; odd layers
// pair (1,2),(3,4),.... A two-qubit register has no interior odd pairs, so
// odd layers there reuse the only pair available.
inline std::vector<std::pair<int, int>> brickwork_pairs(int kappa,
                                                        int layer) {
  if (kappa < 2) throw DomainError("brickwork needs at least two qubits");
  if (layer < 0) throw DomainError("layer index must be nonnegative");
  std::vector<std::pair<int, int>> pairs;
  for (int q = layer % 2; q + 1 < kappa; q += 2) pairs.emplace_back(q, q + 1);
  if (pairs.empty()) pairs.emplace_back(0, 1);
  return pairs;
}

// Layered random circuit: every layer places a Haar-random two-qubit
// unitary on each brickwork pair. 25 elementary ops per pair.
inline Circuit brickwork_circuit(int kappa, int layers, Rng& rng) {
  check_qubit_count(kappa);
  if (kappa < 2) throw DomainError("brickwork needs at least two qubits");
  if (layers < 0) throw DomainError("layer count must be nonnegative");
  Circuit c{kappa};
  for (int l = 0; l < layers; ++l)
    for (const auto& [lo, hi] : brickwork_pairs(kappa, l)) {
      const Eigen::Matrix4cd u = random_unitary(4, rng);
      append_two_qubit_unitary(c, u, hi, lo);
    }
  return c;
}

struct EpsEffEstimate {
  double eps = 0;     // per-elementary-op effective error from the decay fit
  double ci_lo = 0;   // 95% confidence band on eps
  double ci_hi = 0;
  double amplitude = 0;  // fitted fidelity at zero gates
  std::vector<int> gates;       // elementary ops at each sampled depth
  std::vector<double> mean_f;   // mean fidelity over sequences at each depth
};

// Measures the effective per-op error rate of a noise model by running
// random brickwork sequences on kappa qubits, comparing the noisy density
// against the ideal state, and fitting ln F against elementary gate count.
// The fit is exponential-decay only; a clearly growing fidelity means the
// model is outside the decay regime and is reported as a failure.
inline EpsEffEstimate estimate_eps_eff(int kappa, const NoiseParams& noise,
                                       int sequences,
                                       const std::vector<int>& depth_grid,
                                       std::uint64_t seed) {
  validate(noise);
  check_qubit_count(kappa);
  if (kappa < 2) throw DomainError("need at least two qubits");
  if (kappa > kMaxDensityQubits)
    throw CapacityError("density evolution is limited to 10 qubits");
  if (sequences < 1) throw DomainError("need at least one sequence");
  if (depth_grid.size() < 2)
    throw DomainError("need at least two depth points");
  for (size_t i = 0; i < depth_grid.size(); ++i) {
    if (depth_grid[i] < 1) throw DomainError("depths must be positive");
    if (i > 0 && depth_grid[i] <= depth_grid[i - 1])
      throw DomainError("depths must be strictly increasing");
  }

  const int points = static_cast<int>(depth_grid.size());
  EpsEffEstimate out;
  out.gates.assign(points, 0);
  out.mean_f.assign(points, 0.0);
  const Rng master(seed);

  for (int s = 0; s < sequences; ++s) {
    Rng rng = master.split(static_cast<std::uint64_t>(s));
    StateVectorD pure = init_basis_state(kappa, 0);
    DensityMatrix noisy = density_from_state(pure);
    int done_layers = 0;
    for (int p = 0; p < points; ++p) {
      Circuit segment{kappa};
      for (; done_layers < depth_grid[p]; ++done_layers)
        for (const auto& [lo, hi] : brickwork_pairs(kappa, done_layers)) {
          const Eigen::Matrix4cd u = random_unitary(4, rng);
          append_two_qubit_unitary(segment, u, hi, lo);
        }
      apply_circuit(pure, segment);
      noisy = noisy_run_density(segment, noise, noisy);
      const double f = std::real(
          (pure.amps().adjoint() * noisy.rho * pure.amps()).value());
      out.mean_f[p] += f / sequences;
    }
  }

  // Cumulative elementary-op counts are sequence independent: 25 ops per
  // brickwork pair per layer.
  int cum = 0, layer = 0;
  for (int p = 0; p < points; ++p) {
    for (; layer < depth_grid[p]; ++layer)
      cum += 25 * static_cast<int>(brickwork_pairs(kappa, layer).size());
    out.gates[p] = cum;
  }

  double sx = 0, sy = 0;
  std::vector<double> ys(points);
  for (int p = 0; p < points; ++p) {
    if (!(out.mean_f[p] > 0))
      throw NumericalError("fidelity vanished before the last depth point");
    ys[p] = std::log(out.mean_f[p]);
    sx += out.gates[p];
    sy += ys[p];
  }
  const double xbar = sx / points, ybar = sy / points;
  double sxx = 0, sxy = 0;
  for (int p = 0; p < points; ++p) {
    const double dx = out.gates[p] - xbar;
    sxx += dx * dx;
    sxy += dx * (ys[p] - ybar);
  }
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * xbar;
  if (slope > 1e-9)
    throw NumericalError("fidelity grew with depth; decay fit is invalid");
  double ssr = 0;
  for (int p = 0; p < points; ++p) {
    const double r = ys[p] - (intercept + slope * out.gates[p]);
    ssr += r * r;
  }
  const double se =
      points > 2 ? std::max(std::sqrt(ssr / (points - 2) / sxx), 1e-15)
                 : 1e-15;
  out.eps = 1.0 - std::exp(slope);
  out.ci_lo = 1.0 - std::exp(slope + 1.96 * se);
  out.ci_hi = 1.0 - std::exp(slope - 1.96 * se);
  out.amplitude = std::exp(intercept);
  return out;
}

}  // namespace qdyn
