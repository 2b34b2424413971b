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

#include <algorithm>
#include <cmath>
#include <vector>

#include "qdyn/observables.hpp"
#include "qdyn/sawtooth.hpp"

namespace qdyn {

// Density evolution is exact but quadratic in the dimension; past this width
// the trajectory method is the intended route.
inline constexpr int kMaxDensityQubits = 10;

// Per-gate error strengths, applied to each operand qubit of each gate.
// p_dephase is the per-touch coherence loss: off-diagonals shrink by
// (1 - p_dephase), i.e. a phase flip with probability p_dephase / 2.
// p_relax is the amplitude-damping gamma per touch. p_readout flips each
// classical outcome bit independently at measurement.
struct NoiseParams {
  double p_dephase = 0;
  double p_relax = 0;
  double p_readout = 0;

  bool is_zero() const {
    return p_dephase == 0 && p_relax == 0 && p_readout == 0;
  }
};

inline void validate(const NoiseParams& np) {
  for (double p : {np.p_dephase, np.p_relax, np.p_readout})
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("noise probabilities must lie in [0, 1]");
}

// Uniform inflation of every strength (probabilities saturate at 1): a
// stand-in for real devices running worse than their calibration sheet.
inline NoiseParams scaled(const NoiseParams& np, double factor) {
  validate(np);
  if (!(factor >= 0) || !std::isfinite(factor))
    throw DomainError("noise scale factor must be finite and non-negative");
  NoiseParams out;
  out.p_dephase = std::min(1.0, np.p_dephase * factor);
  out.p_relax = std::min(1.0, np.p_relax * factor);
  out.p_readout = std::min(1.0, np.p_readout * factor);
  return out;
}

struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd rho;

  Index dim() const { return rho.rows(); }
};

inline DensityMatrix density_from_state(const StateVectorD& s) {
  if (s.n_qubits() > kMaxDensityQubits)
    throw CapacityError("density method supports at most 10 qubits");
  DensityMatrix dm;
  dm.n_qubits = s.n_qubits();
  dm.rho = s.amps() * s.amps().adjoint();
  return dm;
}

inline double trace_error(const DensityMatrix& dm) {
  return std::abs(dm.rho.trace() - std::complex<double>(1, 0));
}

inline double hermiticity_error(const DensityMatrix& dm) {
  return (dm.rho - dm.rho.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const DensityMatrix& dm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (dm.rho + dm.rho.adjoint()));
  return es.eigenvalues().minCoeff();
}

// rho -> U rho U^dag through the statevector kernels: the gate sweeps the
// columns of rho, then the columns of rho^dag. No dense gate matrix is built.
inline void apply_gate_density(DensityMatrix& dm, const GateOp& op) {
  StateVectorD col(dm.n_qubits);
  const Index n = dm.dim();
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < n; ++j) {
      col.amps() = dm.rho.col(j);
      apply_gate(col, op);
      dm.rho.col(j) = col.amps();
    }
    dm.rho.adjointInPlace();
  }
}

enum class Channel { Dephase, Relax };

// Single-qubit channels, written directly on the 2x2 block structure picked
// out by qubit q of the row and column indices.
inline void apply_channel(DensityMatrix& dm, Channel ch, int q, double param) {
  check_qubit_index(q, dm.n_qubits);
  if (!(param >= 0.0 && param <= 1.0))
    throw DomainError("channel parameter must lie in [0, 1]");
  if (param == 0) return;
  const Index mask = Index{1} << q;
  const Index half = dm.dim() >> 1;
  if (ch == Channel::Dephase) {
    // (1-p) rho + p Z rho Z: entries whose row and column disagree on bit q
    // shrink by (1 - 2p).
    const double f = 1.0 - 2.0 * param;
    for (Index hr = 0; hr < dm.dim(); ++hr)
      for (Index hc = 0; hc < half; ++hc) {
        const Index c0 = detail::insert_zero_bit(hc, q);
        const Index c1 = c0 | mask;
        if (hr & mask) {
          dm.rho(hr, c0) *= f;
        } else {
          dm.rho(hr, c1) *= f;
        }
      }
    return;
  }
  // Amplitude damping with Kraus pair {diag(1, sqrt(1-g)), sqrt(g)|0><1|}.
  const double g = param;
  const double s = std::sqrt(1.0 - g);
  for (Index hr = 0; hr < half; ++hr) {
    const Index r0 = detail::insert_zero_bit(hr, q);
    const Index r1 = r0 | mask;
    for (Index hc = 0; hc < half; ++hc) {
      const Index c0 = detail::insert_zero_bit(hc, q);
      const Index c1 = c0 | mask;
      dm.rho(r0, c0) += g * dm.rho(r1, c1);
      dm.rho(r1, c1) *= 1.0 - g;
      dm.rho(r0, c1) *= s;
      dm.rho(r1, c0) *= s;
    }
  }
}

namespace detail {

inline std::vector<int> noisy_qubits(const GateOp& op) {
  std::vector<int> qs = operand_qubits(op);
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  return qs;
}

}  // namespace detail

namespace detail {

inline void check_density_circuit(const Circuit& c, const NoiseParams& np) {
  validate(np);
  check_qubit_count(c.n_qubits);
  for (const auto& op : c.ops) detail::validate_op(op, c.n_qubits);
  if (c.n_qubits > kMaxDensityQubits)
    throw CapacityError("density method supports at most 10 qubits");
}

inline void noisy_evolve_density(DensityMatrix& dm, const Circuit& c,
                                 const NoiseParams& np) {
  for (const auto& op : c.ops) {
    apply_gate_density(dm, op);
    for (int q : detail::noisy_qubits(op)) {
      if (np.p_dephase > 0)
        apply_channel(dm, Channel::Dephase, q, np.p_dephase / 2.0);
      if (np.p_relax > 0) apply_channel(dm, Channel::Relax, q, np.p_relax);
    }
  }
  if (c.bit_reversal_at_end) {
    DensityMatrix out = dm;
    const int n = c.n_qubits;
    for (Index i = 0; i < dm.dim(); ++i) {
      Index ri = 0;
      for (int b = 0; b < n; ++b)
        if (i & (Index{1} << b)) ri |= Index{1} << (n - 1 - b);
      for (Index j = 0; j < dm.dim(); ++j) {
        Index rj = 0;
        for (int b = 0; b < n; ++b)
          if (j & (Index{1} << b)) rj |= Index{1} << (n - 1 - b);
        out.rho(ri, rj) = dm.rho(i, j);
      }
    }
    dm = std::move(out);
  }
  // global phase cancels against its conjugate
}

}  // namespace detail

// Exact mixed-state run: after every gate, dephasing then relaxation touch
// each operand qubit in ascending order. The final relabel and global phase
// are noise-free (they are bookkeeping, not gates).
inline DensityMatrix noisy_run_density(const Circuit& c,
                                       const NoiseParams& np,
                                       const StateVectorD* initial = nullptr) {
  detail::check_density_circuit(c, np);
  StateVectorD start = initial ? *initial : init_basis_state(c.n_qubits, 0);
  if (start.n_qubits() != c.n_qubits)
    throw DimensionError("initial state width does not match circuit");
  DensityMatrix dm = density_from_state(start);
  detail::noisy_evolve_density(dm, c, np);
  return dm;
}

// Same run continued from an already mixed state.
inline DensityMatrix noisy_run_density(const Circuit& c,
                                       const NoiseParams& np,
                                       const DensityMatrix& initial) {
  detail::check_density_circuit(c, np);
  if (initial.n_qubits != c.n_qubits)
    throw DimensionError("initial state width does not match circuit");
  DensityMatrix dm = initial;
  detail::noisy_evolve_density(dm, c, np);
  return dm;
}

struct TrajectoryBatch {
  int n_qubits = 0;
  std::uint64_t count = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;  // per-trajectory, derived from master
  Eigen::VectorXd mean_probs;        // basis-state populations
  Eigen::VectorXd var_probs;         // sample variance across trajectories
};

namespace detail {

// One stochastic unravelling of the per-gate channels. With all-zero noise
// this reduces to exactly the pure-state circuit application, drawing no
// random numbers.
inline void run_one_trajectory(StateVectorD& s, const Circuit& c,
                               const NoiseParams& np, Rng& rng) {
  const Index dim = s.dim();
  for (const auto& op : c.ops) {
    apply_gate(s, op);
    if (np.p_dephase == 0 && np.p_relax == 0) continue;
    for (int q : noisy_qubits(op)) {
      const Index mask = Index{1} << q;
      if (np.p_dephase > 0) {
        if (rng.uniform() < np.p_dephase / 2.0) {
          for (Index h = 0; h < dim / 2; ++h) {
            const Index i1 = insert_zero_bit(h, q) | mask;
            s[i1] = -s[i1];
          }
        }
      }
      if (np.p_relax > 0) {
        const double g = np.p_relax;
        double p1 = 0;
        for (Index h = 0; h < dim / 2; ++h)
          p1 += std::norm(s[insert_zero_bit(h, q) | mask]);
        if (rng.uniform() < g * p1) {
          // Jump: project |1> to |0> and renormalize.
          const double inv = 1.0 / std::sqrt(p1);
          for (Index h = 0; h < dim / 2; ++h) {
            const Index i0 = insert_zero_bit(h, q);
            s[i0] = s[i0 | mask] * inv;
            s[i0 | mask] = 0;
          }
        } else {
          const double keep = std::sqrt(1.0 - g);
          const double inv = 1.0 / std::sqrt(1.0 - g * p1);
          for (Index h = 0; h < dim / 2; ++h) {
            const Index i0 = insert_zero_bit(h, q);
            s[i0] *= inv;
            s[i0 | mask] *= keep * inv;
          }
        }
      }
    }
  }
  if (c.bit_reversal_at_end) bit_reverse_permute(s);
  if (c.global_phase != 0.0)
    s.amps() *= std::polar(1.0, c.global_phase);
}

}  // namespace detail

// Monte-Carlo unravelling: `count` independent trajectories with seeds split
// from the master seed, aggregated into per-basis-state population mean and
// sample variance. Chunked reduction keeps results thread-count independent.
inline TrajectoryBatch noisy_run_trajectories(
    const Circuit& c, const NoiseParams& np, std::uint64_t count,
    std::uint64_t master_seed, const StateVectorD* initial = nullptr) {
  validate(np);
  check_qubit_count(c.n_qubits);
  for (const auto& op : c.ops) detail::validate_op(op, c.n_qubits);
  if (count < 1) throw DomainError("trajectory count must be at least 1");
  StateVectorD start = initial ? *initial : init_basis_state(c.n_qubits, 0);
  if (start.n_qubits() != c.n_qubits)
    throw DimensionError("initial state width does not match circuit");

  TrajectoryBatch batch;
  batch.n_qubits = c.n_qubits;
  batch.count = count;
  batch.master_seed = master_seed;
  const Rng master(master_seed);
  batch.seeds.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    batch.seeds[i] = master.split(i).seed();

  const Index dim = start.dim();
  const std::int64_t chunk = 256;
  const std::int64_t n_chunks =
      (std::int64_t(count) + chunk - 1) / chunk;
  std::vector<Eigen::VectorXd> sums(static_cast<size_t>(n_chunks));
  std::vector<Eigen::VectorXd> sqs(static_cast<size_t>(n_chunks));
  parallel_chunks(std::int64_t(count), chunk, [&](std::int64_t b,
                                                  std::int64_t e) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
    for (std::int64_t t = b; t < e; ++t) {
      StateVectorD s = start;
      Rng rng(batch.seeds[static_cast<size_t>(t)]);
      detail::run_one_trajectory(s, c, np, rng);
      for (Index i = 0; i < dim; ++i) {
        const double p = std::norm(s[i]);
        sum[i] += p;
        sq[i] += p * p;
      }
    }
    sums[static_cast<size_t>(b / chunk)] = std::move(sum);
    sqs[static_cast<size_t>(b / chunk)] = std::move(sq);
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  for (std::int64_t g = 0; g < n_chunks; ++g) {
    sum += sums[static_cast<size_t>(g)];
    sq += sqs[static_cast<size_t>(g)];
  }
  batch.mean_probs = sum / double(count);
  if (count > 1) {
    batch.var_probs =
        (sq - double(count) * batch.mean_probs.cwiseProduct(batch.mean_probs))
            .cwiseMax(0.0) /
        double(count - 1);
  } else {
    batch.var_probs = Eigen::VectorXd::Zero(dim);
  }
  return batch;
}

// --- readout errors ---------------------------------------------------------

// Exact convolution of a basis-state distribution with the product of
// independent per-bit flip channels.
inline std::vector<double> apply_readout_error(std::vector<double> probs,
                                               double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("readout flip probability must lie in [0, 1]");
  const size_t n = probs.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw DimensionError("distribution length must be a power of two");
  if (p == 0) return probs;
  size_t mask = 1;
  while (mask < n) {
    for (size_t i = 0; i < n; ++i) {
      if (i & mask) continue;
      const double a = probs[i], b = probs[i | mask];
      probs[i] = (1.0 - p) * a + p * b;
      probs[i | mask] = (1.0 - p) * b + p * a;
    }
    mask <<= 1;
  }
  return probs;
}

// Stochastic version for sampled records: each bit of each shot flips
// independently with probability p.
inline MeasurementRecord apply_readout_error(const MeasurementRecord& rec,
                                             double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("readout flip probability must lie in [0, 1]");
  MeasurementRecord out;
  out.n_qubits = rec.n_qubits;
  out.shots = rec.shots;
  out.seed = rng.seed();
  for (const auto& [bits, count] : rec.counts) {
    for (std::uint64_t shot = 0; shot < count; ++shot) {
      std::uint64_t flipped = bits;
      if (p > 0)
        for (int q = 0; q < rec.n_qubits; ++q)
          if (rng.uniform() < p) flipped ^= std::uint64_t{1} << q;
      ++out.counts[flipped];
    }
  }
  return out;
}

// --- localization experiment ------------------------------------------------

// Side-by-side action distributions for one map evolution: pure statevector,
// exact noisy density with readout convolution, and the shots x repetitions
// sampling protocol on top of the noisy density.
struct LocalizationTable {
  SawtoothParams params;
  NoiseParams noise;
  int t = 0;
  std::uint64_t shots = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::size_t gates_per_step = 0;

  std::vector<long long> m;  // signed levels, ascending
  std::vector<double> w_noiseless;
  std::vector<double> w_noisy_exact;
  std::vector<double> w_sampled_mean;
  std::vector<double> w_sampled_std;
};

inline LocalizationTable localization_experiment(const SawtoothParams& p,
                                                 const NoiseParams& np,
                                                 int t, std::uint64_t shots,
                                                 int repetitions,
                                                 std::uint64_t seed) {
  validate(p);
  validate(np);
  if (t < 0) throw DomainError("step count must be non-negative");
  if (shots < 1) throw DomainError("shot count must be at least 1");
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");

  LocalizationTable table;
  table.params = p;
  table.noise = np;
  table.t = t;
  table.shots = shots;
  table.repetitions = repetitions;
  table.seed = seed;

  const SignedActionMap sam{p.n_qubits};
  const Index N = dim_of(p.n_qubits);
  const StateVectorD start = init_basis_state(p.n_qubits, sam.to_index(p.m0));

  const Circuit step = map_step_circuit(p);
  table.gates_per_step = step.ops.size();
  Circuit full;
  full.n_qubits = p.n_qubits;
  full.ops.reserve(step.ops.size() * static_cast<size_t>(t));
  for (int j = 0; j < t; ++j)
    full.ops.insert(full.ops.end(), step.ops.begin(), step.ops.end());

  // Pure run.
  StateVectorD pure = start;
  evolve_quantum(pure, p, t);
  const auto dist = action_distribution(pure, p.m0);

  // Exact noisy run and its readout-convolved diagonal.
  const DensityMatrix dm = noisy_run_density(full, np, &start);
  std::vector<double> diag(static_cast<size_t>(N));
  for (Index i = 0; i < N; ++i) diag[static_cast<size_t>(i)] =
      std::max(0.0, dm.rho(i, i).real());
  const auto corrupted = apply_readout_error(diag, np.p_readout);

  // Sampling protocol: per repetition, `shots` draws from the noisy diagonal
  // followed by stochastic bit flips.
  std::vector<std::vector<double>> reps(static_cast<size_t>(repetitions));
  std::vector<double> cdf(static_cast<size_t>(N));
  double acc = 0;
  for (Index i = 0; i < N; ++i) {
    acc += diag[static_cast<size_t>(i)];
    cdf[static_cast<size_t>(i)] = acc;
  }
  const Rng master(seed);
  for (int r = 0; r < repetitions; ++r) {
    Rng rng = master.split(static_cast<std::uint64_t>(r));
    std::vector<double> w(static_cast<size_t>(N), 0.0);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
      const double u = rng.uniform() * acc;
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      std::uint64_t bits = static_cast<std::uint64_t>(
          std::min<std::ptrdiff_t>(it - cdf.begin(), N - 1));
      if (np.p_readout > 0)
        for (int q = 0; q < p.n_qubits; ++q)
          if (rng.uniform() < np.p_readout) bits ^= std::uint64_t{1} << q;
      w[static_cast<size_t>(bits)] += 1.0;
    }
    for (auto& v : w) v /= double(shots);
    reps[static_cast<size_t>(r)] = std::move(w);
  }

  table.m.resize(static_cast<size_t>(N));
  table.w_noiseless.resize(static_cast<size_t>(N));
  table.w_noisy_exact.resize(static_cast<size_t>(N));
  table.w_sampled_mean.resize(static_cast<size_t>(N));
  table.w_sampled_std.resize(static_cast<size_t>(N));
  for (Index j = 0; j < N; ++j) {
    const long long m = j - N / 2;
    const Index idx = sam.to_index(m);
    table.m[static_cast<size_t>(j)] = m;
    table.w_noiseless[static_cast<size_t>(j)] = dist.at(m);
    table.w_noisy_exact[static_cast<size_t>(j)] =
        corrupted[static_cast<size_t>(idx)];
    double mean = 0;
    for (const auto& w : reps) mean += w[static_cast<size_t>(idx)];
    mean /= double(repetitions);
    double var = 0;
    for (const auto& w : reps) {
      const double d = w[static_cast<size_t>(idx)] - mean;
      var += d * d;
    }
    table.w_sampled_mean[static_cast<size_t>(j)] = mean;
    table.w_sampled_std[static_cast<size_t>(j)] =
        repetitions > 1 ? std::sqrt(var / double(repetitions - 1)) : 0.0;
  }
  return table;
}

}  // namespace qdyn
