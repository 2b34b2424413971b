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

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "qdyn/fourier.hpp"
#include "qdyn/sawtooth.hpp"

namespace qdyn {

// Probabilities over signed action levels, stored ascending: slot j holds
// W at m = j - N/2.
struct ActionDistribution {
  int n_qubits = 0;
  long long m0 = 0;  // reference level for localization quantities
  std::vector<double> w;

  Index size() const { return static_cast<Index>(w.size()); }
  long long m_at(Index j) const { return j - static_cast<long long>(size() / 2); }
  double at(long long m) const {
    const Index j = m + static_cast<long long>(size() / 2);
    if (j < 0 || j >= size()) throw DomainError("action level out of range");
    return w[static_cast<size_t>(j)];
  }
};

template <typename R>
ActionDistribution action_distribution(const StateVector<R>& s,
                                       long long m0 = 0) {
  ActionDistribution dist;
  dist.n_qubits = s.n_qubits();
  dist.m0 = m0;
  const SignedActionMap sam{s.n_qubits()};
  dist.w.resize(static_cast<size_t>(s.dim()));
  for (Index i = 0; i < s.dim(); ++i) {
    const long long m = sam.to_signed(i);
    dist.w[static_cast<size_t>(m + s.dim() / 2)] = std::norm(s[i]);
  }
  return dist;
}

inline double total_probability(const ActionDistribution& d) {
  double sum = 0;
  for (double v : d.w) sum += v;
  return sum;
}

// Mean-centered second moment of the level index.
inline double second_moment(const ActionDistribution& d) {
  double mean = 0;
  for (Index j = 0; j < d.size(); ++j)
    mean += d.w[static_cast<size_t>(j)] * double(d.m_at(j));
  double acc = 0;
  for (Index j = 0; j < d.size(); ++j) {
    const double dm = double(d.m_at(j)) - mean;
    acc += d.w[static_cast<size_t>(j)] * dm * dm;
  }
  return acc;
}

// Second moment about a fixed reference level (the launch action for spread
// tracking).
inline double second_moment_about(const ActionDistribution& d, long long ref) {
  double acc = 0;
  for (Index j = 0; j < d.size(); ++j) {
    const double dm = double(d.m_at(j) - ref);
    acc += d.w[static_cast<size_t>(j)] * dm * dm;
  }
  return acc;
}

struct LocalizationFit {
  bool localized = false;  // false: slope not negative, no length defined
  double ell = 0;          // decay length of exp(-2|m - m0|/ell)
  double r_squared = 0;
  long long support_lo = 0, support_hi = 0;  // m-range entering the fit
  int points_used = 0;
};

// Least-squares fit of ln W vs |m - m0| over levels with W above the floor;
// the exponential profile W = (1/ell) exp(-2|m-m0|/ell) has slope -2/ell.
inline LocalizationFit fit_localization_length(const ActionDistribution& d,
                                               double floor_value = 1e-8) {
  if (!(floor_value > 0)) throw DomainError("fit floor must be positive");
  LocalizationFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool first = true;
  for (Index j = 0; j < d.size(); ++j) {
    const double w = d.w[static_cast<size_t>(j)];
    if (w <= floor_value) continue;
    const long long m = d.m_at(j);
    const double x = std::abs(double(m - d.m0));
    const double y = std::log(w);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
    if (first || m < fit.support_lo) fit.support_lo = m;
    if (first || m > fit.support_hi) fit.support_hi = m;
    first = false;
  }
  if (n < 4)
    throw DomainError("localization fit needs at least 4 levels above floor");
  fit.points_used = n;
  const double denom = double(n) * sxx - sx * sx;
  if (denom == 0)
    throw DomainError("localization fit is degenerate: one distance value");
  const double slope = (double(n) * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / double(n);

  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / double(n);
  for (Index j = 0; j < d.size(); ++j) {
    const double w = d.w[static_cast<size_t>(j)];
    if (w <= floor_value) continue;
    const double x = std::abs(double(d.m_at(j) - d.m0));
    const double y = std::log(w);
    ss_res += (y - slope * x - intercept) * (y - slope * x - intercept);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  // Slopes shallower than 1e-12 per level cannot be told from flat in double
  // precision; a uniform profile must not read as localized.
  if (slope < -1e-12) {
    fit.localized = true;
    fit.ell = -2.0 / slope;
  }
  return fit;
}

// --- phase-space distribution ---------------------------------------------

struct HusimiSpec {
  Index n_theta = 0;   // 0: use N
  Index n_action = 0;  // 0: use N
};

struct HusimiGrid {
  Index n_theta = 0;
  Index n_action = 0;
  double sigma_theta = 0;
  double sigma_action = 0;
  double cell_area = 0;
  bool coarse_warning = false;  // grid under-resolves the N levels
  Eigen::MatrixXd values;       // rows: action centers, cols: theta centers

  double theta_center(Index j) const {
    return kTwoPi * double(j) / double(n_theta);
  }
  double action_center(Index i) const {
    return -0.5 * double(Index{1} << grid_qubits) +
           double(i) * action_step;
  }
  int grid_qubits = 0;
  double action_step = 0;
};

namespace detail {

// Gaussian wrapped onto the N-periodic action lattice.
inline double periodized_gaussian(double x, double sigma, double period) {
  double acc = 0;
  for (int r = -3; r <= 3; ++r) {
    const double u = x + double(r) * period;
    acc += std::exp(-u * u / (4.0 * sigma * sigma));
  }
  return acc;
}

}  // namespace detail

// Smoothed phase-space density: overlap magnitudes with minimal-uncertainty
// coherent states (sigma_theta * sigma_action = 1/2, sigma_action =
// sqrt(N/4 pi)) centered on the grid. Row computation: the theta scan of a
// fixed action center is one length-n_theta inverse FFT of the windowed
// amplitudes. Normalized so that cell sum x cell area = 1 exactly on
// commensurate grids (n_theta, n_action >= N with N | n_action); coarser
// grids set coarse_warning.
template <typename R>
HusimiGrid husimi(const StateVector<R>& s, const HusimiSpec& spec = {}) {
  const Index N = s.dim();
  if (spec.n_theta < 0 || spec.n_action < 0)
    throw DomainError("phase-space grid sizes must be non-negative");
  HusimiGrid grid;
  grid.grid_qubits = s.n_qubits();
  grid.n_theta = spec.n_theta > 0 ? spec.n_theta : N;
  grid.n_action = spec.n_action > 0 ? spec.n_action : N;
  grid.sigma_action = std::sqrt(double(N) / (4.0 * kPi));
  grid.sigma_theta = 0.5 / grid.sigma_action;
  grid.action_step = double(N) / double(grid.n_action);
  grid.cell_area = (kTwoPi / double(grid.n_theta)) * grid.action_step;
  grid.coarse_warning = grid.n_theta < N || grid.n_action < N;
  grid.values.resize(grid.n_action, grid.n_theta);

  const SignedActionMap sam{s.n_qubits()};

  // Frame constant: sum over action centers of the squared window, averaged
  // over integer levels (constant on commensurate grids).
  double frame = 0;
  for (Index m = 0; m < N; ++m) {
    const double ms = double(sam.to_signed(m));
    double row = 0;
    for (Index i = 0; i < grid.n_action; ++i) {
      const double g = detail::periodized_gaussian(
          ms - grid.action_center(i), grid.sigma_action, double(N));
      row += g * g;
    }
    frame += row;
  }
  frame /= double(N);
  // Resolution of identity: 2 pi * frame * action_step carries the cell sum
  // to 1 for any state on commensurate grids.
  const double scale = 1.0 / (kTwoPi * frame * grid.action_step);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> slots(static_cast<size_t>(grid.n_theta));
  std::vector<std::complex<double>> out(static_cast<size_t>(grid.n_theta));
  for (Index i = 0; i < grid.n_action; ++i) {
    std::fill(slots.begin(), slots.end(), std::complex<double>(0, 0));
    for (Index idx = 0; idx < N; ++idx) {
      const long long m = sam.to_signed(idx);
      const double g = detail::periodized_gaussian(
          double(m) - grid.action_center(i), grid.sigma_action, double(N));
      // exp(+i m theta_j) lives at FFT slot m mod n_theta; an under-sized
      // theta grid folds levels together (aliasing), which coarse_warning
      // already flags.
      long long slot = m % static_cast<long long>(grid.n_theta);
      if (slot < 0) slot += grid.n_theta;
      slots[static_cast<size_t>(slot)] +=
          g * std::complex<double>(s[idx]);
    }
    fft.inv(out, slots);  // inv carries exp(+2 pi i j k / n) / n
    for (Index j = 0; j < grid.n_theta; ++j) {
      const std::complex<double> r =
          out[static_cast<size_t>(j)] * double(grid.n_theta);
      grid.values(i, j) = scale * std::norm(r);
    }
  }
  return grid;
}

inline double husimi_total(const HusimiGrid& g) {
  return g.values.sum() * g.cell_area;
}

// --- correlations and fidelity --------------------------------------------

// Operator diagonal in the action or angle basis, evaluated on the signed
// level m or the angle sample theta respectively. Values may be complex and
// need not be unimodular.
struct DiagonalObservable {
  enum class Basis { Action, Angle };
  Basis basis = Basis::Action;
  std::function<std::complex<double>(double)> value;  // null: identity
};

template <typename R>
void apply_diagonal_observable(StateVector<R>& s,
                               const DiagonalObservable& obs,
                               bool conjugated = false) {
  if (!obs.value) return;  // identity
  const SignedActionMap sam{s.n_qubits()};
  const bool angle = obs.basis == DiagonalObservable::Basis::Angle;
  if (angle) to_angle_representation(s);
  for (Index i = 0; i < s.dim(); ++i) {
    const double arg = angle ? kTwoPi * double(i) / double(s.dim())
                             : double(sam.to_signed(i));
    std::complex<double> v = obs.value(arg);
    if (conjugated) v = std::conj(v);
    s[i] *= typename StateVector<R>::Complex(v);
  }
  if (angle) to_action_representation(s);
}

// <psi0| (U^dag)^t A^dag U^t B |psi0> for the kicked map U: two forward
// evolutions (of psi0 and of B psi0) and one inner product, never a backward
// run. B psi0 is renormalized before evolving (the evolver insists on unit
// norm) and the scale is restored in the result.
template <typename R>
std::complex<double> correlation_function(const StateVector<R>& psi0,
                                          const DiagonalObservable& a,
                                          const DiagonalObservable& b,
                                          const SawtoothParams& p, int t) {
  StateVector<R> left = psi0;
  evolve_quantum(left, p, t);
  apply_diagonal_observable(left, a);  // <A U^t psi0| supplies the dagger
  StateVector<R> right = psi0;
  apply_diagonal_observable(right, b);
  const double scale = right.amps().norm();
  if (scale == 0) return {0, 0};
  right.amps() /= typename StateVector<R>::Real(scale);
  evolve_quantum(right, p, t);
  return scale * overlap(left, right);
}

// Squared echo overlap |<psi_eps(t)|psi(t)>|^2 under a kick-strength
// perturbation k -> k + eps_k.
template <typename R>
double fidelity_direct(const StateVector<R>& psi0, const SawtoothParams& p,
                       double eps_k, int t) {
  if (!std::isfinite(eps_k)) throw DomainError("perturbation must be finite");
  StateVector<R> forward = psi0;
  evolve_quantum(forward, p, t);
  StateVector<R> perturbed = psi0;
  SawtoothParams pp = p;
  pp.k += eps_k;
  evolve_quantum(perturbed, pp, t);
  return std::norm(overlap(perturbed, forward));
}

// The echo operator (U_eps^dag)^t U^t as one plain circuit, suitable for
// controlled application.
inline Circuit echo_circuit(const SawtoothParams& p, double eps_k, int t) {
  if (t < 0) throw DomainError("step count must be non-negative");
  if (!std::isfinite(eps_k)) throw DomainError("perturbation must be finite");
  SawtoothParams pp = p;
  pp.k += eps_k;
  const Circuit fwd = map_step_circuit(p);
  const Circuit bwd = inverse_circuit(map_step_circuit(pp));
  Circuit out;
  out.n_qubits = p.n_qubits;
  out.ops.reserve(static_cast<size_t>(2 * t) * fwd.ops.size());
  for (int j = 0; j < t; ++j)
    out.ops.insert(out.ops.end(), fwd.ops.begin(), fwd.ops.end());
  for (int j = 0; j < t; ++j)
    out.ops.insert(out.ops.end(), bwd.ops.begin(), bwd.ops.end());
  return out;
}

struct RamseyResult {
  double sigma_z = 0;  // Re <psi0|W|psi0>
  double sigma_y = 0;  // Im <psi0|W|psi0>, sign fixed by the e^{i phi} case
  double f = 0;        // sigma_z^2 + sigma_y^2
  bool has_sampled = false;
  std::uint64_t shots = 0;
  double sampled_sigma_z = 0;
  double sampled_sigma_y = 0;
  double sampled_f = 0;
};

// Interferometric fidelity readout: ancilla Hadamard, controlled-W, ancilla
// Hadamard; the two ancilla polarizations encode the real and imaginary
// parts of <psi0|W|psi0>. The reported sigma_y is the negative of the bare
// Pauli-y expectation so that W = e^{i phi} reads out (cos phi, sin phi).
template <typename R>
RamseyResult fidelity_ramsey(const StateVector<R>& psi0, const Circuit& w,
                             std::optional<std::uint64_t> shots = {},
                             Rng* rng = nullptr) {
  if (w.n_qubits != psi0.n_qubits())
    throw DimensionError("controlled circuit width does not match state");
  const int anc = psi0.n_qubits();
  StateVector<R> s(anc + 1);
  s.amps().segment(0, psi0.dim()) = psi0.amps();
  apply_hadamard(s, anc);
  apply_circuit_controlled(s, w, anc);
  apply_hadamard(s, anc);

  RamseyResult out;
  out.sigma_z = expectation_pauli(s, anc, 'z');
  out.sigma_y = -expectation_pauli(s, anc, 'y');
  out.f = out.sigma_z * out.sigma_z + out.sigma_y * out.sigma_y;

  if (shots) {
    if (rng == nullptr)
      throw DomainError("sampled estimate needs a random stream");
    if (*shots < 1) throw DomainError("shot count must be at least 1");
    out.has_sampled = true;
    out.shots = *shots;
    const Index amask = Index{1} << anc;
    auto polarization = [&](const StateVector<R>& v) {
      auto rec = sample_measurements(v, *shots, *rng);
      std::int64_t diff = 0;
      for (const auto& [bits, c] : rec.counts)
        diff += (bits & std::uint64_t(amask)) ? -std::int64_t(c)
                                              : std::int64_t(c);
      return double(diff) / double(*shots);
    };
    out.sampled_sigma_z = polarization(s);
    // Rotate sigma_y onto sigma_z: apply S^dag then H on the ancilla.
    StateVector<R> ry = s;
    apply_phase_shift(ry, anc, -kPi / 2.0);
    apply_hadamard(ry, anc);
    out.sampled_sigma_y = -polarization(ry);
    out.sampled_f = out.sampled_sigma_z * out.sampled_sigma_z +
                    out.sampled_sigma_y * out.sampled_sigma_y;
  }
  return out;
}

}  // namespace qdyn
