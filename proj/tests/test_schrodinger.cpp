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
#include "qdyn/schrodinger.hpp"

using oracle::Cplx;
using qdyn::EvolutionSettings;
using qdyn::Index;
using qdyn::SpatialGrid;

namespace {

// Position-basis Hamiltonian H0 + diag(V) built densely: H0 through the
// direct summation transform and the exact momentum parabola.
oracle::Mat dense_hamiltonian(const SpatialGrid& g, const EvolutionSettings& es,
                              double t) {
  const Index N = g.points();
  oracle::Mat f = oracle::dft_matrix(g.n_qubits, -1.0);
  oracle::Vec kin(N);
  const qdyn::SignedActionMap sam{g.n_qubits};
  for (Index l = 0; l < N; ++l) {
    const double k = qdyn::kPi * double(sam.to_signed(l)) / g.d;
    kin[l] = es.hbar * es.hbar * k * k / (2.0 * es.mass);
  }
  oracle::Mat h = f.adjoint() * kin.asDiagonal() * f;
  if (es.potential)
    for (Index i = 0; i < N; ++i) h(i, i) += es.potential(g.x(i), t);
  return h;
}

double slope_of_loglog(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  const size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace

TEST_CASE("discretization of constant, point, and gaussian profiles") {
  SpatialGrid g{10.0, 4};
  auto flat = qdyn::discretize([](double) { return Cplx(2.5, 0.0); }, g);
  for (Index i = 0; i < 16; ++i)
    CHECK(std::abs(flat.state[i] - 0.25) < 1e-14);
  CHECK(flat.norm_factor == doctest::Approx(10.0));  // 2.5 * sqrt(16)

  const double xs = g.x(5);
  auto point = qdyn::discretize(
      [xs](double x) { return Cplx(x == xs ? 3.0 : 0.0, 0.0); }, g);
  CHECK(std::abs(point.state[5] - 1.0) < 1e-14);

  SpatialGrid g8{10.0, 8};
  auto gauss = qdyn::discretize(
      [](double x) { return Cplx(std::exp(-x * x / 2.0), 0.0); }, g8);
  CHECK(std::abs(gauss.state.amps().norm() - 1.0) < 1e-12);
  // Amplitudes proportional to the raw samples.
  const double ratio = std::exp(-g8.x(128) * g8.x(128) / 2.0) /
                       gauss.state[128].real();
  for (Index i = 120; i < 136; ++i)
    CHECK(std::exp(-g8.x(i) * g8.x(i) / 2.0) /
              gauss.state[i].real() ==
          doctest::Approx(ratio).epsilon(1e-10));

  CHECK_THROWS_AS(qdyn::discretize([](double) { return Cplx(0.0); }, g),
                  qdyn::DomainError);
  CHECK_THROWS_AS(qdyn::discretize(
                      [](double) { return Cplx(std::nan(""), 0.0); }, g),
                  qdyn::DomainError);
}

TEST_CASE("zero time step leaves the state untouched") {
  qdyn::Rng rng(41);
  SpatialGrid g{5.0, 5};
  auto v = oracle::random_state_vec(5, rng);
  auto s = oracle::to_state(5, v);
  EvolutionSettings es;
  es.epsilon = 0.0;
  es.potential = [](double x, double) { return x * x; };
  qdyn::kinetic_phase_step(s, g, es);
  qdyn::potential_phase_step(s, g, es, 0.0);
  CHECK(oracle::max_abs_diff(s.amps(), v) < 1e-12);
}

TEST_CASE("plane waves acquire the closed-form kinetic phase") {
  const SpatialGrid g{5.0, 6};
  const Index N = g.points();
  for (double hbar : {1.0, 0.7}) {
    EvolutionSettings es;
    es.epsilon = 0.3;
    es.mass = 1.3;
    es.hbar = hbar;
    for (long long m : {0LL, 3LL, -7LL}) {
      const double k = qdyn::kPi * double(m) / g.d;
      qdyn::StateVectorD s(g.n_qubits);
      for (Index i = 0; i < N; ++i)
        s[i] = std::polar(1.0 / std::sqrt(double(N)), k * g.x(i));
      auto before = s.amps();
      qdyn::kinetic_phase_step(s, g, es);
      const Cplx phase =
          std::polar(1.0, -es.hbar * k * k / (2.0 * es.mass) * es.epsilon);
      CHECK(oracle::max_abs_diff(s.amps(), (phase * before).eval()) < 1e-12);
    }
  }
}

TEST_CASE("kinetic step matches the dense propagator") {
  qdyn::Rng rng(42);
  for (int n = 2; n <= 8; n += 2) {
    SpatialGrid g{4.0, n};
    EvolutionSettings es;
    es.epsilon = 0.05;
    es.mass = 0.9;
    auto v = oracle::random_state_vec(n, rng);
    auto s = oracle::to_state(n, v);
    qdyn::kinetic_phase_step(s, g, es);
    oracle::Mat prop = oracle::hermitian_propagator(
        dense_hamiltonian(g, es, 0.0), es.epsilon / es.hbar);
    CHECK(oracle::max_abs_diff(s.amps(), (prop * v).eval()) < 1e-10);
  }
}

TEST_CASE("potential step quantization error respects the level bound") {
  qdyn::Rng rng(43);
  SpatialGrid g{10.0, 6};
  EvolutionSettings es;
  es.epsilon = 0.1;
  es.potential = [](double x, double) { return x * x / 2.0; };

  auto v = oracle::random_state_vec(6, rng);
  for (int bits : {16, 24}) {
    es.ancilla_bits = bits;
    auto s = oracle::to_state(6, v);
    qdyn::potential_phase_step(s, g, es, 0.0);

    const auto table = qdyn::build_potential_table(g, es, 0.0);
    double worst = 0;
    for (Index i = 0; i < g.points(); ++i) {
      // Exact diagonal with the same dropped offset.
      const double exact =
          -(es.potential(g.x(i), 0.0) - table.offset) * es.epsilon;
      const Cplx want = std::polar(1.0, exact) * v[i];
      worst = std::max(worst, std::abs(s[i] - want));
    }
    // Half a quantization level is the worst per-point phase error.
    CHECK(worst <= 0.5 * table.quantization_step + 1e-15);
    if (bits == 24) CHECK(worst < 1e-6);
  }

  EvolutionSettings zero = es;
  zero.potential = nullptr;
  auto s = oracle::to_state(6, v);
  qdyn::potential_phase_step(s, g, zero, 0.0);
  CHECK(oracle::max_abs_diff(s.amps(), v) == 0.0);

  EvolutionSettings bad = es;
  bad.potential = [](double x, double) { return x > 9.0 ? std::nan("") : 0.0; };
  CHECK_THROWS_AS(qdyn::potential_phase_step(s, g, bad, 0.0),
                  qdyn::DomainError);
}

TEST_CASE("literal ancilla circuit realizes the potential step") {
  qdyn::Rng rng(44);
  SpatialGrid g{3.0, 4};
  EvolutionSettings es;
  es.epsilon = 0.2;
  es.ancilla_bits = 6;
  es.potential = [](double x, double) { return std::sin(x) + x * x / 4.0; };

  auto v = oracle::random_state_vec(4, rng);
  auto direct = oracle::to_state(4, v);
  qdyn::potential_phase_step(direct, g, es, 0.0);

  qdyn::Circuit circ = qdyn::build_potential_phase_circuit(g, es, 0.0);
  qdyn::StateVectorD wide(4 + 6);
  wide.amps().segment(0, 16) = v;
  qdyn::apply_circuit(wide, circ);
  CHECK(qdyn::ancilla_leakage(wide, {4, 6}) < 1e-12);
  for (Index i = 0; i < 16; ++i)
    CHECK(std::abs(wide[i] - direct[i]) < 1e-12);

  const auto table = qdyn::build_potential_table(g, es, 0.0);
  CHECK(std::int64_t(circ.ops.size()) ==
        qdyn::potential_gate_count(table, es.ancilla_bits));
}

TEST_CASE("single split step error scales as the square of the time step") {
  qdyn::Rng rng(45);
  const int n = 5;
  SpatialGrid g{6.0, n};
  EvolutionSettings es;
  es.mass = 1.0;
  es.ancilla_bits = 30;
  es.potential = [](double x, double) { return x * x / 2.0; };

  auto v = oracle::random_state_vec(n, rng);
  std::vector<double> eps_list, err_list;
  for (int j = 0; j < 6; ++j) {
    es.epsilon = 0.1 / double(1 << j);
    auto s = oracle::to_state(n, v);
    qdyn::potential_phase_step(s, g, es, 0.0);
    qdyn::kinetic_phase_step(s, g, es);
    oracle::Mat prop = oracle::hermitian_propagator(
        dense_hamiltonian(g, es, 0.0), es.epsilon);
    const double err = (s.amps() - prop * v).norm();
    eps_list.push_back(es.epsilon);
    err_list.push_back(err);
  }
  const double slope = slope_of_loglog(eps_list, err_list);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("global error scales linearly with the time step") {
  const int n = 5;
  SpatialGrid g{6.0, n};
  EvolutionSettings base;
  base.ancilla_bits = 30;
  base.potential = [](double x, double) { return x * x / 2.0; };

  auto psi0 = qdyn::discretize(
      [](double x) { return Cplx(std::exp(-(x - 1.0) * (x - 1.0) / 2.0), 0.0); },
      g);

  const double total = 1.0;
  std::vector<double> eps_list, err_list;
  for (int l : {8, 16, 32, 64}) {
    EvolutionSettings coarse = base;
    coarse.steps = l;
    coarse.epsilon = total / double(l);
    EvolutionSettings fine = base;
    fine.steps = l * 16;
    fine.epsilon = total / double(l * 16);
    auto a = qdyn::trotter_evolve(psi0, coarse);
    auto b = qdyn::trotter_evolve(psi0, fine);
    eps_list.push_back(coarse.epsilon);
    err_list.push_back((a.wf.state.amps() - b.wf.state.amps()).norm());
  }
  const double slope = slope_of_loglog(eps_list, err_list);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("free gaussian packet spreads at the analytic rate") {
  SpatialGrid g{20.0, 8};
  const double sigma = 1.0;
  auto psi0 = qdyn::discretize(
      [sigma](double x) {
        return Cplx(std::exp(-x * x / (2.0 * sigma * sigma)), 0.0);
      },
      g);
  EvolutionSettings es;
  es.epsilon = 0.5;  // kinetic-only evolution is a single exponential: exact
  es.steps = 4;
  auto out = qdyn::trotter_evolve(psi0, es);
  const double t = es.epsilon * es.steps;
  auto [mean, var] = qdyn::position_moments(out.wf.state, g);
  const double width = std::sqrt(2.0 * var);  // e^{-x^2/s^2} width parameter
  const double want = sigma * std::sqrt(1.0 + t * t / (sigma * sigma * sigma * sigma));
  CHECK(std::abs(mean) < 1e-9);
  CHECK(width == doctest::Approx(want).epsilon(0.01));
  CHECK(out.kinetic_gates == 4 * qdyn::kinetic_gate_count(8));
  CHECK(out.potential_gates == 0);
}

TEST_CASE("harmonic coherent state returns after one period") {
  SpatialGrid g{10.0, 8};
  auto psi0 = qdyn::discretize(
      [](double x) {
        return Cplx(std::exp(-(x - 2.0) * (x - 2.0) / 2.0), 0.0);
      },
      g);
  EvolutionSettings es;
  es.epsilon = qdyn::kTwoPi / 512.0;
  es.steps = 512;
  es.ancilla_bits = 20;
  es.potential = [](double x, double) { return x * x / 2.0; };
  auto out = qdyn::trotter_evolve(psi0, es);
  const double f =
      std::norm(qdyn::overlap(psi0.state, out.wf.state));
  CHECK(f > 0.99);
  CHECK(out.potential_gates > 0);
}

TEST_CASE("norm is preserved over a thousand steps") {
  SpatialGrid g{8.0, 6};
  auto psi0 = qdyn::discretize(
      [](double x) { return Cplx(std::exp(-x * x / 4.0), 0.0); }, g);
  EvolutionSettings es;
  es.epsilon = 0.01;
  es.steps = 1000;
  es.potential = [](double x, double t) { return x * x / 2.0 + 0.1 * t * x; };
  auto out = qdyn::trotter_evolve(psi0, es);
  CHECK(qdyn::norm_error(out.wf.state) < 1e-10);
}

TEST_CASE("momentum mass sits inside the resolvable band") {
  SpatialGrid g{10.0, 8};
  auto psi0 = qdyn::discretize(
      [](double x) { return Cplx(std::exp(-x * x / 2.0), 0.0); }, g);
  CHECK(qdyn::momentum_band_mass(psi0.state, 0.5) > 1.0 - 1e-6);
  CHECK(qdyn::momentum_band_mass(psi0.state, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(qdyn::momentum_band_mass(psi0.state, 0.0),
                  qdyn::DomainError);

  // A packet riding at half the band edge leaves the inner quarter band.
  const double k_edge = qdyn::kPi * double(g.points() / 2) / g.d;
  auto moving = qdyn::discretize(
      [k_edge](double x) {
        return std::polar(std::exp(-x * x / 2.0), 0.5 * k_edge * x);
      },
      g);
  CHECK(qdyn::momentum_band_mass(moving.state, 0.25) < 1e-6);
}

TEST_CASE("settings validation") {
  EvolutionSettings es;
  es.epsilon = -1.0;
  CHECK_THROWS_AS(qdyn::validate(es), qdyn::DomainError);
  es.epsilon = 0.1;
  es.mass = 0.0;
  CHECK_THROWS_AS(qdyn::validate(es), qdyn::DomainError);
  es.mass = 1.0;
  es.ancilla_bits = 0;
  CHECK_THROWS_AS(qdyn::validate(es), qdyn::DomainError);
  es.ancilla_bits = 53;
  CHECK_THROWS_AS(qdyn::validate(es), qdyn::CapacityError);
  es.ancilla_bits = 16;
  CHECK_NOTHROW(qdyn::validate(es));

  CHECK_THROWS_AS(qdyn::validate(SpatialGrid{0.0, 4}), qdyn::DomainError);
  CHECK_THROWS_AS(qdyn::validate(SpatialGrid{-2.0, 4}), qdyn::DomainError);
}
