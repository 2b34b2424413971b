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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qdyn {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Amplitude index. Signed so that wrap-around arithmetic on action labels
// stays in one integer domain.
using Index = std::int64_t;

// Largest register the dense simulator will allocate (2^26 amplitudes = 1 GiB
// of complex<double>).
inline constexpr int kMaxQubits = 26;

// Invalid parameter values (probabilities out of range, non-finite phases,
// bad qubit indices).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requests beyond what the implementation will allocate or represent
// (register too wide, function value overflowing the ancilla width).
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

// Operands that exist but do not fit together (state width vs circuit width,
// mismatched vector lengths).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime numerical failures (norm drift beyond tolerance, non-convergent
// decomposition).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Index dim_of(int n_qubits) { return Index{1} << n_qubits; }

inline void check_qubit_count(int n_qubits) {
  if (n_qubits < 1) throw DomainError("qubit count must be at least 1");
  if (n_qubits > kMaxQubits)
    throw CapacityError("qubit count " + std::to_string(n_qubits) +
                        " exceeds the implementation cap " +
                        std::to_string(kMaxQubits));
}

inline void check_qubit_index(int q, int n_qubits) {
  if (q < 0 || q >= n_qubits)
    throw DomainError("qubit index " + std::to_string(q) +
                      " out of range for " + std::to_string(n_qubits) +
                      " qubits");
}

inline int bit_of(Index i, int q) { return static_cast<int>((i >> q) & 1); }

// Worker cap shared by the embarrassingly parallel loops (classical
// ensembles, noise trajectories). 0 means "use the hardware count".
inline int& max_threads_slot() {
  static int slot = 0;
  return slot;
}
inline void set_max_threads(int t) { max_threads_slot() = t; }
inline int effective_threads() {
  int cap = max_threads_slot();
  unsigned hw = std::thread::hardware_concurrency();
  int n = cap > 0 ? cap : static_cast<int>(hw ? hw : 1);
  return n < 1 ? 1 : n;
}

// Runs fn(begin, end) over fixed-size chunks of [0, total). Chunk boundaries
// depend only on chunk_size, never on the worker count, so per-chunk results
// aggregated in chunk order are bit-stable across thread settings.
inline void parallel_chunks(std::int64_t total, std::int64_t chunk_size,
                            const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (total <= 0) return;
  if (chunk_size < 1) throw DomainError("chunk size must be positive");
  const std::int64_t n_chunks = (total + chunk_size - 1) / chunk_size;
  int workers = effective_threads();
  if (workers == 1 || n_chunks == 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      const std::int64_t b = c * chunk_size;
      fn(b, std::min(total, b + chunk_size));
    }
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::int64_t c = w; c < n_chunks; c += workers) {
          const std::int64_t b = c * chunk_size;
          fn(b, std::min(total, b + chunk_size));
        }
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qdyn
