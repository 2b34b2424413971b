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

#include "qdyn/statevector.hpp"

namespace qdyn {

// FFT-backed unitary transforms between the computational (action/momentum)
// register and angle/position samples. These are the reference route: gate
// evolution never calls them, which keeps the two paths independent when one
// is checked against the other.
//
// Conventions, with N = 2^n and unitary normalization:
//   to_angle:   c_g = (1/sqrt(N)) sum_m exp(+2*pi*i*m*g/N) psi_m
//   to_action:  psi_m = (1/sqrt(N)) sum_g exp(-2*pi*i*m*g/N) c_g
// The label m is read modulo N, so the signed-action convention needs no
// special handling here.
template <typename R>
void to_angle_representation(StateVector<R>& s) {
  Eigen::FFT<R> fft;
  typename StateVector<R>::Amplitudes out(s.dim());
  fft.inv(out, s.amps());  // scaled by 1/N
  s.amps() = out * std::sqrt(static_cast<R>(s.dim()));
}

template <typename R>
void to_action_representation(StateVector<R>& s) {
  Eigen::FFT<R> fft;
  typename StateVector<R>::Amplitudes out(s.dim());
  fft.fwd(out, s.amps());  // unscaled
  s.amps() = out / std::sqrt(static_cast<R>(s.dim()));
}

}  // namespace qdyn
