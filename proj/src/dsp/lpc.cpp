// Copyright 2026 The vocalhf Authors
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

#include <algorithm>
#include <cmath>

#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/simd.hpp"

namespace vocalhf::dsp {

LpcResult lpc(std::span<const double> frame, int order) {
  if (order < 1) fail(Errc::InvalidConfig, "lpc order must be >= 1");
  const auto p = static_cast<std::size_t>(order);
  if (frame.size() <= p) fail(Errc::DegenerateFrame, "frame not longer than lpc order");

  std::vector<double> r(p + 1);
  simd::autocorrelation(frame, r);
  if (!(r[0] > 0.0)) fail(Errc::DegenerateFrame, "zero-energy frame");
  // -80 dB white-noise floor keeps the recursion well conditioned on
  // band-limited input.
  r[0] *= 1.0 + 1e-8;

  constexpr double kMaxReflection = 1.0 - 1e-6;
  LpcResult res;
  res.frame_energy = r[0];
  res.coeffs.assign(p + 1, 0.0);
  res.coeffs[0] = 1.0;
  res.reflection.assign(p, 0.0);

  std::vector<double> prev(p + 1);
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += res.coeffs[j] * r[i - j];
    double k = err > 0.0 ? -acc / err : 0.0;
    k = std::clamp(k, -kMaxReflection, kMaxReflection);
    res.reflection[i - 1] = k;

    prev = res.coeffs;
    for (std::size_t j = 1; j < i; ++j) res.coeffs[j] = prev[j] + k * prev[i - j];
    res.coeffs[i] = k;
    err *= (1.0 - k * k);
  }
  res.residual_energy = err;
  return res;
}

std::vector<double> inverse_filter(std::span<const double> coeffs, std::span<const double> x) {
  std::vector<double> out(x.size());
  simd::fir_filter(coeffs, x, out);
  return out;
}

}  // namespace vocalhf::dsp
