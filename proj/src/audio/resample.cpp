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
#include <cstdint>
#include <numeric>
#include <numbers>
#include <vector>

#include "vocalhf/audio.hpp"
#include "vocalhf/error.hpp"

namespace vocalhf::audio {
namespace {

// Kernel spans this many zero crossings of the (possibly narrowed) sinc on
// each side. Kaiser beta 8.6 gives roughly 80 dB stopband.
constexpr double kZeroCrossings = 16.0;
constexpr double kKaiserBeta = 8.6;
constexpr double kPassband = 0.95;

constexpr std::size_t kWindowTable = 4096;
// Largest phase count served from precomputed tap tables.
constexpr std::int64_t kMaxPhases = 4096;

double kaiser_exact(double t) {  // t in [-1, 1]
  const double arg = 1.0 - t * t;
  if (arg <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(arg)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

// Tabulated over |t| with linear interpolation.
double kaiser(double t) {
  static const std::vector<double> table = [] {
    std::vector<double> v(kWindowTable + 1);
    for (std::size_t i = 0; i <= kWindowTable; ++i) {
      v[i] = kaiser_exact(static_cast<double>(i) / kWindowTable);
    }
    return v;
  }();
  const double pos = std::abs(t) * kWindowTable;
  if (pos >= kWindowTable) return 0.0;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

AudioSegment resample(const AudioSegment& seg, int target_rate) {
  if (target_rate <= 0) fail(Errc::InvalidRate, "target rate must be positive");
  if (seg.sample_rate <= 0) fail(Errc::InvalidRate, "source rate must be positive");
  if (target_rate == seg.sample_rate) return seg;

  const double ratio = static_cast<double>(target_rate) / seg.sample_rate;
  // Cutoff in cycles per input sample.
  const double cutoff = 0.5 * std::min(1.0, ratio) * kPassband;
  const double half_width = kZeroCrossings / (2.0 * cutoff);  // input samples

  const auto n_in = static_cast<std::ptrdiff_t>(seg.samples.size());
  const auto n_out = static_cast<std::size_t>(std::llround(seg.samples.size() * ratio));

  AudioSegment out;
  out.sample_rate = target_rate;
  out.section = seg.section;
  out.samples.resize(n_out);

  // Rates in the ratio up/down share `up` distinct kernel phases.
  const int g = std::gcd(target_rate, seg.sample_rate);
  const auto up = static_cast<std::int64_t>(target_rate / g);
  const auto down = static_cast<std::int64_t>(seg.sample_rate / g);
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(half_width)) + 1;
  const auto width = static_cast<std::size_t>(2 * reach + 1);
  const auto tap = [&](double d) {
    return std::abs(d) > half_width ? 0.0 : 2.0 * cutoff * sinc(2.0 * cutoff * d) * kaiser(d / half_width);
  };
  if (up <= kMaxPhases) {
    // taps[p][j] weights input base - reach + j for phase p.
    std::vector<double> taps(static_cast<std::size_t>(up) * width);
    for (std::int64_t p = 0; p < up; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(up);
      for (std::size_t j = 0; j < width; ++j) {
        taps[static_cast<std::size_t>(p) * width + j] = tap(frac + static_cast<double>(reach) - static_cast<double>(j));
      }
    }
    for (std::size_t m = 0; m < n_out; ++m) {
      const auto num = static_cast<std::int64_t>(m) * down;
      const auto base = static_cast<std::ptrdiff_t>(num / up);
      const double* w = &taps[static_cast<std::size_t>(num % up) * width];
      const auto first = base - reach;
      const auto lo = std::max<std::ptrdiff_t>(0, first);
      const auto hi = std::min<std::ptrdiff_t>(n_in - 1, base + reach);
      double acc = 0.0;
      for (std::ptrdiff_t n = lo; n <= hi; ++n) {
        acc += seg.samples[static_cast<std::size_t>(n)] * w[n - first];
      }
      out.samples[m] = std::clamp(acc, -1.0, 1.0);
    }
    return out;
  }

  for (std::size_t m = 0; m < n_out; ++m) {
    const double center = static_cast<double>(m) / ratio;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(center - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t n = lo; n <= hi; ++n) {
      acc += seg.samples[static_cast<std::size_t>(n)] * tap(center - static_cast<double>(n));
    }
    out.samples[m] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

}  // namespace vocalhf::audio
