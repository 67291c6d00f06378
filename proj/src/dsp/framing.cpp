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

#include <cmath>
#include <numbers>
#include <numeric>

#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/simd.hpp"

namespace vocalhf::dsp {

FrameGeometry FrameGeometry::from_seconds(double frame_len_s, double hop_s, int rate) {
  if (!(hop_s > 0.0) || frame_len_s < hop_s || rate <= 0) {
    fail(Errc::InvalidConfig, "framing requires frame_len >= hop > 0 and a positive rate");
  }
  FrameGeometry g;
  g.length = static_cast<std::size_t>(std::llround(frame_len_s * rate));
  g.hop = static_cast<std::size_t>(std::llround(hop_s * rate));
  if (g.hop == 0 || g.length == 0) fail(Errc::InvalidConfig, "frame shorter than one sample");
  return g;
}

std::size_t FrameGeometry::count(std::size_t n) const {
  if (n < length) return 0;
  return (n - length) / hop + 1;
}

std::vector<std::span<const double>> frame_signal(std::span<const double> samples,
                                                  FrameGeometry geometry) {
  std::vector<std::span<const double>> frames;
  const std::size_t n = geometry.count(samples.size());
  frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    frames.push_back(samples.subspan(k * geometry.hop, geometry.length));
  }
  return frames;
}

std::vector<std::span<const double>> frame_signal(const audio::AudioSegment& seg,
                                                  double frame_len_s, double hop_s) {
  return frame_signal(seg.samples, FrameGeometry::from_seconds(frame_len_s, hop_s, seg.sample_rate));
}

double short_time_log_energy(std::span<const double> frame) {
  if (frame.empty()) fail(Errc::EmptyInput, "energy of an empty frame");
  const double ms = simd::sum_squares(frame) / static_cast<double>(frame.size());
  return 10.0 * std::log10(ms + 1e-10);
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n - 1));
  }
  return w;
}

std::vector<double> apply_hann(std::span<const double> x, bool remove_mean) {
  const auto w = hann_window(x.size());
  double mean = 0.0;
  if (remove_mean && !x.empty()) {
    mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * w[i];
  return out;
}

}  // namespace vocalhf::dsp
