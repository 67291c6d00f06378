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
#include <numbers>

#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/simd.hpp"

namespace vocalhf::dsp {

std::size_t F0Contour::voiced_count() const {
  return static_cast<std::size_t>(
      std::count_if(f0_hz.begin(), f0_hz.end(), [](double f) { return f > 0.0; }));
}

std::vector<double> lowpass(std::span<const double> x, double cutoff_hz, int rate) {
  std::vector<double> y(x.begin(), x.end());
  if (!(cutoff_hz > 0.0) || cutoff_hz >= rate / 2.0) return y;
  // RBJ cookbook low-pass, Q = 1/sqrt(2).
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate;
  const double alpha = std::sin(w0) / std::sqrt(2.0);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 - cw) / 2.0 / a0, b1 = (1.0 - cw) / a0, b2 = b0;
  const double a1 = -2.0 * cw / a0, a2 = (1.0 - alpha) / a0;
  for (int pass = 0; pass < 2; ++pass) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : y) {
      const double out = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = out;
      v = out;
    }
  }
  return y;
}

namespace {

// Isolated halvings or doublings against the median of nearby voiced frames
// are folded back by one octave.
void fix_octave_jumps(std::vector<double>& f0, const PitchConfig& cfg) {
  constexpr std::size_t kReach = 2;
  const std::vector<double> raw = f0;
  std::vector<double> near;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!(raw[k] > 0.0)) continue;
    near.clear();
    for (std::size_t j = k >= kReach ? k - kReach : 0; j <= std::min(raw.size() - 1, k + kReach); ++j) {
      if (j != k && raw[j] > 0.0) near.push_back(raw[j]);
    }
    if (near.size() < 2) continue;
    std::sort(near.begin(), near.end());
    const double median = near.size() % 2 == 1
                              ? near[near.size() / 2]
                              : 0.5 * (near[near.size() / 2 - 1] + near[near.size() / 2]);
    const double ratio = raw[k] / median;
    if (ratio > 0.42 && ratio < 0.58 && 2.0 * raw[k] <= cfg.f0_max) f0[k] = 2.0 * raw[k];
    if (ratio > 1.7 && ratio < 2.4 && 0.5 * raw[k] >= cfg.f0_min) f0[k] = 0.5 * raw[k];
  }
}

}  // namespace

F0Contour estimate_f0(const audio::AudioSegment& seg, const PitchConfig& cfg) {
  const double rate = seg.sample_rate;
  if (!(cfg.f0_min > 0.0) || !(cfg.f0_min < cfg.f0_max) || !(cfg.f0_max < rate / 2.0)) {
    fail(Errc::InvalidBand, "f0 band must satisfy 0 < f0_min < f0_max < rate/2");
  }
  const auto geom = FrameGeometry::from_seconds(cfg.frame_len_s, cfg.hop_s, seg.sample_rate);
  const auto lag_min = static_cast<std::size_t>(std::floor(rate / cfg.f0_max));
  const auto lag_max = std::min(static_cast<std::size_t>(std::ceil(rate / cfg.f0_min)),
                                geom.length - 2);
  if (lag_min < 2 || lag_min + 2 > lag_max) {
    fail(Errc::InvalidBand, "f0 band does not fit in the analysis frame");
  }

  F0Contour contour;
  contour.hop_s = static_cast<double>(geom.hop) / rate;
  contour.frame_len_s = static_cast<double>(geom.length) / rate;
  const auto frames = frame_signal(seg.samples, geom);
  contour.f0_hz.assign(frames.size(), 0.0);
  contour.strength.assign(frames.size(), 0.0);
  contour.energy_db.resize(frames.size());
  if (frames.empty()) return contour;

  for (std::size_t k = 0; k < frames.size(); ++k) {
    contour.energy_db[k] = short_time_log_energy(frames[k]);
  }
  std::vector<double> sorted = contour.energy_db;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median_db = sorted[sorted.size() / 2];
  const double floor_db = std::max(cfg.silence_floor_db, median_db - cfg.relative_floor_db);

  const auto filtered = lowpass(seg.samples, cfg.lowpass_hz, seg.sample_rate);
  const auto filtered_frames = frame_signal(filtered, geom);

  std::vector<double> ac(lag_max + 2);
  std::vector<double> nacf(lag_max + 2);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (contour.energy_db[k] < floor_db) continue;
    const auto x = apply_hann(filtered_frames[k], true);
    simd::autocorrelation(x, ac);
    if (!(ac[0] > 0.0)) continue;
    // Energy-normalized cross-correlation between the leading and trailing
    // parts of the windowed frame that overlap at each lag.
    std::vector<double> head(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) head[i + 1] = head[i] + x[i] * x[i];
    const double total = head[x.size()];
    for (std::size_t lag = 0; lag < ac.size(); ++lag) {
      const double e_lead = head[x.size() - lag];
      const double e_trail = total - head[lag];
      const double denom = std::sqrt(e_lead * e_trail);
      nacf[lag] = denom > 0.0 ? ac[lag] / denom : 0.0;
    }

    struct Peak {
      double lag, value;
    };
    std::vector<Peak> peaks;
    double strongest = 0.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      if (!(nacf[lag] > nacf[lag - 1] && nacf[lag] >= nacf[lag + 1])) continue;
      double value = 0.0;
      const double offset = parabolic_peak(nacf[lag - 1], nacf[lag], nacf[lag + 1], &value);
      peaks.push_back({static_cast<double>(lag) + offset, value});
      strongest = std::max(strongest, value);
    }
    double best_lag = 0.0;
    double best_value = 0.0;
    for (const auto& p : peaks) {
      if (p.value >= cfg.peak_ratio * strongest) {
        best_lag = p.lag;
        best_value = p.value;
        break;
      }
    }
    if (best_lag <= 0.0) continue;
    contour.strength[k] = best_value;
    if (best_value >= cfg.voicing_threshold) {
      contour.f0_hz[k] = std::clamp(rate / best_lag, cfg.f0_min, cfg.f0_max);
    }
  }
  fix_octave_jumps(contour.f0_hz, cfg);
  return contour;
}

F0Contour estimate_f0(const audio::AudioSegment& seg, double f0_min, double f0_max) {
  PitchConfig cfg;
  cfg.f0_min = f0_min;
  cfg.f0_max = f0_max;
  return estimate_f0(seg, cfg);
}

}  // namespace vocalhf::dsp
