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
#include <array>
#include <cmath>
#include <numbers>

#include "vocalhf/features.hpp"
#include "vocalhf/simd.hpp"

namespace vocalhf::features {
namespace {

// F0 of the voiced frame nearest to time t inside [first, last].
double local_f0(const dsp::F0Contour& f0, std::size_t first, std::size_t last, double t) {
  const double pos = (t - 0.5 * f0.frame_len_s) / f0.hop_s;
  const auto k = static_cast<std::size_t>(
      std::clamp(std::llround(pos), static_cast<long long>(first), static_cast<long long>(last)));
  return f0.f0_hz[k];
}

std::size_t argmin_in(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo; i < hi; ++i) {
    if (x[i] < x[best]) best = i;
  }
  return best;
}

double refine_min(std::span<const double> x, std::size_t i) {
  if (i == 0 || i + 1 >= x.size()) return static_cast<double>(i);
  return static_cast<double>(i) + dsp::parabolic_peak(-x[i - 1], -x[i], -x[i + 1]);
}

// Band-limited value of x at fractional position t (Hann-windowed sinc).
double sinc_at(std::span<const double> x, double t) {
  constexpr int kHalf = 8;
  const auto c = static_cast<long long>(std::floor(t));
  double acc = 0.0;
  for (long long j = c - kHalf + 1; j <= c + kHalf; ++j) {
    if (j < 0 || j >= static_cast<long long>(x.size())) continue;
    const double d = t - static_cast<double>(j);
    const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * d / kHalf);
    const double s = d == 0.0 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
    acc += x[j] * s * w;
  }
  return acc;
}

// Peak of |x| near sample i, searched on a 1/32-sample grid of the
// band-limited reconstruction.
double refined_peak(std::span<const double> x, std::size_t i) {
  const double sgn = x[i] >= 0.0 ? 1.0 : -1.0;
  constexpr int kSteps = 32;
  double best = sgn * x[i];
  int at = 0;
  std::vector<double> grid(2 * kSteps + 1);
  for (int s = -kSteps; s <= kSteps; ++s) {
    grid[s + kSteps] = sgn * sinc_at(x, static_cast<double>(i) + static_cast<double>(s) / kSteps);
    if (grid[s + kSteps] > best) {
      best = grid[s + kSteps];
      at = s;
    }
  }
  if (at > -kSteps && at < kSteps) {
    dsp::parabolic_peak(grid[at + kSteps - 1], grid[at + kSteps], grid[at + kSteps + 1], &best);
  }
  return best;
}

// Lag near `guess` samples that best aligns the cycle starting at `mark`
// with the next one, by normalized cross-correlation.
double aligned_period(std::span<const double> x, double mark, double guess) {
  const auto len = static_cast<long long>(std::llround(guess));
  const auto start = static_cast<long long>(std::llround(mark - 0.25 * guess));
  const auto center = static_cast<long long>(std::llround(guess));
  constexpr long long kReach = 3;
  if (start < 0 || start + len + center + kReach + 1 > static_cast<long long>(x.size()) || center <= kReach) {
    return guess;
  }
  std::array<double, 2 * kReach + 1> r{};
  const auto head = x.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len));
  const double e0 = simd::sum_squares(head);
  for (long long d = -kReach; d <= kReach; ++d) {
    const auto tail = x.subspan(static_cast<std::size_t>(start + center + d), static_cast<std::size_t>(len));
    const double denom = std::sqrt(e0 * simd::sum_squares(tail));
    r[d + kReach] = denom > 0.0 ? simd::dot(head, tail) / denom : 0.0;
  }
  const auto best = static_cast<long long>(std::max_element(r.begin(), r.end()) - r.begin());
  if (best == 0 || best == 2 * kReach) return guess;
  const double frac = dsp::parabolic_peak(r[best - 1], r[best], r[best + 1]);
  return static_cast<double>(center + best - kReach) + frac;
}

}  // namespace

std::vector<double> lp_residual(const audio::AudioSegment& seg, double frame_s, double hop_s) {
  const std::span<const double> x = seg.samples;
  const int order = seg.sample_rate / 1000 + 2;
  const auto geom = dsp::FrameGeometry::from_seconds(frame_s, hop_s, seg.sample_rate);
  std::vector<double> residual(x.size(), 0.0);
  if (x.size() <= static_cast<std::size_t>(order)) return residual;

  std::vector<double> coeffs(1, 1.0);
  const std::size_t n_frames = std::max<std::size_t>(1, geom.count(x.size()));
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t start = std::min(k * geom.hop, x.size() - std::min(x.size(), geom.length));
    const auto frame = x.subspan(start, std::min(geom.length, x.size() - start));
    if (frame.size() > static_cast<std::size_t>(order)) {
      const auto windowed = dsp::apply_hann(frame);
      double energy = 0.0;
      for (double v : windowed) energy += v * v;
      if (energy > 1e-12 * static_cast<double>(windowed.size())) {
        coeffs = dsp::lpc(windowed, order).coeffs;
      }
    }
    // Samples nearest to this frame's centre.
    const std::size_t center = start + geom.length / 2;
    const std::size_t lo = k == 0 ? 0 : center - geom.hop / 2;
    const std::size_t hi = k + 1 == n_frames ? x.size() : std::min(x.size(), center + (geom.hop + 1) / 2);
    for (std::size_t n = lo; n < hi; ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j < coeffs.size() && j <= n; ++j) acc += coeffs[j] * x[n - j];
      residual[n] = acc;
    }
  }
  return residual;
}

std::vector<std::vector<double>> excitation_marks(std::span<const double> residual, int rate_hz,
                                                  const dsp::F0Contour& f0) {
  std::vector<std::vector<double>> runs;
  const double rate = rate_hz;
  const auto frame_len = static_cast<std::size_t>(std::llround(f0.frame_len_s * rate));

  std::size_t k = 0;
  while (k < f0.size()) {
    if (!f0.voiced(k)) {
      ++k;
      continue;
    }
    std::size_t last = k;
    while (last + 1 < f0.size() && f0.voiced(last + 1)) ++last;

    const auto lo = static_cast<std::size_t>(std::llround(k * f0.hop_s * rate));
    const auto hi = std::min(residual.size(),
                             static_cast<std::size_t>(std::llround(last * f0.hop_s * rate)) + frame_len);
    std::vector<double> marks;
    if (lo < hi) {
      double period = rate / local_f0(f0, k, last, lo / rate);
      std::size_t mark = argmin_in(residual, lo, std::min(hi, lo + static_cast<std::size_t>(std::ceil(period))));
      marks.push_back(refine_min(residual, mark) / rate);
      for (;;) {
        period = rate / local_f0(f0, k, last, mark / rate);
        const auto a = mark + static_cast<std::size_t>(std::ceil(0.7 * period));
        const auto b = mark + static_cast<std::size_t>(std::floor(1.3 * period)) + 1;
        if (b > hi) break;
        mark = argmin_in(residual, a, b);
        marks.push_back(refine_min(residual, mark) / rate);
      }
    }
    if (marks.size() >= 2) runs.push_back(std::move(marks));
    k = last + 1;
  }
  return runs;
}

std::vector<CycleRun> detect_cycles(const audio::AudioSegment& seg, const dsp::F0Contour& f0) {
  const auto residual = lp_residual(seg);
  const std::span<const double> x = seg.samples;
  const double rate = seg.sample_rate;

  std::vector<CycleRun> runs;
  for (auto& marks : excitation_marks(residual, seg.sample_rate, f0)) {
    CycleRun run;
    run.marks_s = std::move(marks);
    for (std::size_t i = 0; i + 1 < run.marks_s.size(); ++i) {
      const double gap = (run.marks_s[i + 1] - run.marks_s[i]) * rate;
      run.periods_s.push_back(aligned_period(x, run.marks_s[i] * rate, gap) / rate);
      // Peak window of one period centred on the mark.
      const auto a = static_cast<std::size_t>(std::max(0.0, std::round(run.marks_s[i] * rate - 0.5 * gap)));
      const auto b = std::min(x.size(), static_cast<std::size_t>(std::llround(run.marks_s[i] * rate + 0.5 * gap)));
      std::size_t best = a;
      for (std::size_t j = a; j < b; ++j) {
        if (std::abs(x[j]) > std::abs(x[best])) best = j;
      }
      run.amplitudes.push_back(a < b ? refined_peak(x, best) : 0.0);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace vocalhf::features
