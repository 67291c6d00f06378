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
#include <numeric>

#include "vocalhf/error.hpp"
#include "vocalhf/features.hpp"

namespace vocalhf::features {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double local_perturbation(std::span<const double> v, const char* what) {
  if (v.size() < 2) fail(Errc::TooFewCycles, std::string(what) + " needs at least two cycles");
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += std::abs(v[i] - v[i - 1]);
  return acc / static_cast<double>(v.size() - 1) / mean_of(v) * 100.0;
}

double perturbation_quotient(std::span<const double> v, std::size_t k, const char* what) {
  if (k == 0 || k % 2 == 0) fail(Errc::InvalidConfig, "perturbation quotient window must be odd");
  if (v.size() < k) {
    fail(Errc::TooFewCycles, std::string(what) + " needs at least " + std::to_string(k) + " cycles");
  }
  const std::size_t half = k / 2;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(v.size(), i + half + 1);
    acc += std::abs(v[i] - mean_of(v.subspan(lo, hi - lo)));
  }
  return acc / static_cast<double>(v.size()) / mean_of(v) * 100.0;
}

void require_positive(std::span<const double> v, Errc code, const char* what) {
  for (double x : v) {
    if (!(x > 0.0)) fail(code, std::string(what) + " must be strictly positive");
  }
}

// Cycles of `run` whose start lies in [t0, t1), widened around the middle of
// the interval until at least `min_count` are included (or the run is used up).
std::span<const double> frame_cycles(const CycleRun& run, std::span<const double> values,
                                     double t0, double t1, std::size_t min_count) {
  std::size_t lo = 0;
  while (lo < run.size() && run.marks_s[lo] < t0) ++lo;
  std::size_t hi = lo;
  while (hi < run.size() && run.marks_s[hi] < t1) ++hi;
  while (hi - lo < min_count && (lo > 0 || hi < run.size())) {
    const double mid = 0.5 * (t0 + t1);
    const bool can_left = lo > 0;
    const bool can_right = hi < run.size();
    if (can_left && (!can_right || mid - run.marks_s[lo - 1] <= run.marks_s[hi] - mid)) {
      --lo;
    } else {
      ++hi;
    }
  }
  return values.subspan(lo, hi - lo);
}

}  // namespace

std::array<double, 6> summarize(std::span<const double> values) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  std::array<double, 6> out;
  if (finite.empty()) {
    out.fill(kMissing);
    return out;
  }
  const auto f = dsp::functionals(finite);
  out = {f.avg, f.std, f.max, f.min, f.skewness, f.kurtosis};
  return out;
}

double jitter(std::span<const double> periods_s) {
  if (periods_s.size() < 2) fail(Errc::TooFewCycles, "jitter needs at least two cycles");
  require_positive(periods_s, Errc::TooFewCycles, "periods");
  return local_perturbation(periods_s, "jitter");
}

double shimmer(std::span<const double> amplitudes) {
  if (amplitudes.size() < 2) fail(Errc::TooFewCycles, "shimmer needs at least two cycles");
  require_positive(amplitudes, Errc::InvalidAmplitude, "amplitudes");
  return local_perturbation(amplitudes, "shimmer");
}

double apq(std::span<const double> amplitudes, std::size_t k) {
  if (amplitudes.size() >= k) require_positive(amplitudes, Errc::InvalidAmplitude, "amplitudes");
  return perturbation_quotient(amplitudes, k, "apq");
}

double ppq(std::span<const double> periods_s, std::size_t k) {
  if (periods_s.size() >= k) require_positive(periods_s, Errc::TooFewCycles, "periods");
  return perturbation_quotient(periods_s, k, "ppq");
}

const std::vector<std::string>& phonation_descriptors() {
  static const std::vector<std::string> names{"df0", "ddf0", "jitter", "shimmer", "apq", "ppq", "logE"};
  return names;
}

PhonationFrames phonation_frames(const audio::AudioSegment& seg, const PhonationConfig& cfg) {
  const auto contour = dsp::estimate_f0(seg, cfg.pitch);
  const auto runs = detect_cycles(seg, contour);
  const std::size_t k = cfg.quotient_window;

  PhonationFrames out;
  out.rows.assign(phonation_descriptors().size(), {});
  for (std::size_t f = 0; f < contour.size(); ++f) {
    if (!contour.voiced(f)) continue;
    ++out.voiced_frames;
    const double t0 = f * contour.hop_s;
    const double t1 = t0 + contour.frame_len_s;

    const bool prev1 = f >= 1 && contour.voiced(f - 1);
    const bool prev2 = prev1 && f >= 2 && contour.voiced(f - 2);
    const double df0 = prev1 ? contour.f0_hz[f] - contour.f0_hz[f - 1] : kMissing;
    const double ddf0 =
        prev2 ? contour.f0_hz[f] - 2.0 * contour.f0_hz[f - 1] + contour.f0_hz[f - 2] : kMissing;

    double jit = kMissing, shim = kMissing, amp_q = kMissing, per_q = kMissing;
    const CycleRun* run = nullptr;
    for (const auto& r : runs) {
      if (r.marks_s.front() < t1 && r.marks_s.back() > t0) {
        run = &r;
        break;
      }
    }
    if (run != nullptr) {
      const auto periods = frame_cycles(*run, run->periods_s, t0, t1, 2);
      const auto amps = frame_cycles(*run, run->amplitudes, t0, t1, 2);
      if (periods.size() >= 2) {
        jit = jitter(periods);
        if (std::all_of(amps.begin(), amps.end(), [](double a) { return a > 0.0; })) {
          shim = shimmer(amps);
        }
      }
      const auto periods_k = frame_cycles(*run, run->periods_s, t0, t1, k);
      const auto amps_k = frame_cycles(*run, run->amplitudes, t0, t1, k);
      if (periods_k.size() >= k) {
        per_q = ppq(periods_k, k);
        if (std::all_of(amps_k.begin(), amps_k.end(), [](double a) { return a > 0.0; })) {
          amp_q = apq(amps_k, k);
        }
      }
    }

    const double values[] = {df0, ddf0, jit, shim, amp_q, per_q, contour.energy_db[f]};
    for (std::size_t d = 0; d < out.rows.size(); ++d) out.rows[d].push_back(values[d]);
  }
  return out;
}

FeatureMap phonation_features(const audio::AudioSegment& seg, const PhonationConfig& cfg) {
  const auto frames = phonation_frames(seg, cfg);
  FeatureMap out;
  const auto& names = phonation_descriptors();
  for (std::size_t d = 0; d < names.size(); ++d) {
    const auto vals = summarize(frames.rows[d]);
    for (std::size_t i = 0; i < 6; ++i) {
      out[std::string(kFunctionals[i]) + " " + names[d]] = vals[i];
    }
  }
  return out;
}

}  // namespace vocalhf::features
