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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vocalhf/audio.hpp"

namespace vocalhf::dsp {

/// Frame length and hop in samples for a given rate (rounded to nearest).
struct FrameGeometry {
  std::size_t length = 0;
  std::size_t hop = 0;

  static FrameGeometry from_seconds(double frame_len_s, double hop_s, int rate);
  /// floor((n - length) / hop) + 1 when n >= length, else 0.
  std::size_t count(std::size_t n) const;
};

/// Contiguous views into `samples` at hop offsets. The views borrow from the
/// caller's buffer.
std::vector<std::span<const double>> frame_signal(std::span<const double> samples,
                                                  FrameGeometry geometry);
std::vector<std::span<const double>> frame_signal(const audio::AudioSegment& seg,
                                                  double frame_len_s, double hop_s);

struct PitchConfig {
  double frame_len_s = 0.04;
  double hop_s = 0.02;
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.45;
  double silence_floor_db = -60.0;
  /// Frames more than this far below the segment's median energy are silent.
  double relative_floor_db = 30.0;
  /// The shortest-lag peak reaching this fraction of the strongest peak wins,
  /// which suppresses octave-down errors.
  double peak_ratio = 0.9;
  /// Frames are low-passed (two cascaded biquads) at this cutoff before the
  /// autocorrelation; formant detail above it only decorrelates jittered
  /// cycles. Non-positive disables the filter.
  double lowpass_hz = 1000.0;
};

/// Butterworth-Q biquad low-pass applied twice (fourth order overall).
std::vector<double> lowpass(std::span<const double> x, double cutoff_hz, int rate);

/// Per-frame F0 in Hz; 0.0 marks an unvoiced frame. Frame k is centred at
/// k * hop_s + frame_len_s / 2.
struct F0Contour {
  std::vector<double> f0_hz;
  std::vector<double> energy_db;  // short-time log energy of each frame
  std::vector<double> strength;   // normalized autocorrelation at the chosen lag
  double hop_s = 0.0;
  double frame_len_s = 0.0;

  std::size_t size() const { return f0_hz.size(); }
  bool voiced(std::size_t k) const { return f0_hz[k] > 0.0; }
  double frame_center_s(std::size_t k) const { return k * hop_s + 0.5 * frame_len_s; }
  std::size_t voiced_count() const;
};

/// Autocorrelation pitch tracker: normalized cross-correlation of the
/// windowed, low-passed frame with parabolic peak refinement; isolated
/// octave jumps against voiced neighbours are folded back.
F0Contour estimate_f0(const audio::AudioSegment& seg, const PitchConfig& cfg);
F0Contour estimate_f0(const audio::AudioSegment& seg, double f0_min, double f0_max);

/// 10 log10(mean(x^2) + 1e-10).
double short_time_log_energy(std::span<const double> frame);

std::vector<double> hann_window(std::size_t n);
/// x * hann, mean removed first when `remove_mean` is set.
std::vector<double> apply_hann(std::span<const double> x, bool remove_mean = false);

/// Linear prediction result. `coeffs` is the inverse filter
/// A(z) = 1 + a1 z^-1 + ... + ap z^-p, so coeffs[0] == 1.
struct LpcResult {
  std::vector<double> coeffs;
  std::vector<double> reflection;
  double frame_energy = 0.0;     // r(0)
  double residual_energy = 0.0;  // Levinson final prediction error
};

/// Autocorrelation method + Levinson-Durbin on an already windowed frame,
/// with r(0) raised by 1e-8 (a -80 dB white-noise floor). Reflection
/// coefficients are clamped to |k| <= 1 - 1e-6, which keeps the synthesis
/// filter minimum phase.
LpcResult lpc(std::span<const double> frame, int order);

/// Residual e[n] = sum_j coeffs[j] * x[n - j].
std::vector<double> inverse_filter(std::span<const double> coeffs, std::span<const double> x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double mse = 0.0;
};

LineFit linear_fit(std::span<const double> xs, std::span<const double> ys);

/// Average, standard deviation, maximum, minimum, skewness and kurtosis with
/// population moments. Kurtosis is excess kurtosis; skewness and kurtosis
/// are 0 when the variance is 0.
struct Functionals {
  double avg = 0.0;
  double std = 0.0;
  double max = 0.0;
  double min = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

Functionals functionals(std::span<const double> values);

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);
std::size_t next_pow2(std::size_t n);
/// |FFT| of x zero-padded to nfft (power of two), bins 0..nfft/2.
std::vector<double> magnitude_spectrum(std::span<const double> x, std::size_t nfft);

/// Vertex of the parabola through (-1, a), (0, b), (1, c): returns the offset
/// in [-1, 1] and writes the interpolated peak value.
double parabolic_peak(double a, double b, double c, double* peak_value = nullptr);

}  // namespace vocalhf::dsp
