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

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vocalhf/audio.hpp"
#include "vocalhf/dsp.hpp"

namespace vocalhf::features {

/// Value carried by a feature that could not be measured (for example an
/// unvoiced section). Replaced by training-set medians at matrix assembly.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Feature name (without the "<section>/<family>/" prefix) to value.
using FeatureMap = std::map<std::string, double>;

/// The six functionals, in registry order.
inline constexpr std::array<const char*, 6> kFunctionals{"avg", "std", "max", "min", "skewness", "kurtosis"};

/// The six functionals over the finite entries of `values`, in kFunctionals
/// order; all kMissing when no entry is finite.
std::array<double, 6> summarize(std::span<const double> values);

// ---------------------------------------------------------------------------
// Pitch cycles

/// Consecutive pitch cycles found inside one voiced run. Cycle i is anchored
/// at marks_s[i] and lasts periods_s[i].
struct CycleRun {
  std::vector<double> marks_s;
  std::vector<double> periods_s;
  std::vector<double> amplitudes;  // max |x| over one period centred on the mark

  std::size_t size() const { return periods_s.size(); }
};

/// Linear-prediction residual with frame-wise Hann-windowed LPC of order
/// rate/1000 + 2 (16 kHz -> 18). Each sample is filtered with the frame whose
/// centre is nearest.
std::vector<double> lp_residual(const audio::AudioSegment& seg, double frame_s = 0.032,
                                double hop_s = 0.016);

/// Excitation instants (seconds) per voiced run: the most negative residual
/// sample in each expected period, searched within +/-30% of the local 1/f0
/// spacing and refined to sub-sample precision.
std::vector<std::vector<double>> excitation_marks(std::span<const double> residual, int rate,
                                                  const dsp::F0Contour& f0);

/// Cycles delimited by consecutive excitation marks. Periods are refined by
/// cross-correlating neighbouring cycles; the amplitude of a cycle is the
/// interpolated peak |x| within half a period of its mark.
std::vector<CycleRun> detect_cycles(const audio::AudioSegment& seg, const dsp::F0Contour& f0);

// ---------------------------------------------------------------------------
// Phonation

/// Local jitter, percent: mean |T_i - T_{i-1}| / mean T * 100.
double jitter(std::span<const double> periods_s);
/// Local shimmer, percent: mean |A_i - A_{i-1}| / mean A * 100.
double shimmer(std::span<const double> amplitudes);
/// Amplitude perturbation quotient over a k-point neighbourhood (truncated
/// at the ends of the sequence), percent.
double apq(std::span<const double> amplitudes, std::size_t k = 5);
/// Period perturbation quotient, the period analogue of apq.
double ppq(std::span<const double> periods_s, std::size_t k = 5);

struct PhonationConfig {
  dsp::PitchConfig pitch;
  std::size_t quotient_window = 5;
};

/// The seven per-frame descriptors, in registry order.
const std::vector<std::string>& phonation_descriptors();

/// Per-voiced-frame descriptor matrix: rows[d][i] is descriptor d of voiced
/// frame i, NaN where the frame lacks the context a descriptor needs.
struct PhonationFrames {
  std::vector<std::vector<double>> rows;
  std::size_t voiced_frames = 0;
};
PhonationFrames phonation_frames(const audio::AudioSegment& seg, const PhonationConfig& cfg = {});

/// Six functionals of each descriptor over voiced frames, keyed
/// "<functional> <descriptor>" (for example "avg apq").
FeatureMap phonation_features(const audio::AudioSegment& seg, const PhonationConfig& cfg = {});

// ---------------------------------------------------------------------------
// Glottal source

struct GlottalConfig {
  dsp::PitchConfig pitch;
  double window_s = 0.2;  // analysis window for per-window descriptors
  double hop_s = 0.1;
  double lpc_frame_s = 0.032;
  double lpc_hop_s = 0.016;
  int glottal_order = 4;
  int max_harmonics = 10;
};

/// Glottal flow and its derivative from iterative adaptive inverse filtering.
struct GlottalFlow {
  std::vector<double> flow;
  std::vector<double> derivative;  // per second
  std::vector<double> residual;    // LP residual of the speech signal
};

GlottalFlow iaif(const audio::AudioSegment& seg, const GlottalConfig& cfg = {});

/// Glottal closure instants (seconds, strictly increasing).
std::vector<double> detect_gci(const audio::AudioSegment& seg, const dsp::F0Contour& f0,
                               const GlottalConfig& cfg = {});

struct GlottalCycle {
  double start_s = 0.0;  // closure that opens this cycle
  double period_s = 0.0;
  double oq = 0.0;
  double naq = 0.0;
  double hrf_db = 0.0;
  double flow_peak = 0.0;  // peak-to-peak flow within the cycle
};

/// Per-cycle parameters between consecutive GCIs.
std::vector<GlottalCycle> glottal_cycles(const audio::AudioSegment& seg, const GlottalFlow& flow,
                                         std::span<const double> gci_s, const GlottalConfig& cfg = {});

const std::vector<std::string>& glottal_descriptors();

/// Nine per-window descriptors, each summarized over windows by the six
/// functionals; keys look like "global avg avg HRF".
FeatureMap glottal_features(const audio::AudioSegment& seg, const GlottalConfig& cfg = {});

// ---------------------------------------------------------------------------
// Prosody

struct VoicedSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<double> times_s;
  std::vector<double> f0_track;
  std::vector<double> energy_track;
};

/// Maximal runs of voiced frames of at least `min_frames` frames.
std::vector<VoicedSegment> voiced_segments(const dsp::F0Contour& f0, std::size_t min_frames = 3);

struct ProsodyConfig {
  dsp::PitchConfig pitch;
  std::size_t min_voiced_frames = 3;
};

/// Functional prefixes of prosody names, in kFunctionals order.
inline constexpr std::array<const char*, 6> kProsodyPrefixes{"avg", "std", "max", "min", "skw", "kurtosis"};

/// Descriptors summarized by the six functionals (prefix-style names such as
/// "skwtiltEvoiced") followed by the scalar prosody measures.
const std::vector<std::string>& prosody_contour_descriptors();
const std::vector<std::string>& prosody_scalar_descriptors();

FeatureMap prosody_features(const audio::AudioSegment& seg, const ProsodyConfig& cfg = {});

}  // namespace vocalhf::features
