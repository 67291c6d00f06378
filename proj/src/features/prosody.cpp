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

#include "vocalhf/error.hpp"
#include "vocalhf/features.hpp"

namespace vocalhf::features {
namespace {

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::vector<VoicedSegment> voiced_segments(const dsp::F0Contour& f0, std::size_t min_frames) {
  std::vector<VoicedSegment> out;
  std::size_t k = 0;
  while (k < f0.size()) {
    if (!f0.voiced(k)) {
      ++k;
      continue;
    }
    std::size_t last = k;
    while (last + 1 < f0.size() && f0.voiced(last + 1)) ++last;
    if (last - k + 1 >= min_frames) {
      VoicedSegment s;
      s.start_s = f0.frame_center_s(k) - 0.5 * f0.hop_s;
      s.end_s = f0.frame_center_s(last) + 0.5 * f0.hop_s;
      for (std::size_t j = k; j <= last; ++j) {
        s.times_s.push_back(f0.frame_center_s(j));
        s.f0_track.push_back(f0.f0_hz[j]);
        s.energy_track.push_back(f0.energy_db[j]);
      }
      out.push_back(std::move(s));
    }
    k = last + 1;
  }
  return out;
}

const std::vector<std::string>& prosody_contour_descriptors() {
  static const std::vector<std::string> names{"tiltF0voiced", "mseEvoiced", "tiltEvoiced"};
  return names;
}

const std::vector<std::string>& prosody_scalar_descriptors() {
  static const std::vector<std::string> names{"Efirstvoiced",   "Elastvoiced",   "voicedrate",
                                              "avgdurvoiced",   "stddurvoiced",  "avgdurunvoiced",
                                              "stddurunvoiced", "voicedfraction"};
  return names;
}

FeatureMap prosody_features(const audio::AudioSegment& seg, const ProsodyConfig& cfg) {
  if (seg.section == audio::SectionId::Conversation) {
    fail(Errc::WrongSection, "prosody features are not defined on conversational speech");
  }
  const auto contour = dsp::estimate_f0(seg, cfg.pitch);
  const auto segments = voiced_segments(contour, cfg.min_voiced_frames);

  const auto& contour_names = prosody_contour_descriptors();
  const auto& scalar_names = prosody_scalar_descriptors();
  FeatureMap out;
  if (segments.empty()) {
    for (const auto& d : contour_names) {
      for (const char* p : kProsodyPrefixes) out[p + d] = kMissing;
    }
    for (const auto& d : scalar_names) out[d] = kMissing;
    return out;
  }

  std::vector<std::vector<double>> per_segment(contour_names.size());
  std::vector<double> durations, pauses;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const auto f0_fit = dsp::linear_fit(s.times_s, s.f0_track);
    const auto energy_fit = dsp::linear_fit(s.times_s, s.energy_track);
    per_segment[0].push_back(f0_fit.slope);
    per_segment[1].push_back(f0_fit.mse);
    per_segment[2].push_back(energy_fit.slope);
    durations.push_back(s.end_s - s.start_s);
    if (i > 0) pauses.push_back(s.start_s - segments[i - 1].end_s);
  }
  for (std::size_t d = 0; d < contour_names.size(); ++d) {
    const auto vals = summarize(per_segment[d]);
    for (std::size_t i = 0; i < kProsodyPrefixes.size(); ++i) out[kProsodyPrefixes[i] + contour_names[d]] = vals[i];
  }

  const double total = seg.duration_s();
  double voiced_total = 0.0;
  for (double d : durations) voiced_total += d;
  const double scalars[] = {
      mean_of(segments.front().energy_track),
      mean_of(segments.back().energy_track),
      static_cast<double>(segments.size()) / total,
      mean_of(durations),
      std_of(durations),
      pauses.empty() ? 0.0 : mean_of(pauses),
      pauses.empty() ? 0.0 : std_of(pauses),
      std::min(1.0, voiced_total / total),
  };
  for (std::size_t i = 0; i < scalar_names.size(); ++i) out[scalar_names[i]] = scalars[i];
  return out;
}

}  // namespace vocalhf::features
