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


#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/features.hpp"
#include "vocalhf/synth.hpp"

using namespace vocalhf;

namespace {

// Contour from a voicing pattern: 'V' voiced at 150 Hz, anything else unvoiced.
dsp::F0Contour pattern(const std::string& p) {
  dsp::F0Contour c;
  c.hop_s = 0.02;
  c.frame_len_s = 0.04;
  for (char ch : p) {
    c.f0_hz.push_back(ch == 'V' ? 150.0 : 0.0);
    c.energy_db.push_back(ch == 'V' ? -20.0 : -80.0);
    c.strength.push_back(ch == 'V' ? 0.9 : 0.0);
  }
  return c;
}

features::FeatureMap prosody_of(const synth::SynthSpec& spec, audio::SectionId section) {
  return features::prosody_features(synth::synth_voice(spec, section).segment);
}

}  // namespace

TEST_CASE("voiced segment rules") {
  const auto all = features::voiced_segments(pattern("VVVVVVVVVV"));
  REQUIRE(all.size() == 1);
  CHECK(all[0].times_s.size() == 10);
  CHECK(all[0].start_s == doctest::Approx(0.01));
  CHECK(all[0].end_s == doctest::Approx(0.21));
  CHECK(features::voiced_segments(pattern("VVVVVUUUUUVVVVV")).size() == 2);
  CHECK(features::voiced_segments(pattern("VV")).empty());
  for (const auto& s : features::voiced_segments(pattern("UVVVUUVVVVU"))) {
    CHECK(s.end_s > s.start_s);
    for (double f : s.f0_track) CHECK(f > 0.0);
  }
}

TEST_CASE("prosody is not measured on conversation") {
  synth::SynthSpec spec;
  try {
    prosody_of(spec, audio::SectionId::Conversation);
    FAIL("expected WrongSection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::WrongSection);
  }
}

TEST_CASE("falling pitch glide") {
  synth::SynthSpec spec;
  spec.f0_hz = 180.0;
  spec.f0_end_hz = 120.0;
  spec.duration_s = 1.0;
  const auto m = prosody_of(spec, audio::SectionId::VowelA);
  CHECK(std::abs(m.at("avgtiltF0voiced") + 60.0) <= 6.0);
  CHECK(m.at("avgmseEvoiced") <= 4.0);
  CHECK(m.at("voicedrate") == doctest::Approx(1.0));
}

TEST_CASE("voiced rate of a burst stream") {
  synth::SynthSpec spec;
  spec.f0_hz = 150.0;
  spec.duration_s = 2.0;
  spec.pause_pattern = {{0.3, 0.2}};
  const auto m = prosody_of(spec, audio::SectionId::Sentences);
  CHECK(std::abs(m.at("voicedrate") - 2.0) <= 0.5);
  const double segments = m.at("voicedrate") * 2.0;
  CHECK(std::abs(segments - 4.0) <= 1.0);
  CHECK(m.at("avgdurunvoiced") == doctest::Approx(0.2).epsilon(0.3));
  CHECK(m.at("voicedfraction") > 0.4);
  CHECK(m.at("voicedfraction") < 0.8);
}

TEST_CASE("fit error ignores a constant pitch offset") {
  synth::SynthSpec spec;
  spec.f0_hz = 140.0;
  spec.f0_end_hz = 170.0;
  spec.jitter_pct = 1.0;
  spec.duration_s = 1.0;
  auto contour = dsp::estimate_f0(synth::synth_voice(spec).segment, dsp::PitchConfig{});
  const auto before = features::voiced_segments(contour);
  for (auto& f : contour.f0_hz) {
    if (f > 0.0) f += 20.0;
  }
  const auto after = features::voiced_segments(contour);
  REQUIRE(before.size() == after.size());
  REQUIRE(!before.empty());
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto a = dsp::linear_fit(before[i].times_s, before[i].f0_track);
    const auto b = dsp::linear_fit(after[i].times_s, after[i].f0_track);
    CHECK(b.slope == doctest::Approx(a.slope).epsilon(1e-9));
    CHECK(b.mse == doctest::Approx(a.mse).epsilon(1e-6));
    CHECK(b.intercept == doctest::Approx(a.intercept + 20.0).epsilon(1e-9));
  }
}

TEST_CASE("steady vowel has a flat energy contour") {
  synth::SynthSpec spec;
  spec.f0_hz = 150.0;
  spec.duration_s = 2.0;
  const auto m = prosody_of(spec, audio::SectionId::VowelA);
  CHECK(std::abs(m.at("avgtiltEvoiced")) <= 1.0);
}

TEST_CASE("prosody names and sentinels") {
  audio::AudioSegment seg;
  seg.sample_rate = 16000;
  seg.section = audio::SectionId::Sentences;
  seg.samples.assign(32000, 0.0);
  const auto m = features::prosody_features(seg);
  CHECK(m.size() == 6 * features::prosody_contour_descriptors().size() +
                        features::prosody_scalar_descriptors().size());
  CHECK(m.count("skwtiltEvoiced") == 1);
  for (const auto& [name, value] : m) {
    CAPTURE(name);
    CHECK(std::isnan(value));
  }
}
