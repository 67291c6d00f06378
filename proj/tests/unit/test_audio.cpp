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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "support.hpp"
#include "vocalhf/audio.hpp"
#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"

using namespace vocalhf;
using vocalhf::testing::TempDir;

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

// RIFF/WAVE stream with an arbitrary fmt chunk and raw data payload.
std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> b;
  put_tag(b, "RIFF");
  put_u32(b, static_cast<std::uint32_t>(36 + data.size()));
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, channels);
  put_u32(b, rate);
  put_u32(b, rate * channels * bits / 8);
  put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

double peak_of(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

// Frequency of the largest FFT magnitude, parabolically refined.
double dominant_hz(const audio::AudioSegment& seg) {
  const auto nfft = dsp::next_pow2(seg.size()) * 4;
  const auto mag = dsp::magnitude_spectrum(dsp::apply_hann(seg.samples), nfft);
  const auto k = static_cast<std::size_t>(std::max_element(mag.begin() + 1, mag.end() - 1) - mag.begin());
  const double off = dsp::parabolic_peak(mag[k - 1], mag[k], mag[k + 1]);
  return (static_cast<double>(k) + off) * seg.sample_rate / static_cast<double>(nfft);
}

void write_patient(const TempDir& dir, const std::string& id, bool skip_section3) {
  for (auto s : audio::kAllSections) {
    if (skip_section3 && s == audio::SectionId::VowelI) continue;
    audio::write_wav(dir / (id + "_" + audio::section_file_name(s)), vocalhf::testing::sine(16000, 200, 0.1, 0.3, s));
  }
}

std::string manifest_line(const std::string& id, int label) {
  std::string line = "{\"patient_id\":\"" + id + "\",\"label\":" + std::to_string(label) + ",\"sections\":{";
  for (int n = 1; n <= 4; ++n) {
    line += "\"" + std::to_string(n) + "\":\"" + id + "_Section" + std::to_string(n) + ".wav\"";
    line += n < 4 ? "," : "}}\n";
  }
  return line;
}

}  // namespace

TEST_CASE("wav round trip of a 440 Hz sine at 44.1 kHz") {
  TempDir dir;
  const auto seg = vocalhf::testing::sine(44100, 440.0, 1.0, 0.5);
  audio::write_wav(dir / "a.wav", seg);
  const auto back = audio::load_wav(dir / "a.wav", audio::SectionId::VowelA);
  CHECK(back.size() == 44100);
  CHECK(back.sample_rate == 44100);
  CHECK(back.section == audio::SectionId::VowelA);
  CHECK(peak_of(back.samples) == doctest::Approx(0.5).epsilon(1e-3));
  // Re-encoding decoded samples is lossless.
  CHECK(audio::decode_wav(audio::encode_wav(back), audio::SectionId::VowelA).samples == back.samples);
}

TEST_CASE("float32 wav is rejected") {
  const std::vector<std::uint8_t> data(16, 0);
  const auto bytes = wav_bytes(3, 1, 16000, 32, data);
  CHECK(code_of([&] { audio::decode_wav(bytes, audio::SectionId::VowelA); }) == Errc::UnsupportedFormat);
}

TEST_CASE("stereo (x, -x) averages to silence") {
  std::vector<std::uint8_t> data;
  for (int i = 0; i < 100; ++i) {
    const auto v = static_cast<std::int16_t>(1000 * ((i % 7) - 3));
    put_u16(data, static_cast<std::uint16_t>(v));
    put_u16(data, static_cast<std::uint16_t>(static_cast<std::int16_t>(-v)));
  }
  const auto seg = audio::decode_wav(wav_bytes(1, 2, 16000, 16, data), audio::SectionId::Sentences);
  CHECK(seg.size() == 100);
  CHECK(peak_of(seg.samples) == 0.0);
}

TEST_CASE("malformed wav streams") {
  const std::vector<std::uint8_t> junk{'R', 'I', 'F', 'X', 0, 0, 0, 0};
  CHECK(code_of([&] { audio::decode_wav(junk, audio::SectionId::VowelA); }) == Errc::CorruptHeader);
  CHECK(code_of([&] { audio::decode_wav(wav_bytes(1, 1, 16000, 16, {}), audio::SectionId::VowelA); }) ==
        Errc::EmptyAudio);
  CHECK(code_of([&] { audio::decode_wav(wav_bytes(1, 1, 16000, 8, {1, 2}), audio::SectionId::VowelA); }) ==
        Errc::UnsupportedFormat);
}

TEST_CASE("resample keeps the spectral peak and the duration") {
  const auto seg = vocalhf::testing::sine(44100, 440.0, 1.0, 0.5);
  const auto out = audio::resample(seg, 16000);
  CHECK(out.sample_rate == 16000);
  CHECK(std::abs(out.duration_s() - 1.0) <= 1.0 / 16000 + 1e-12);
  CHECK(dominant_hz(out) == doctest::Approx(440.0).epsilon(1.0 / 440.0));
}

TEST_CASE("resample to the same rate is the identity") {
  const auto seg = vocalhf::testing::sine(16000, 300.0, 0.3, 0.4);
  CHECK(audio::resample(seg, 16000).samples == seg.samples);
  CHECK(code_of([&] { audio::resample(seg, 0); }) == Errc::InvalidRate);
}

TEST_CASE("resample removes content above the new Nyquist") {
  const auto seg = vocalhf::testing::sine(44100, 12000.0, 0.5, 0.5);
  const auto out = audio::resample(seg, 16000);
  double rms = 0.0;
  for (std::size_t i = 400; i + 400 < out.size(); ++i) rms += out.samples[i] * out.samples[i];
  rms = std::sqrt(rms / static_cast<double>(out.size() - 800));
  CHECK(rms < 1e-3);
}

TEST_CASE("cohort manifest loads in file order") {
  TempDir dir;
  write_patient(dir, "b", false);
  write_patient(dir, "a", false);
  vocalhf::testing::write_file(dir / "manifest.jsonl", manifest_line("b", 1) + manifest_line("a", 0));
  const auto cohort = audio::load_cohort(dir / "manifest.jsonl");
  REQUIRE(cohort.size() == 2);
  CHECK(cohort.patients[0].patient_id == "b");
  CHECK(cohort.patients[0].label == 1);
  CHECK(cohort.patients[1].patient_id == "a");
  CHECK(cohort.patients[1].section(audio::SectionId::VowelI).section == audio::SectionId::VowelI);
}

TEST_CASE("manifest errors") {
  TempDir dir;
  write_patient(dir, "a", true);
  vocalhf::testing::write_file(dir / "missing.jsonl", manifest_line("a", 0));
  try {
    audio::load_cohort(dir / "missing.jsonl");
    FAIL("expected MissingSection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingSection);
    const std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("Section3") != std::string::npos);
  }

  write_patient(dir, "c", false);
  vocalhf::testing::write_file(dir / "dup.jsonl", manifest_line("c", 0) + manifest_line("c", 1));
  CHECK(code_of([&] { audio::read_manifest(dir / "dup.jsonl"); }) == Errc::DuplicatePatientId);
  vocalhf::testing::write_file(dir / "label.jsonl", manifest_line("c", 2));
  CHECK(code_of([&] { audio::read_manifest(dir / "label.jsonl"); }) == Errc::LabelOutOfRange);
}

TEST_CASE("manifest write and read agree") {
  TempDir dir;
  audio::ManifestEntry e;
  e.patient_id = "x";
  e.label = 1;
  e.nt_probnp = 1234.5;
  for (auto s : audio::kAllSections) e.section_paths[audio::ordinal(s) - 1] = dir / ("x" + audio::section_file_name(s));
  audio::write_manifest(dir / "m.jsonl", std::span<const audio::ManifestEntry>(&e, 1));
  const auto back = audio::read_manifest(dir / "m.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].patient_id == "x");
  CHECK(back[0].label == 1);
  CHECK(back[0].nt_probnp == 1234.5);
  CHECK(back[0].section_paths == e.section_paths);
}

TEST_CASE("section ordinals") {
  for (int n = 1; n <= 4; ++n) CHECK(audio::ordinal(audio::section_from_ordinal(n)) == n);
  CHECK(audio::section_file_name(audio::SectionId::VowelA) == "Section2.wav");
  CHECK(code_of([] { audio::section_from_ordinal(5); }) == Errc::MissingSection);
}
