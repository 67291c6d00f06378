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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vocalhf::audio {

/// The four parts of the CAPE-V recording protocol, numbered 1..4.
enum class SectionId : int {
  Sentences = 1,
  VowelA = 2,
  VowelI = 3,
  Conversation = 4,
};

inline constexpr std::array<SectionId, 4> kAllSections{
    SectionId::Sentences, SectionId::VowelA, SectionId::VowelI,
    SectionId::Conversation};

constexpr int ordinal(SectionId s) { return static_cast<int>(s); }
SectionId section_from_ordinal(int n);
/// "Section<N>.wav", the prefix used in feature names.
std::string section_file_name(SectionId s);

/// Mono samples in [-1, 1] at a fixed rate, tagged with its protocol section.
struct AudioSegment {
  std::vector<double> samples;
  int sample_rate = 0;
  SectionId section = SectionId::Sentences;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Decodes a RIFF/WAVE 16-bit PCM buffer (1 or 2 channels). Stereo is
/// averaged to mono and samples are scaled by 1/32768.
AudioSegment decode_wav(std::span<const std::uint8_t> bytes, SectionId section);
AudioSegment load_wav(const std::filesystem::path& path, SectionId section);

/// Encodes as 16-bit mono PCM. Values are rounded to the nearest code and
/// clamped, so decode(encode(x)) == x for any x produced by decode.
std::vector<std::uint8_t> encode_wav(const AudioSegment& seg);
void write_wav(const std::filesystem::path& path, const AudioSegment& seg);

/// Band-limited (windowed-sinc) sample-rate conversion. Identity when the
/// rates already match.
AudioSegment resample(const AudioSegment& seg, int target_rate);

struct PatientRecord {
  std::string patient_id;
  std::array<AudioSegment, 4> sections;  // indexed by ordinal - 1
  int label = 0;
  std::optional<double> nt_probnp;

  const AudioSegment& section(SectionId s) const { return sections[ordinal(s) - 1]; }
};

struct Cohort {
  std::vector<PatientRecord> patients;
  std::string source_manifest;

  std::size_t size() const { return patients.size(); }
};

/// One manifest line before any audio is read. Section paths are resolved
/// relative to the manifest's directory.
struct ManifestEntry {
  std::string patient_id;
  std::array<std::filesystem::path, 4> section_paths;
  int label = 0;
  std::optional<double> nt_probnp;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& manifest_path,
                    std::span<const ManifestEntry> entries);

Cohort load_cohort(const std::filesystem::path& manifest_path);

}  // namespace vocalhf::audio
