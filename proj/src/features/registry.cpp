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

#include "vocalhf/error.hpp"
#include "vocalhf/feature_matrix.hpp"

namespace vocalhf::features {
namespace {

using nlohmann::json;

constexpr Family kFamilies[] = {Family::Glottal, Family::Phonation, Family::Prosody};

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Errors that mean "nothing measurable here" rather than a broken input.
bool is_unmeasurable(Errc code) {
  switch (code) {
    case Errc::InsufficientVoicing:
    case Errc::TooFewCycles:
    case Errc::DegenerateFrame:
    case Errc::DegenerateAbscissa:
    case Errc::InvalidAmplitude:
      return true;
    default:
      return false;
  }
}

json pitch_to_json(const dsp::PitchConfig& p) {
  return {{"frame_len_s", p.frame_len_s},
          {"hop_s", p.hop_s},
          {"f0_min", p.f0_min},
          {"f0_max", p.f0_max},
          {"voicing_threshold", p.voicing_threshold},
          {"silence_floor_db", p.silence_floor_db},
          {"relative_floor_db", p.relative_floor_db},
          {"peak_ratio", p.peak_ratio},
          {"lowpass_hz", p.lowpass_hz}};
}

dsp::PitchConfig pitch_from_json(const json& j) {
  dsp::PitchConfig p;
  p.frame_len_s = j.value("frame_len_s", p.frame_len_s);
  p.hop_s = j.value("hop_s", p.hop_s);
  p.f0_min = j.value("f0_min", p.f0_min);
  p.f0_max = j.value("f0_max", p.f0_max);
  p.voicing_threshold = j.value("voicing_threshold", p.voicing_threshold);
  p.silence_floor_db = j.value("silence_floor_db", p.silence_floor_db);
  p.relative_floor_db = j.value("relative_floor_db", p.relative_floor_db);
  p.peak_ratio = j.value("peak_ratio", p.peak_ratio);
  p.lowpass_hz = j.value("lowpass_hz", p.lowpass_hz);
  return p;
}

FeatureMap family_features(Family family, const audio::AudioSegment& seg, const ExtractionConfig& cfg) {
  switch (family) {
    case Family::Glottal:
      return glottal_features(seg, cfg.glottal);
    case Family::Phonation:
      return phonation_features(seg, cfg.phonation);
    case Family::Prosody:
      return prosody_features(seg, cfg.prosody);
  }
  return {};
}

// Names of one family without the "<section>/<family>/" prefix.
std::vector<std::string> family_names(Family family) {
  std::vector<std::string> out;
  switch (family) {
    case Family::Glottal:
      for (const auto& d : glottal_descriptors()) {
        for (const char* f : kFunctionals) out.push_back(std::string("global ") + f + " " + d);
      }
      break;
    case Family::Phonation:
      for (const auto& d : phonation_descriptors()) {
        for (const char* f : kFunctionals) out.push_back(std::string(f) + " " + d);
      }
      break;
    case Family::Prosody:
      for (const auto& d : prosody_contour_descriptors()) {
        for (const char* f : kProsodyPrefixes) out.push_back(f + d);
      }
      for (const auto& d : prosody_scalar_descriptors()) out.push_back(d);
      break;
  }
  return out;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Glottal:
      return "glottal";
    case Family::Phonation:
      return "phonation";
    case Family::Prosody:
      return "prosody";
  }
  return "?";
}

std::string FeatureName::str() const {
  std::string out = audio::section_file_name(section) + "/" + std::string(to_string(family)) + "/";
  if (family == Family::Prosody) return out + functional + descriptor;
  return out + functional + " " + descriptor;
}

FeatureName FeatureName::parse(std::string_view name) {
  auto bad = [&] { fail(Errc::UnknownFeature, "not a feature name: " + std::string(name)); };
  const auto s1 = name.find('/');
  const auto s2 = s1 == std::string_view::npos ? s1 : name.find('/', s1 + 1);
  if (s2 == std::string_view::npos) bad();
  const auto sec = name.substr(0, s1);
  const auto fam = name.substr(s1 + 1, s2 - s1 - 1);
  const auto rest = std::string(name.substr(s2 + 1));

  FeatureName out;
  bool section_ok = false;
  for (auto id : audio::kAllSections) {
    if (audio::section_file_name(id) == sec) {
      out.section = id;
      section_ok = true;
    }
  }
  bool family_ok = false;
  for (auto f : kFamilies) {
    if (to_string(f) == fam) {
      out.family = f;
      family_ok = true;
    }
  }
  if (!section_ok || !family_ok || !routed(out.family, out.section)) bad();

  if (out.family == Family::Prosody) {
    if (contains(prosody_scalar_descriptors(), rest)) {
      out.descriptor = rest;
      return out;
    }
    for (const char* p : kProsodyPrefixes) {
      const std::string_view prefix(p);
      if (rest.starts_with(prefix) && contains(prosody_contour_descriptors(), rest.substr(prefix.size()))) {
        out.functional = std::string(prefix);
        out.descriptor = rest.substr(prefix.size());
        return out;
      }
    }
    bad();
  }
  const std::string lead = out.family == Family::Glottal ? "global " : "";
  const auto& descriptors = out.family == Family::Glottal ? glottal_descriptors() : phonation_descriptors();
  for (const char* f : kFunctionals) {
    const std::string prefix = lead + f + " ";
    if (rest.starts_with(prefix) && contains(descriptors, rest.substr(prefix.size()))) {
      out.functional = lead + f;
      out.descriptor = rest.substr(prefix.size());
      return out;
    }
  }
  bad();
  return out;
}

bool routed(Family family, audio::SectionId section) {
  switch (family) {
    case Family::Glottal:
      return section == audio::SectionId::VowelA || section == audio::SectionId::VowelI;
    case Family::Phonation:
      return true;
    case Family::Prosody:
      return section != audio::SectionId::Conversation;
  }
  return false;
}

json ExtractionConfig::to_json() const {
  return {{"analysis_rate", analysis_rate},
          {"pitch", pitch_to_json(phonation.pitch)},
          {"quotient_window", phonation.quotient_window},
          {"glottal",
           {{"window_s", glottal.window_s},
            {"hop_s", glottal.hop_s},
            {"lpc_frame_s", glottal.lpc_frame_s},
            {"lpc_hop_s", glottal.lpc_hop_s},
            {"glottal_order", glottal.glottal_order},
            {"max_harmonics", glottal.max_harmonics}}},
          {"min_voiced_frames", prosody.min_voiced_frames}};
}

ExtractionConfig ExtractionConfig::from_json(const json& j) {
  ExtractionConfig c;
  try {
    c.analysis_rate = j.value("analysis_rate", c.analysis_rate);
    if (j.contains("pitch")) {
      const auto p = pitch_from_json(j.at("pitch"));
      c.phonation.pitch = c.glottal.pitch = c.prosody.pitch = p;
    }
    c.phonation.quotient_window = j.value("quotient_window", c.phonation.quotient_window);
    if (j.contains("glottal")) {
      const auto& g = j.at("glottal");
      c.glottal.window_s = g.value("window_s", c.glottal.window_s);
      c.glottal.hop_s = g.value("hop_s", c.glottal.hop_s);
      c.glottal.lpc_frame_s = g.value("lpc_frame_s", c.glottal.lpc_frame_s);
      c.glottal.lpc_hop_s = g.value("lpc_hop_s", c.glottal.lpc_hop_s);
      c.glottal.glottal_order = g.value("glottal_order", c.glottal.glottal_order);
      c.glottal.max_harmonics = g.value("max_harmonics", c.glottal.max_harmonics);
    }
    c.prosody.min_voiced_frames = j.value("min_voiced_frames", c.prosody.min_voiced_frames);
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("extraction config: ") + e.what());
  }
  if (c.analysis_rate < 8000) fail(Errc::InvalidConfig, "analysis_rate must be >= 8000");
  if (!(c.glottal.window_s > 0.0 && c.glottal.hop_s > 0.0)) {
    fail(Errc::InvalidConfig, "glottal window and hop must be positive");
  }
  return c;
}

std::vector<std::string> registry(const ExtractionConfig&) {
  std::vector<std::string> out;
  for (auto section : audio::kAllSections) {
    for (auto family : kFamilies) {
      if (!routed(family, section)) continue;
      const std::string prefix = audio::section_file_name(section) + "/" + std::string(to_string(family)) + "/";
      for (const auto& n : family_names(family)) out.push_back(prefix + n);
    }
  }
  return out;
}

std::vector<double> extract_patient(const audio::PatientRecord& record, const ExtractionConfig& cfg) {
  std::vector<double> out;
  for (auto section : audio::kAllSections) {
    const auto& raw = record.section(section);
    const auto seg = raw.sample_rate == cfg.analysis_rate ? raw : audio::resample(raw, cfg.analysis_rate);
    for (auto family : kFamilies) {
      if (!routed(family, section)) continue;
      const auto names = family_names(family);
      FeatureMap values;
      try {
        values = family_features(family, seg, cfg);
      } catch (const Error& e) {
        if (!is_unmeasurable(e.code())) {
          fail(e.code(), record.patient_id + " " + audio::section_file_name(section) + ": " + e.what());
        }
      }
      for (const auto& n : names) {
        const auto it = values.find(n);
        out.push_back(it == values.end() ? kMissing : it->second);
      }
    }
  }
  return out;
}

}  // namespace vocalhf::features
