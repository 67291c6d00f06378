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

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vocalhf/audio.hpp"

namespace vocalhf::synth {

struct Formant {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
};

enum class PulseShape {
  Rosenberg,   // raised-cosine opening, quarter-cosine closing, abrupt closure
  Sawtooth,    // same family with a very short closing phase (harmonically rich)
  Sinusoidal,  // raised cosine spanning the whole cycle (nearly pure fundamental)
};

enum class Perturbation {
  Random,       // i.i.d. normal period/amplitude deviations
  Alternating,  // deterministic +/- pattern, cycle to cycle
};

/// Controls for one synthetic voice. Jitter and shimmer are the standard
/// deviations (random) or half peak-to-peak excursions (alternating) of the
/// per-cycle period and amplitude, in percent of nominal.
struct SynthSpec {
  double f0_hz = 150.0;
  std::optional<double> f0_end_hz;  // linear glide from f0_hz over the duration
  double jitter_pct = 0.0;
  double shimmer_pct = 0.0;
  double oq = 0.6;
  std::vector<Formant> formants{{700.0, 200.0}, {1220.0, 250.0}, {2600.0, 300.0}};
  double duration_s = 1.0;
  /// Repeating (voiced seconds, silent seconds) pattern; empty = always voiced.
  std::vector<std::pair<double, double>> pause_pattern;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  int sample_rate = 16000;
  PulseShape shape = PulseShape::Rosenberg;
  Perturbation perturbation = Perturbation::Random;
  double peak = 0.5;  // output peak amplitude before noise

  void validate() const;
};

/// Audio plus everything the generator knows about it.
struct SynthVoice {
  audio::AudioSegment segment;
  std::vector<double> gci_times_s;      // one per generated cycle
  std::vector<double> cycle_starts_s;   // glottal opening instants
  std::vector<double> periods_s;
  std::vector<double> amplitudes;
  std::vector<double> flow;             // glottal flow, same length as audio
  std::vector<double> flow_derivative;  // per second
};

SynthVoice synth_voice(const SynthSpec& spec, audio::SectionId section = audio::SectionId::VowelA);

inline const std::vector<Formant>& vowel_a_formants() {
  static const std::vector<Formant> f{{700.0, 200.0}, {1220.0, 250.0}, {2600.0, 300.0}};
  return f;
}
inline const std::vector<Formant>& vowel_i_formants() {
  static const std::vector<Formant> f{{300.0, 150.0}, {2300.0, 250.0}, {3000.0, 300.0}};
  return f;
}
inline const std::vector<Formant>& neutral_formants() {
  static const std::vector<Formant> f{{500.0, 200.0}, {1500.0, 250.0}, {2500.0, 300.0}};
  return f;
}

/// Mean and spread of one per-patient parameter.
struct Dist {
  double mean = 0.0;
  double sd = 0.0;
};

struct ClassSpec {
  Dist f0_hz{140.0, 12.0};
  Dist jitter_pct{1.0, 0.2};
  Dist shimmer_pct{3.0, 0.5};
  Dist oq{0.6, 0.04};
  Dist pause_s{0.3, 0.05};
  Dist snr_db{35.0, 0.0};
  Dist nt_probnp{3000.0, 1500.0};
};

struct CohortSpec {
  int n_patients = 29;
  /// Fraction of patients with label 0; count is round(n * balance).
  double label_balance = 15.0 / 29.0;
  ClassSpec class0;
  ClassSpec class1;
  bool include_nt_probnp = true;
  /// Full clinical-protocol section durations instead of short desk-scale ones.
  bool full_scale = false;
  int sample_rate = 16000;
  std::uint64_t seed = 7;

  void validate() const;
};

CohortSpec cohort_spec_from_json(const std::string& text);
std::string cohort_spec_to_json(const CohortSpec& spec);

/// Per-patient parameter draw, exposed for tests.
struct PatientParams {
  double f0_hz, jitter_pct, shimmer_pct, oq, pause_s, snr_db, nt_probnp;
};
PatientParams draw_patient(const ClassSpec& cls, std::uint64_t seed);

audio::PatientRecord synth_patient(const ClassSpec& cls, int label, const std::string& patient_id,
                                   std::uint64_t seed, const CohortSpec& layout = {});

/// Generates the cohort in memory. Patient i uses seed mix_seed(spec.seed, i).
audio::Cohort synth_cohort(const CohortSpec& spec);

/// Generates and writes <out_dir>/<id>/Section<N>.wav plus
/// <out_dir>/manifest.jsonl; returns the manifest path.
std::filesystem::path write_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir);

}  // namespace vocalhf::synth
