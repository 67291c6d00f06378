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
#include <numbers>

#include <json.hpp>

#include "vocalhf/error.hpp"
#include "vocalhf/rng.hpp"
#include "vocalhf/synth.hpp"

namespace vocalhf::synth {
namespace {

using audio::SectionId;

bool in_voiced_part(double t, const std::vector<std::pair<double, double>>& pattern) {
  if (pattern.empty()) return true;
  double cycle = 0.0;
  for (const auto& [v, s] : pattern) cycle += v + s;
  double u = std::fmod(t, cycle);
  for (const auto& [v, s] : pattern) {
    if (u < v) return true;
    u -= v;
    if (u < s) return false;
    u -= s;
  }
  return false;
}

// Flow value of one glottal pulse at time u into the cycle.
double pulse_value(PulseShape shape, double u, double period, double open, double amp) {
  switch (shape) {
    case PulseShape::Sinusoidal:
      return amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u / period));
    case PulseShape::Rosenberg:
    case PulseShape::Sawtooth: {
      const double rise_frac = shape == PulseShape::Rosenberg ? 2.0 / 3.0 : 0.92;
      const double tp = rise_frac * open;
      const double tn = open - tp;
      if (u < tp) return amp * 0.5 * (1.0 - std::cos(std::numbers::pi * u / tp));
      if (u < open) return amp * std::cos(0.5 * std::numbers::pi * (u - tp) / tn);
      return 0.0;
    }
  }
  return 0.0;
}

double clamp_draw(Rng& rng, Dist d, double lo, double hi) {
  return std::clamp(rng.normal(d.mean, d.sd), lo, hi);
}

struct SectionLayout {
  double duration_s;
  std::vector<std::pair<double, double>> pattern;
  std::vector<Formant> formants;
  double glide;  // end f0 / start f0
};

SectionLayout layout_for(SectionId s, double pause_s, bool full_scale) {
  switch (s) {
    case SectionId::Sentences:
      return {full_scale ? 35.4 : 4.0, {{0.7, pause_s}, {0.5, 0.6 * pause_s}}, neutral_formants(), 0.85};
    case SectionId::VowelA:
      return {full_scale ? 3.4 : 2.0, {}, vowel_a_formants(), 1.0};
    case SectionId::VowelI:
      return {full_scale ? 2.7 : 2.0, {}, vowel_i_formants(), 1.0};
    case SectionId::Conversation:
      return {full_scale ? 47.5 : 4.0, {{0.9, 1.5 * pause_s}, {0.4, pause_s}}, neutral_formants(), 0.9};
  }
  return {};
}

}  // namespace

void SynthSpec::validate() const {
  if (!(f0_hz >= 60.0 && f0_hz <= 400.0)) fail(Errc::InvalidSpec, "f0_hz must be in [60, 400]");
  if (f0_end_hz && !(*f0_end_hz >= 60.0 && *f0_end_hz <= 400.0)) {
    fail(Errc::InvalidSpec, "f0_end_hz must be in [60, 400]");
  }
  if (!(jitter_pct >= 0.0) || !(shimmer_pct >= 0.0)) {
    fail(Errc::InvalidSpec, "jitter and shimmer must be non-negative");
  }
  if (!(oq > 0.0 && oq < 1.0) && shape != PulseShape::Sinusoidal) {
    fail(Errc::InvalidSpec, "oq must be in (0, 1)");
  }
  if (!(duration_s > 0.0)) fail(Errc::InvalidSpec, "duration must be positive");
  if (sample_rate <= 0) fail(Errc::InvalidSpec, "sample rate must be positive");
  for (const auto& f : formants) {
    if (!(f.center_hz > 0.0 && f.center_hz < sample_rate / 2.0 && f.bandwidth_hz > 0.0)) {
      fail(Errc::InvalidSpec, "formant outside (0, Nyquist) or non-positive bandwidth");
    }
  }
  for (const auto& [v, s] : pause_pattern) {
    if (!(v > 0.0) || !(s >= 0.0)) fail(Errc::InvalidSpec, "pause pattern needs v > 0, s >= 0");
  }
  if (!(peak > 0.0 && peak <= 1.0)) fail(Errc::InvalidSpec, "peak must be in (0, 1]");
}

SynthVoice synth_voice(const SynthSpec& spec, SectionId section) {
  spec.validate();
  Rng rng(spec.seed);
  const double rate = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * rate));
  const double f0_end = spec.f0_end_hz.value_or(spec.f0_hz);
  auto nominal_period = [&](double t) {
    const double frac = std::clamp(t / spec.duration_s, 0.0, 1.0);
    return 1.0 / (spec.f0_hz + (f0_end - spec.f0_hz) * frac);
  };

  // The excitation is rendered on a finer grid and decimated, so the output
  // is band-limited and a periodic source gives identical cycles at any
  // sub-sample phase.
  constexpr int kOversample = 4;
  const double fine_rate = rate * kOversample;
  const std::size_t fine_n = n * kOversample;
  auto render = [&](std::vector<double>& dst, double r, double start, double period, double open, double amp) {
    const auto first = static_cast<std::size_t>(std::ceil(start * r));
    const auto last = std::min(dst.size(), static_cast<std::size_t>(std::ceil((start + period) * r)));
    for (std::size_t i = first; i < last; ++i) {
      dst[i] = pulse_value(spec.shape, i / r - start, period, open, amp);
    }
  };

  SynthVoice out;
  out.flow.assign(n, 0.0);
  std::vector<double> fine_flow(fine_n, 0.0);

  // Lay out cycles in continuous time, then render each onto the sample grid.
  double t = 0.0;
  std::size_t index = 0;
  while (t < spec.duration_s) {
    const double nominal = nominal_period(t);
    double dp = 0.0, da = 0.0;
    if (spec.perturbation == Perturbation::Alternating) {
      const double sign = (index % 2 == 0) ? -1.0 : 1.0;
      dp = sign;
      da = sign;
    } else {
      dp = std::clamp(rng.normal(), -3.0, 3.0);
      da = std::clamp(rng.normal(), -3.0, 3.0);
    }
    const double period = nominal * (1.0 + spec.jitter_pct / 100.0 * dp);
    const double amp = std::max(0.05, 1.0 + spec.shimmer_pct / 100.0 * da);
    ++index;

    // The open phase follows the nominal period, so jitter only stretches
    // the closed phase and leaves the excitation strength alone.
    const double open = spec.shape == PulseShape::Sinusoidal
                            ? period
                            : std::min(spec.oq * nominal, 0.95 * period);
    const bool voiced = in_voiced_part(t, spec.pause_pattern) &&
                        in_voiced_part(std::min(t + period, spec.duration_s - 1e-9), spec.pause_pattern);
    if (voiced && t + period <= spec.duration_s) {
      out.cycle_starts_s.push_back(t);
      out.periods_s.push_back(period);
      out.amplitudes.push_back(amp);
      out.gci_times_s.push_back(spec.shape == PulseShape::Sinusoidal ? t + 0.5 * period : t + open);
      render(out.flow, rate, t, period, open, amp);
      render(fine_flow, fine_rate, t, period, open, amp);
    }
    t += period;
  }

  out.flow_derivative.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) out.flow_derivative[i] = (out.flow[i] - out.flow[i - 1]) * rate;

  // Lip radiation (the derivative) followed by cascaded two-pole resonators
  // with unity gain at DC.
  std::vector<double> fine(fine_n, 0.0);
  for (std::size_t i = 1; i < fine_n; ++i) fine[i] = fine_flow[i] - fine_flow[i - 1];
  for (const auto& f : spec.formants) {
    const double r = std::exp(-std::numbers::pi * f.bandwidth_hz / fine_rate);
    const double c = 2.0 * r * std::cos(2.0 * std::numbers::pi * f.center_hz / fine_rate);
    const double b0 = 1.0 - c + r * r;
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < fine_n; ++i) {
      const double v = b0 * fine[i] + c * y1 - r * r * y2;
      y2 = y1;
      y1 = v;
      fine[i] = v;
    }
  }
  audio::AudioSegment fine_seg;
  fine_seg.samples = std::move(fine);
  fine_seg.sample_rate = static_cast<int>(fine_rate);
  std::vector<double> y = audio::resample(fine_seg, spec.sample_rate).samples;
  y.resize(n, 0.0);

  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : y) v *= spec.peak / peak;
  }

  if (std::isfinite(spec.snr_db)) {
    double ss = 0.0;
    std::size_t active = 0;
    for (double v : y) {
      if (v != 0.0) {
        ss += v * v;
        ++active;
      }
    }
    const double rms = active > 0 ? std::sqrt(ss / active) : spec.peak * 0.1;
    const double sigma = rms * std::pow(10.0, -spec.snr_db / 20.0);
    Rng noise(mix_seed(spec.seed, 0x6e6f697365ULL));
    for (double& v : y) v = std::clamp(v + sigma * noise.normal(), -1.0, 1.0);
  }

  out.segment.samples = std::move(y);
  out.segment.sample_rate = spec.sample_rate;
  out.segment.section = section;
  return out;
}

void CohortSpec::validate() const {
  if (n_patients < 4) fail(Errc::InvalidSpec, "cohort needs at least 4 patients");
  if (!(label_balance > 0.0 && label_balance < 1.0)) {
    fail(Errc::InvalidSpec, "label_balance must be in (0, 1)");
  }
  const auto n0 = std::llround(n_patients * label_balance);
  if (n0 < 1 || n0 >= n_patients) fail(Errc::InvalidSpec, "label_balance leaves a class empty");
  if (sample_rate < 8000) fail(Errc::InvalidSpec, "sample_rate must be >= 8000");
}

PatientParams draw_patient(const ClassSpec& cls, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x706172616dULL));
  PatientParams p{};
  p.f0_hz = clamp_draw(rng, cls.f0_hz, 70.0, 350.0);
  p.jitter_pct = clamp_draw(rng, cls.jitter_pct, 0.0, 10.0);
  p.shimmer_pct = clamp_draw(rng, cls.shimmer_pct, 0.0, 30.0);
  p.oq = clamp_draw(rng, cls.oq, 0.3, 0.9);
  p.pause_s = clamp_draw(rng, cls.pause_s, 0.05, 2.0);
  p.snr_db = clamp_draw(rng, cls.snr_db, 5.0, 120.0);
  p.nt_probnp = clamp_draw(rng, cls.nt_probnp, 0.0, 1e6);
  return p;
}

audio::PatientRecord synth_patient(const ClassSpec& cls, int label, const std::string& patient_id,
                                   std::uint64_t seed, const CohortSpec& layout) {
  const PatientParams p = draw_patient(cls, seed);
  audio::PatientRecord rec;
  rec.patient_id = patient_id;
  rec.label = label;
  if (layout.include_nt_probnp) rec.nt_probnp = p.nt_probnp;
  for (SectionId s : audio::kAllSections) {
    const SectionLayout lay = layout_for(s, p.pause_s, layout.full_scale);
    SynthSpec spec;
    spec.f0_hz = p.f0_hz;
    if (lay.glide != 1.0) spec.f0_end_hz = std::clamp(p.f0_hz * lay.glide, 60.0, 400.0);
    spec.jitter_pct = p.jitter_pct;
    spec.shimmer_pct = p.shimmer_pct;
    spec.oq = p.oq;
    spec.formants = lay.formants;
    spec.duration_s = lay.duration_s;
    spec.pause_pattern = lay.pattern;
    spec.snr_db = p.snr_db;
    spec.sample_rate = layout.sample_rate;
    spec.seed = mix_seed(seed, static_cast<std::uint64_t>(audio::ordinal(s)));
    rec.sections[audio::ordinal(s) - 1] = synth_voice(spec, s).segment;
  }
  return rec;
}

namespace {

std::vector<int> assign_labels(const CohortSpec& spec) {
  const auto n0 = static_cast<std::size_t>(std::llround(spec.n_patients * spec.label_balance));
  std::vector<int> labels(static_cast<std::size_t>(spec.n_patients), 1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n0), 0);
  Rng rng(mix_seed(spec.seed, 0x6c6162656cULL));
  rng.shuffle(labels);
  return labels;
}

std::string patient_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%03d", i + 1);
  return buf;
}

}  // namespace

audio::Cohort synth_cohort(const CohortSpec& spec) {
  spec.validate();
  const auto labels = assign_labels(spec);
  audio::Cohort cohort;
  cohort.source_manifest = "<synthetic>";
  for (int i = 0; i < spec.n_patients; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    cohort.patients.push_back(synth_patient(label == 0 ? spec.class0 : spec.class1, label,
                                            patient_name(i),
                                            mix_seed(spec.seed, static_cast<std::uint64_t>(i)), spec));
  }
  return cohort;
}

std::filesystem::path write_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto labels = assign_labels(spec);
  std::vector<audio::ManifestEntry> entries;
  for (int i = 0; i < spec.n_patients; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    const auto rec = synth_patient(label == 0 ? spec.class0 : spec.class1, label, patient_name(i),
                                   mix_seed(spec.seed, static_cast<std::uint64_t>(i)), spec);
    std::filesystem::create_directories(out_dir / rec.patient_id, ec);
    if (ec) fail(Errc::IoError, "cannot create patient directory: " + ec.message());
    audio::ManifestEntry e;
    e.patient_id = rec.patient_id;
    e.label = rec.label;
    e.nt_probnp = rec.nt_probnp;
    for (SectionId s : audio::kAllSections) {
      const auto rel = std::filesystem::path(rec.patient_id) / audio::section_file_name(s);
      audio::write_wav(out_dir / rel, rec.section(s));
      e.section_paths[audio::ordinal(s) - 1] = rel;
    }
    entries.push_back(std::move(e));
  }
  const auto manifest = out_dir / "manifest.jsonl";
  audio::write_manifest(manifest, entries);
  return manifest;
}

namespace {

using nlohmann::json;

json dist_json(const Dist& d) { return json{{"mean", d.mean}, {"sd", d.sd}}; }

Dist dist_from(const json& j, const char* key, Dist fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  return Dist{v.value("mean", fallback.mean), v.value("sd", fallback.sd)};
}

json class_json(const ClassSpec& c) {
  return json{{"f0_hz", dist_json(c.f0_hz)},     {"jitter_pct", dist_json(c.jitter_pct)},
              {"shimmer_pct", dist_json(c.shimmer_pct)}, {"oq", dist_json(c.oq)},
              {"pause_s", dist_json(c.pause_s)}, {"snr_db", dist_json(c.snr_db)},
              {"nt_probnp", dist_json(c.nt_probnp)}};
}

ClassSpec class_from(const json& j) {
  ClassSpec c;
  c.f0_hz = dist_from(j, "f0_hz", c.f0_hz);
  c.jitter_pct = dist_from(j, "jitter_pct", c.jitter_pct);
  c.shimmer_pct = dist_from(j, "shimmer_pct", c.shimmer_pct);
  c.oq = dist_from(j, "oq", c.oq);
  c.pause_s = dist_from(j, "pause_s", c.pause_s);
  c.snr_db = dist_from(j, "snr_db", c.snr_db);
  c.nt_probnp = dist_from(j, "nt_probnp", c.nt_probnp);
  return c;
}

}  // namespace

CohortSpec cohort_spec_from_json(const std::string& text) {
  CohortSpec spec;
  json j;
  try {
    j = json::parse(text);
    spec.n_patients = j.value("n_patients", spec.n_patients);
    spec.label_balance = j.value("label_balance", spec.label_balance);
    if (j.contains("class0")) spec.class0 = class_from(j.at("class0"));
    if (j.contains("class1")) spec.class1 = class_from(j.at("class1"));
    spec.include_nt_probnp = j.value("include_nt_probnp", spec.include_nt_probnp);
    spec.full_scale = j.value("full_scale", spec.full_scale);
    spec.sample_rate = j.value("sample_rate", spec.sample_rate);
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    fail(Errc::InvalidSpec, std::string("cohort spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string cohort_spec_to_json(const CohortSpec& spec) {
  json j{{"n_patients", spec.n_patients},
         {"label_balance", spec.label_balance},
         {"class0", class_json(spec.class0)},
         {"class1", class_json(spec.class1)},
         {"include_nt_probnp", spec.include_nt_probnp},
         {"full_scale", spec.full_scale},
         {"sample_rate", spec.sample_rate},
         {"seed", spec.seed}};
  return j.dump(2);
}

}  // namespace vocalhf::synth
