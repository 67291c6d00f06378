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
#include "vocalhf/features.hpp"

namespace vocalhf::features {
namespace {

// Pole of the leaky integrator that undoes lip radiation.
constexpr double kLeak = 0.999;

std::vector<double> integrate(std::span<const double> x) {
  std::vector<double> y(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc = x[i] + kLeak * acc;
    y[i] = acc;
  }
  return y;
}

std::vector<double> windowed_lpc(std::span<const double> x, int order) {
  return dsp::lpc(dsp::apply_hann(x, true), order).coeffs;
}

// Vocal-tract inverse filter for one analysis frame.
std::vector<double> vocal_tract(std::span<const double> frame, int vt_order, int glottal_order) {
  std::vector<double> s(frame.begin(), frame.end());
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  for (double& v : s) v -= mean;

  // Pass 1: a first-order fit stands in for the glottal tilt.
  const auto g1 = windowed_lpc(s, 1);
  const auto vt1 = windowed_lpc(dsp::inverse_filter(g1, s), vt_order);
  const auto g_est = integrate(dsp::inverse_filter(vt1, s));
  // Pass 2: refined glottal model, then the final vocal-tract estimate.
  const auto g2 = windowed_lpc(g_est, glottal_order);
  const auto deglottal = integrate(dsp::inverse_filter(g2, s));
  return windowed_lpc(deglottal, vt_order);
}

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) { return std::sqrt(variance_of(v)); }

// Harmonic richness of one detrended flow cycle, dB.
double harmonic_richness(std::span<const double> cycle, double period_samples, int max_harmonics) {
  const std::size_t nfft = dsp::next_pow2(cycle.size()) * 8;
  const auto mag = dsp::magnitude_spectrum(cycle, nfft);
  auto harmonic = [&](int k) {
    const double bin = k * static_cast<double>(nfft) / period_samples;
    const auto m = static_cast<std::size_t>(std::llround(bin));
    if (m == 0 || m + 1 >= mag.size()) return mag[std::min(m, mag.size() - 1)];
    // Parabola through the nearest bin and its neighbours, read at the
    // exact harmonic frequency.
    const double d = bin - static_cast<double>(m);
    const double a = mag[m - 1], b = mag[m], c = mag[m + 1];
    return b + 0.5 * d * (c - a) + 0.5 * d * d * (a - 2.0 * b + c);
  };
  const double fundamental = harmonic(1);
  double upper = 0.0;
  for (int k = 2; k <= max_harmonics && k < period_samples / 2.0; ++k) upper += harmonic(k);
  if (!(fundamental > 0.0)) return kMissing;
  return 20.0 * std::log10(std::max(upper, 1e-6 * fundamental) / fundamental);
}

}  // namespace

GlottalFlow iaif(const audio::AudioSegment& seg, const GlottalConfig& cfg) {
  const std::span<const double> x = seg.samples;
  const int vt_order = seg.sample_rate / 1000 + 2;
  const auto geom = dsp::FrameGeometry::from_seconds(cfg.lpc_frame_s, cfg.lpc_hop_s, seg.sample_rate);
  if (x.size() < geom.length) fail(Errc::DegenerateFrame, "segment shorter than one analysis frame");

  const std::size_t n_frames = geom.count(x.size());
  std::vector<std::vector<double>> filters(n_frames);
  bool any = false;
  for (std::size_t k = 0; k < n_frames; ++k) {
    const auto frame = x.subspan(k * geom.hop, geom.length);
    try {
      filters[k] = vocal_tract(frame, vt_order, cfg.glottal_order);
      any = true;
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateFrame) throw;
    }
  }
  if (!any) fail(Errc::DegenerateFrame, "no frame carries energy for inverse filtering");
  // Silent frames borrow the nearest usable filter.
  for (std::size_t k = 1; k < n_frames; ++k) {
    if (filters[k].empty()) filters[k] = filters[k - 1];
  }
  for (std::size_t k = n_frames - 1; k-- > 0;) {
    if (filters[k].empty()) filters[k] = filters[k + 1];
  }

  GlottalFlow out;
  out.residual = lp_residual(seg, cfg.lpc_frame_s, cfg.lpc_hop_s);
  std::vector<double> d(x.size(), 0.0);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t center = k * geom.hop + geom.length / 2;
    const std::size_t lo = k == 0 ? 0 : center - geom.hop / 2;
    const std::size_t hi = k + 1 == n_frames ? x.size() : std::min(x.size(), center + (geom.hop + 1) / 2);
    const auto& a = filters[k];
    for (std::size_t n = lo; n < hi; ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j < a.size() && j <= n; ++j) acc += a[j] * x[n - j];
      d[n] = acc;
    }
  }
  out.flow = integrate(d);
  out.derivative.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out.derivative[i] = d[i] * seg.sample_rate;
  return out;
}

std::vector<double> detect_gci(const audio::AudioSegment& seg, const dsp::F0Contour& f0,
                               const GlottalConfig& cfg) {
  const double voiced_s = static_cast<double>(f0.voiced_count()) * f0.hop_s;
  if (voiced_s < 0.5) fail(Errc::InsufficientVoicing, "glottal analysis needs at least 0.5 s of voicing");
  const auto residual = lp_residual(seg, cfg.lpc_frame_s, cfg.lpc_hop_s);
  std::vector<double> gci;
  for (const auto& run : excitation_marks(residual, seg.sample_rate, f0)) {
    for (double t : run) {
      if (gci.empty() || t > gci.back()) gci.push_back(t);
    }
  }
  return gci;
}

std::vector<GlottalCycle> glottal_cycles(const audio::AudioSegment& seg, const GlottalFlow& flow,
                                         std::span<const double> gci_s, const GlottalConfig& cfg) {
  const double rate = seg.sample_rate;
  const double max_period = 1.0 / cfg.pitch.f0_min;
  const double min_period = 1.0 / cfg.pitch.f0_max;
  const std::span<const double> g = flow.flow;
  const std::span<const double> dg = flow.derivative;

  std::vector<GlottalCycle> cycles;
  for (std::size_t i = 0; i + 1 < gci_s.size(); ++i) {
    const double period = gci_s[i + 1] - gci_s[i];
    if (period > max_period || period < 0.5 * min_period) continue;
    const auto a = static_cast<std::size_t>(std::llround(gci_s[i] * rate));
    const auto b = static_cast<std::size_t>(std::llround(gci_s[i + 1] * rate));
    if (b >= g.size() || b <= a + 8) continue;
    const std::size_t n = b - a;

    // Flow over the cycle with the straight line between its end points removed.
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = g[a + j] - (g[a] + (g[b] - g[a]) * static_cast<double>(j) / static_cast<double>(n));
    }
    const auto [lo_it, hi_it] = std::minmax_element(c.begin(), c.end());
    const double lo = *lo_it, hi = *hi_it;
    const double swing = hi - lo;
    if (!(swing > 0.0)) continue;

    // Opening instant: where the flow last rises through 10% of its swing
    // before the peak.
    const double level = lo + 0.1 * swing;
    auto j = static_cast<std::size_t>(hi_it - c.begin());
    while (j > 0 && c[j - 1] >= level) --j;
    double opening = static_cast<double>(j);
    if (j > 0 && c[j] != c[j - 1]) opening = static_cast<double>(j - 1) + (level - c[j - 1]) / (c[j] - c[j - 1]);

    const std::size_t d_end = std::min(dg.size(), b + 3);
    const double d_min = *std::min_element(dg.begin() + static_cast<std::ptrdiff_t>(a),
                                           dg.begin() + static_cast<std::ptrdiff_t>(d_end));
    if (!(d_min < 0.0)) continue;

    GlottalCycle cyc;
    cyc.start_s = gci_s[i];
    cyc.period_s = period;
    cyc.oq = std::clamp((static_cast<double>(n) - opening) / static_cast<double>(n), 1e-9, 1.0);
    cyc.naq = swing / (-d_min * period);
    cyc.hrf_db = harmonic_richness(c, period * rate, cfg.max_harmonics);
    cyc.flow_peak = swing;
    cycles.push_back(cyc);
  }
  return cycles;
}

const std::vector<std::string>& glottal_descriptors() {
  static const std::vector<std::string> names{"std GCI", "avg OQ",  "var OQ",        "avg NAQ",      "var NAQ",
                                              "avg HRF", "var HRF", "avg flow peak", "var flow peak"};
  return names;
}

FeatureMap glottal_features(const audio::AudioSegment& seg, const GlottalConfig& cfg) {
  if (seg.section != audio::SectionId::VowelA && seg.section != audio::SectionId::VowelI) {
    fail(Errc::WrongSection, "glottal features are defined on sustained vowels only");
  }
  const auto f0 = dsp::estimate_f0(seg, cfg.pitch);
  const auto gci = detect_gci(seg, f0, cfg);
  const auto flow = iaif(seg, cfg);
  const auto cycles = glottal_cycles(seg, flow, gci, cfg);

  const auto& names = glottal_descriptors();
  std::vector<std::vector<double>> rows(names.size());
  const double duration = seg.duration_s();
  for (double t = 0.0; t == 0.0 || t + cfg.window_s <= duration + 1e-9; t += cfg.hop_s) {
    std::vector<double> period_ms, oq, naq, hrf, peak;
    for (const auto& c : cycles) {
      if (c.start_s < t || c.start_s >= t + cfg.window_s) continue;
      period_ms.push_back(c.period_s * 1e3);
      oq.push_back(c.oq);
      naq.push_back(c.naq);
      if (std::isfinite(c.hrf_db)) hrf.push_back(c.hrf_db);
      peak.push_back(c.flow_peak);
    }
    if (period_ms.size() < 2) continue;
    const double window[] = {std_of(period_ms), mean_of(oq),   variance_of(oq),
                             mean_of(naq),      variance_of(naq),
                             hrf.empty() ? kMissing : mean_of(hrf),
                             hrf.empty() ? kMissing : variance_of(hrf),
                             mean_of(peak),     variance_of(peak)};
    for (std::size_t d = 0; d < names.size(); ++d) rows[d].push_back(window[d]);
  }
  if (rows[0].empty()) fail(Errc::InsufficientVoicing, "no analysis window holds two glottal cycles");

  FeatureMap out;
  for (std::size_t d = 0; d < names.size(); ++d) {
    const auto vals = summarize(rows[d]);
    for (std::size_t i = 0; i < kFunctionals.size(); ++i) {
      out[std::string("global ") + kFunctionals[i] + " " + names[d]] = vals[i];
    }
  }
  return out;
}

}  // namespace vocalhf::features
