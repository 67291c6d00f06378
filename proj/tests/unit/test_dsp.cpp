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
#include <vector>

#include "support.hpp"
#include "vocalhf/dsp.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/rng.hpp"
#include "vocalhf/synth.hpp"

using namespace vocalhf;

namespace {

audio::AudioSegment silence(double seconds) {
  audio::AudioSegment s;
  s.sample_rate = 16000;
  s.samples.assign(static_cast<std::size_t>(seconds * 16000), 0.0);
  return s;
}

}  // namespace

TEST_CASE("frame counts") {
  const auto g = dsp::FrameGeometry::from_seconds(0.04, 0.02, 16000);
  CHECK(g.length == 640);
  CHECK(g.hop == 320);
  CHECK(g.count(16000) == 49);
  CHECK(g.count(640) == 1);
  CHECK(g.count(639) == 0);

  const auto seg = silence(1.0);
  const auto frames = dsp::frame_signal(seg, 0.04, 0.02);
  REQUIRE(frames.size() == 49);
  CHECK(frames[1].data() == seg.samples.data() + 320);
  CHECK(frames[48].size() == 640);
}

TEST_CASE("f0 of a synthetic 150 Hz vowel") {
  synth::SynthSpec spec;
  spec.f0_hz = 150.0;
  spec.duration_s = 1.0;
  const auto voice = synth::synth_voice(spec);
  const auto c = dsp::estimate_f0(voice.segment, 60.0, 400.0);
  std::size_t hits = 0;
  for (double f : c.f0_hz) hits += f >= 148.0 && f <= 152.0;
  CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c.voiced(k)) CHECK((c.f0_hz[k] >= 60.0 && c.f0_hz[k] <= 400.0));
  }
  CHECK(c.hop_s == 0.02);
}

TEST_CASE("f0 across the vocal range") {
  for (double f0 : {100.0, 220.0, 300.0}) {
    CAPTURE(f0);
    synth::SynthSpec spec;
    spec.f0_hz = f0;
    const auto c = dsp::estimate_f0(synth::synth_voice(spec).segment, 60.0, 400.0);
    std::size_t hits = 0;
    for (double f : c.f0_hz) hits += std::abs(f - f0) <= 0.02 * f0;
    CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(c.size()));
  }
}

TEST_CASE("silence and noise are unvoiced") {
  CHECK(dsp::estimate_f0(silence(1.0), 60.0, 400.0).voiced_count() == 0);
  double fraction = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto seg = silence(1.0);
    for (auto& x : seg.samples) x = 0.1 * rng.normal();
    const auto c = dsp::estimate_f0(seg, 60.0, 400.0);
    const double f = static_cast<double>(c.voiced_count()) / static_cast<double>(c.size());
    CHECK(f <= 0.2);
    fraction += f / 10.0;
  }
  CHECK(fraction <= 0.2);
}

TEST_CASE("f0 is shift invariant by whole hops") {
  synth::SynthSpec spec;
  spec.f0_hz = 130.0;
  spec.jitter_pct = 1.0;
  spec.duration_s = 1.0;
  const auto seg = synth::synth_voice(spec).segment;
  auto shifted = seg;
  shifted.samples.insert(shifted.samples.begin(), 3 * 320, 0.0);
  const auto a = dsp::estimate_f0(seg, 60.0, 400.0);
  const auto b = dsp::estimate_f0(shifted, 60.0, 400.0);
  REQUIRE(b.size() == a.size() + 3);
  std::size_t differ = 0;
  for (std::size_t k = 0; k < a.size(); ++k) differ += a.f0_hz[k] != b.f0_hz[k + 3];
  CHECK(differ <= 2);
}

TEST_CASE("short-time log energy") {
  std::vector<double> square(640);
  for (std::size_t i = 0; i < square.size(); ++i) square[i] = (i / 20) % 2 ? 1.0 : -1.0;
  CHECK(std::abs(dsp::short_time_log_energy(square)) <= 0.1);
  const std::vector<double> zero(640, 0.0);
  CHECK(dsp::short_time_log_energy(zero) == doctest::Approx(-100.0));
}

TEST_CASE("lpc recovers an AR(2) process") {
  const double a1 = -1.3, a2 = 0.6;  // x[n] = 1.3 x[n-1] - 0.6 x[n-2] + e[n]
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    Rng rng(seed);
    std::vector<double> x(16384 + 200, 0.0);
    for (std::size_t n = 2; n < x.size(); ++n) x[n] = -a1 * x[n - 1] - a2 * x[n - 2] + rng.normal();
    x.erase(x.begin(), x.begin() + 200);
    const auto r = dsp::lpc(dsp::apply_hann(x), 2);
    REQUIRE(r.coeffs.size() == 3);
    CHECK(r.coeffs[0] == 1.0);
    CHECK(std::abs(r.coeffs[1] - a1) <= 0.05 * std::abs(a1));
    CHECK(std::abs(r.coeffs[2] - a2) <= 0.05 * std::abs(a2));
    for (double k : r.reflection) CHECK(std::abs(k) < 1.0);
  }
}

TEST_CASE("lpc edge cases") {
  const std::vector<double> zero(400, 0.0);
  CHECK_THROWS_AS(dsp::lpc(zero, 10), Error);
  try {
    dsp::lpc(zero, 10);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateFrame);
  }
  Rng rng(9);
  std::vector<double> noise(2048);
  for (auto& v : noise) v = rng.normal();
  const auto r = dsp::lpc(noise, 10);
  const double gain_db = 10.0 * std::log10(r.frame_energy / r.residual_energy);
  CHECK(gain_db <= 1.5);
  CHECK(gain_db >= 0.0);
}

TEST_CASE("inverse filter applies the coefficients") {
  const std::vector<double> coeffs{1.0, -0.5};
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(dsp::inverse_filter(coeffs, x) == std::vector<double>{1.0, 1.5, 2.0});
}

TEST_CASE("linear fit") {
  const std::vector<double> xs{0, 1, 2, 3};
  const std::vector<double> ys{1, 3, 5, 7};
  const auto f = dsp::linear_fit(xs, ys);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.mse == doctest::Approx(0.0));

  const std::vector<double> x3{0, 1, 2}, y3{0, 1, 0};
  const auto g = dsp::linear_fit(x3, y3);
  CHECK(g.slope == doctest::Approx(0.0));
  CHECK(g.intercept == doctest::Approx(1.0 / 3.0));
  CHECK(g.mse == doctest::Approx(2.0 / 9.0));

  const std::vector<double> same{2, 2, 2};
  try {
    dsp::linear_fit(same, y3);
    FAIL("expected DegenerateAbscissa");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateAbscissa);
  }
}

TEST_CASE("functionals") {
  const std::vector<double> ones{1, 1, 1};
  const auto c = dsp::functionals(ones);
  CHECK(c.avg == 1.0);
  CHECK(c.std == 0.0);
  CHECK(c.skewness == 0.0);
  CHECK(c.kurtosis == 0.0);

  const std::vector<double> v{0, 0, 0, 1};
  const auto f = dsp::functionals(v);
  CHECK(f.avg == doctest::Approx(0.25));
  CHECK(f.std == doctest::Approx(0.4330127).epsilon(1e-6));
  CHECK(f.skewness == doctest::Approx(1.1547005).epsilon(1e-6));
  CHECK(f.kurtosis == doctest::Approx(-2.0 / 3.0).epsilon(1e-6));
  CHECK(f.max == 1.0);
  CHECK(f.min == 0.0);

  const std::vector<double> sym{-1, 0, 1};
  CHECK(std::abs(dsp::functionals(sym).skewness) < 1e-15);
}

TEST_CASE("functionals are permutation invariant and scale equivariant") {
  Rng rng(5);
  std::vector<double> v(50);
  for (auto& x : v) x = rng.normal() + 0.3 * rng.uniform();
  const auto base = dsp::functionals(v);
  auto perm = v;
  rng.shuffle(perm);
  const auto p = dsp::functionals(perm);
  CHECK(p.avg == doctest::Approx(base.avg));
  CHECK(p.std == doctest::Approx(base.std));
  CHECK(p.skewness == doctest::Approx(base.skewness));
  CHECK(p.kurtosis == doctest::Approx(base.kurtosis));
  auto scaled = v;
  for (auto& x : scaled) x *= 3.5;
  const auto s = dsp::functionals(scaled);
  CHECK(s.avg == doctest::Approx(3.5 * base.avg));
  CHECK(s.std == doctest::Approx(3.5 * base.std));
  CHECK(s.max == doctest::Approx(3.5 * base.max));
  CHECK(s.min == doctest::Approx(3.5 * base.min));
  CHECK(s.skewness == doctest::Approx(base.skewness));
  CHECK(s.kurtosis == doctest::Approx(base.kurtosis));
  CHECK(base.min <= base.avg);
  CHECK(base.avg <= base.max);
}

TEST_CASE("fft matches a direct transform") {
  Rng rng(1);
  std::vector<std::complex<double>> x(16);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  auto y = x;
  dsp::fft(y);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::complex<double> acc;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / 16.0);
    }
    CHECK(std::abs(acc - y[k]) < 1e-12);
  }
  CHECK(dsp::next_pow2(17) == 32);
  CHECK(dsp::next_pow2(16) == 16);
}

TEST_CASE("parabolic peak") {
  double v = 0.0;
  // y = 1 - (x - 0.25)^2
  const auto f = [](double x) { return 1.0 - (x - 0.25) * (x - 0.25); };
  CHECK(dsp::parabolic_peak(f(-1), f(0), f(1), &v) == doctest::Approx(0.25));
  CHECK(v == doctest::Approx(1.0));
}
