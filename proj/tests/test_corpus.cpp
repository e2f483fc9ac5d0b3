// Copyright 2026 The Spikecodec Authors. All Rights Reserved.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "spikecodec/corpus.hpp"
#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"
#include "spikecodec/types.hpp"

using namespace spikecodec;

namespace {

// Magnitude spectrum in |bins| = n/2+1 entries; bin b covers b*fs/n Hz.
std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  RealFft fft(x.size());
  std::vector<std::complex<double>> spectrum(fft.bins());
  fft.forward(x, spectrum.data());
  std::vector<double> mag(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    mag[i] = std::abs(spectrum[i]);
  }
  return mag;
}

double dominant_frequency(const std::vector<double>& x, double fs) {
  const auto mag = magnitude_spectrum(x);
  std::size_t best = 1;
  for (std::size_t i = 1; i < mag.size(); ++i) {
    if (mag[i] > mag[best]) best = i;
  }
  return static_cast<double>(best) * fs / x.size();
}

double band_energy_fraction(const std::vector<double>& x, double fs,
                            double f_lo, double f_hi) {
  const auto mag = magnitude_spectrum(x);
  double inside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double f = static_cast<double>(i) * fs / x.size();
    const double p = mag[i] * mag[i];
    total += p;
    if (f >= f_lo && f <= f_hi) inside += p;
  }
  return total > 0.0 ? inside / total : 0.0;
}

double rms(const std::vector<double>& x) {
  return std::sqrt(energy(std::span<const double>(x)) / x.size());
}

}  // namespace

TEST_CASE("class list is stable") {
  const auto& names = corpus_class_names();
  REQUIRE(names.size() == 10);
  CHECK(names[0] == "tone_low");
  CHECK(names[1] == "tone_high");
  CHECK(names[2] == "harmonic_stack");
  CHECK(names[3] == "chirp_up");
  CHECK(names[4] == "chirp_down");
  CHECK(names[5] == "am_tone");
  CHECK(names[6] == "noise_bursts");
  CHECK(names[7] == "band_noise_low");
  CHECK(names[8] == "band_noise_high");
  CHECK(names[9] == "buzz");
}

TEST_CASE("events are deterministic in (class, index, seed)") {
  Signal a = make_sound_event(3, 7, 0.2, 16000.0, 99);
  Signal b = make_sound_event(3, 7, 0.2, 16000.0, 99);
  CHECK(a.samples == b.samples);

  Signal c = make_sound_event(3, 8, 0.2, 16000.0, 99);
  Signal d = make_sound_event(3, 7, 0.2, 16000.0, 100);
  CHECK(a.samples != c.samples);
  CHECK(a.samples != d.samples);
}

TEST_CASE("every class produces energy at the right size") {
  for (int c = 0; c < 10; ++c) {
    Signal x = make_sound_event(c, 0, 0.4, 16000.0, 1);
    CHECK(x.samples.size() == 6400);
    CHECK(x.sample_rate == 16000.0);
    CHECK(energy(x) > 1e-6);
    for (double v : x.samples) CHECK(std::abs(v) <= 1.0);
  }
  CHECK_THROWS_AS(make_sound_event(10, 0, 0.4, 16000.0, 1), ConfigError);
  CHECK_THROWS_AS(make_sound_event(-1, 0, 0.4, 16000.0, 1), ConfigError);
}

TEST_CASE("tones and band noise sit in their frequency ranges") {
  for (int idx : {0, 1, 2}) {
    Signal low = make_sound_event(0, idx, 0.4, 16000.0, 7);
    CHECK(dominant_frequency(low.samples, 16000.0) > 150.0);
    CHECK(dominant_frequency(low.samples, 16000.0) < 450.0);

    Signal high = make_sound_event(1, idx, 0.4, 16000.0, 7);
    CHECK(dominant_frequency(high.samples, 16000.0) > 1800.0);
    CHECK(dominant_frequency(high.samples, 16000.0) < 4200.0);

    Signal band_low = make_sound_event(7, idx, 0.4, 16000.0, 7);
    CHECK(band_energy_fraction(band_low.samples, 16000.0, 50.0, 600.0) > 0.9);

    Signal band_high = make_sound_event(8, idx, 0.4, 16000.0, 7);
    CHECK(band_energy_fraction(band_high.samples, 16000.0, 1800.0, 6200.0) >
          0.9);
  }
}

TEST_CASE("chirps sweep in the advertised direction") {
  for (int idx : {0, 1}) {
    Signal up = make_sound_event(3, idx, 0.4, 16000.0, 3);
    const std::size_t quarter = up.samples.size() / 4;
    std::vector<double> head(up.samples.begin(),
                             up.samples.begin() + quarter);
    std::vector<double> tail(up.samples.end() - quarter, up.samples.end());
    CHECK(dominant_frequency(head, 16000.0) <
          dominant_frequency(tail, 16000.0));

    Signal down = make_sound_event(4, idx, 0.4, 16000.0, 3);
    std::vector<double> head2(down.samples.begin(),
                              down.samples.begin() + quarter);
    std::vector<double> tail2(down.samples.end() - quarter,
                              down.samples.end());
    CHECK(dominant_frequency(head2, 16000.0) >
          dominant_frequency(tail2, 16000.0));
  }
}

TEST_CASE("noise bursts leave silent stretches") {
  Signal x = make_sound_event(6, 0, 0.4, 16000.0, 5);
  const std::size_t frame = 80;  // 5 ms
  std::vector<double> frame_rms;
  for (std::size_t start = 0; start + frame <= x.samples.size();
       start += frame) {
    std::vector<double> chunk(x.samples.begin() + start,
                              x.samples.begin() + start + frame);
    frame_rms.push_back(rms(chunk));
  }
  const double peak = *std::max_element(frame_rms.begin(), frame_rms.end());
  int silent = 0;
  for (double r : frame_rms) {
    if (r < 0.02 * peak) ++silent;
  }
  CHECK(silent >= static_cast<int>(frame_rms.size() / 10));
}

TEST_CASE("buzz has a low fundamental with a rich spectrum") {
  Signal x = make_sound_event(9, 0, 0.4, 16000.0, 5);
  // Most energy above 200 Hz comes from harmonics of a 40-80 Hz fundamental,
  // so the spectrum is spread: no single bin dominates.
  const auto mag = magnitude_spectrum(x.samples);
  double total = 0.0, peak = 0.0;
  for (double m : mag) {
    total += m * m;
    peak = std::max(peak, m * m);
  }
  CHECK(peak / total < 0.5);
  CHECK(band_energy_fraction(x.samples, 16000.0, 500.0, 4100.0) > 0.2);
}

TEST_CASE("make_corpus enumerates class-major with labels") {
  CorpusParams params;
  params.num_classes = 4;
  params.samples_per_class = 3;
  params.duration = 0.1;
  auto corpus = make_corpus(params);
  REQUIRE(corpus.size() == 12);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 3; ++i) {
      const LabeledSignal& s = corpus[c * 3 + i];
      CHECK(s.label == c);
      CHECK(s.index == i);
      CHECK(s.class_name == corpus_class_names()[c]);
      CHECK(s.signal.samples.size() == 1600);
    }
  }
  CorpusParams bad = params;
  bad.num_classes = 11;
  CHECK_THROWS_AS(make_corpus(bad), ConfigError);
}

TEST_CASE("snn corpus keeps five place-separable classes") {
  auto corpus = make_snn_corpus(2, 0.1, 16000.0, 1);
  REQUIRE(corpus.size() == 10);
  std::set<std::string> seen;
  for (const auto& s : corpus) {
    CHECK(s.label >= 0);
    CHECK(s.label <= 4);
    seen.insert(s.class_name);
  }
  CHECK(seen == std::set<std::string>{"tone_low", "tone_high", "chirp_up",
                                      "noise_bursts", "buzz"});
}

TEST_CASE("make_chirp matches its phase formula") {
  const double f0 = 300.0, f1 = 5000.0, tau = 0.25, fs = 16000.0;
  Signal x = make_chirp(f0, f1, tau, fs, 0.4);
  REQUIRE(x.samples.size() == 4000);
  for (std::size_t t : {std::size_t{0}, std::size_t{123}, std::size_t{3999}}) {
    const double ts = t / fs;
    const double phase =
        2.0 * M_PI * (f0 * ts + (f1 - f0) * ts * ts / (2.0 * tau));
    CHECK(x.samples[t] == doctest::Approx(0.4 * std::sin(phase)).epsilon(1e-12));
  }
}

TEST_CASE("babble is RMS-normalized and seeded") {
  Signal a = make_babble(0.3, 16000.0, 1);
  Signal b = make_babble(0.3, 16000.0, 1);
  Signal c = make_babble(0.3, 16000.0, 2);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(rms(a.samples) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(band_energy_fraction(a.samples, 16000.0, 80.0, 4200.0) > 0.95);
}

TEST_CASE("make_kernel_sum plants what it reports") {
  KernelBankConfig config;
  config.num_kernels = 12;
  config.sample_rate = 16000.0;
  KernelBank bank{config};

  std::vector<Code> planted;
  Signal x = make_kernel_sum(bank, 0.4, 10, 7, 1.0, true, &planted);
  REQUIRE(planted.size() == 10);

  // Supports are pairwise disjoint.
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  for (const Code& c : planted) {
    const auto len =
        static_cast<std::int64_t>(bank.kernel(c.kernel_index).length());
    spans.emplace_back(c.sample_index, c.sample_index + len);
    CHECK(c.amplitude > 0.0);
    CHECK(c.sample_index >= 0);
    CHECK(c.sample_index + len <= 6400);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    CHECK(spans[i - 1].second <= spans[i].first);
  }

  // The waveform is exactly the sum of the planted instances.
  CodeSet cs;
  cs.sample_rate = 16000.0;
  cs.duration = 0.4;
  cs.codes = planted;
  Signal rebuilt = reconstruct(cs, bank);
  REQUIRE(rebuilt.samples.size() == x.samples.size());
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    CHECK(x.samples[t] == doctest::Approx(rebuilt.samples[t]).epsilon(1e-12));
  }

  // Impossible packing refuses.
  CHECK_THROWS_AS(make_kernel_sum(bank, 0.05, 500, 7, 1.0, true, nullptr),
                  ValidationError);

  // Determinism.
  std::vector<Code> planted2;
  Signal y = make_kernel_sum(bank, 0.4, 10, 7, 1.0, true, &planted2);
  CHECK(x.samples == y.samples);
  REQUIRE(planted2.size() == planted.size());
  for (std::size_t i = 0; i < planted.size(); ++i) {
    CHECK(planted2[i].kernel_index == planted[i].kernel_index);
    CHECK(planted2[i].sample_index == planted[i].sample_index);
    CHECK(planted2[i].amplitude == planted[i].amplitude);
  }
}
