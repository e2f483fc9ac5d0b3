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
#include <random>
#include <vector>

#include "spikecodec/errors.hpp"
#include "spikecodec/metrics.hpp"
#include "spikecodec/types.hpp"

using namespace spikecodec;

namespace {

Spiketrum pattern_of(std::vector<SpikeEvent> events, int num_channels,
                     double duration) {
  Spiketrum spikes;
  spikes.events = std::move(events);
  spikes.num_channels = num_channels;
  spikes.k_levels = 1;
  spikes.duration = duration;
  spikes.sample_rate = 16000.0;
  return spikes;
}

// Homogeneous Poisson spike times on one channel, deterministic in seed.
std::vector<SpikeEvent> poisson_events(int channel, double rate,
                                       double duration, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate);
  std::vector<SpikeEvent> events;
  double t = gap(rng);
  while (t < duration) {
    events.push_back({channel, t});
    t += gap(rng);
  }
  return events;
}

double achieved_snr_db(const Signal& clean, const Signal& mixed) {
  double ex = 0.0, en = 0.0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    ex += clean.samples[i] * clean.samples[i];
    const double d = mixed.samples[i] - clean.samples[i];
    en += d * d;
  }
  return 10.0 * std::log10(ex / en);
}

Signal test_tone(std::size_t n, double freq) {
  Signal x;
  x.sample_rate = 16000.0;
  x.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    x.samples[t] = 0.5 * std::sin(2.0 * M_PI * freq * t / 16000.0);
  }
  return x;
}

}  // namespace

TEST_CASE("precision matches its energy-ratio definition") {
  Signal x = test_tone(1600, 440.0);
  Signal y = x;
  for (auto& v : y.samples) v *= 0.9;  // error energy = 0.01 * Ex

  PrecisionReport r = precision(x, y);
  CHECK(r.precision == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(r.original_energy == doctest::Approx(energy(x)).epsilon(1e-12));
  CHECK(r.error_energy ==
        doctest::Approx(0.01 * energy(x)).epsilon(1e-9));

  // Identical signals score exactly 1.
  CHECK(precision(x, x).precision == 1.0);

  // A reconstruction worse than silence clamps to 0.
  Signal z = x;
  for (auto& v : z.samples) v = -2.0 * v;
  CHECK(precision(x, z).precision == 0.0);

  Signal silent = x;
  for (auto& v : silent.samples) v = 0.0;
  CHECK_THROWS_AS(precision(silent, x), ValidationError);

  Signal short_sig = x;
  short_sig.samples.resize(100);
  CHECK_THROWS_AS(precision(x, short_sig), ValidationError);

  Signal wrong_rate = x;
  wrong_rate.sample_rate = 8000.0;
  CHECK_THROWS_AS(precision(x, wrong_rate), ValidationError);
}

TEST_CASE("psth bins counts over channels and time") {
  // duration 0.3, width 0.1 -> 3 bins; the 0.30 spike sits exactly on the
  // edge and lands in the last bin.
  Spiketrum spikes = pattern_of(
      {{1, 0.05}, {1, 0.149}, {2, 0.30}}, 2, 0.3);

  auto per_channel = psth(spikes, 0.1, PsthMode::kPerChannel);
  REQUIRE(per_channel.size() == 6);
  CHECK(per_channel[0] == doctest::Approx(10.0));
  CHECK(per_channel[1] == doctest::Approx(10.0));
  CHECK(per_channel[2] == doctest::Approx(0.0));
  CHECK(per_channel[3] == doctest::Approx(0.0));
  CHECK(per_channel[4] == doctest::Approx(0.0));
  CHECK(per_channel[5] == doctest::Approx(10.0));

  auto collapsed = psth(spikes, 0.1, PsthMode::kCollapsed);
  REQUIRE(collapsed.size() == 3);
  CHECK(collapsed[0] == doctest::Approx(10.0));
  CHECK(collapsed[1] == doctest::Approx(10.0));
  CHECK(collapsed[2] == doctest::Approx(10.0));

  // ceil(0.25 / 0.1) = 3 bins.
  Spiketrum odd = pattern_of({{1, 0.21}}, 1, 0.25);
  CHECK(psth(odd, 0.1, PsthMode::kCollapsed).size() == 3);

  // Empty pattern: all zeros.
  Spiketrum empty = pattern_of({}, 2, 0.3);
  auto zeros = psth(empty, 0.1, PsthMode::kPerChannel);
  REQUIRE(zeros.size() == 6);
  for (double v : zeros) CHECK(v == 0.0);

  CHECK_THROWS_AS(psth(spikes, 0.0, PsthMode::kCollapsed), ConfigError);
  CHECK_THROWS_AS(psth(spikes, -0.1, PsthMode::kCollapsed), ConfigError);
  Spiketrum late = pattern_of({{1, 0.31}}, 1, 0.3);
  CHECK_THROWS_AS(psth(late, 0.1, PsthMode::kCollapsed), ValidationError);
  Spiketrum bad_channel = pattern_of({{3, 0.1}}, 2, 0.3);
  CHECK_THROWS_AS(psth(bad_channel, 0.1, PsthMode::kPerChannel),
                  ValidationError);
}

TEST_CASE("psth similarity is Pearson with zero padding") {
  // Hand-computed: a = {1,2,3}, b = {2,4,6.5} -> r = 1.5 /
  // sqrt((2/3) * (10.166667/3)) = 0.99794857...
  std::vector<double> a = {1.0, 2.0, 3.0};
  std::vector<double> b = {2.0, 4.0, 6.5};
  Similarity s = psth_similarity(a, b);
  CHECK_FALSE(s.degenerate);
  CHECK(s.value == doctest::Approx(0.9979486).epsilon(1e-6));

  // Shorter vector is zero-padded: {1,2} vs {1,2,0} are identical.
  std::vector<double> c = {1.0, 2.0};
  std::vector<double> d = {1.0, 2.0, 0.0};
  Similarity t = psth_similarity(c, d);
  CHECK(t.value == doctest::Approx(1.0).epsilon(1e-12));

  // Perfect anticorrelation.
  std::vector<double> e = {1.0, 0.0, -1.0};
  std::vector<double> f = {-3.0, 0.0, 3.0};
  CHECK(psth_similarity(e, f).value == doctest::Approx(-1.0).epsilon(1e-12));

  // Zero variance forces the 0 definition with the flag set.
  std::vector<double> flat = {2.0, 2.0, 2.0};
  Similarity u = psth_similarity(flat, a);
  CHECK(u.value == 0.0);
  CHECK(u.degenerate);
  Similarity v = psth_similarity({}, {});
  CHECK(v.value == 0.0);
  CHECK(v.degenerate);
}

TEST_CASE("similarity report separates within from among") {
  // Two tight clusters: {v0, v1} with label 0, {v2, v3} with label 1.
  std::vector<std::vector<double>> rates = {
      {1.0, 2.0, 3.0, 4.0},
      {1.1, 2.1, 3.0, 4.2},
      {4.0, 3.0, 2.0, 1.0},
      {4.1, 3.2, 2.0, 1.0},
  };
  std::vector<int> labels = {0, 0, 1, 1};
  SimilarityReport report = similarity_report(rates, labels);

  REQUIRE(report.matrix.size() == 4);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(report.matrix[i].size() == 4);
    CHECK(report.matrix[i][i] == 1.0);
    for (int j = 0; j < 4; ++j) {
      CHECK(report.matrix[i][j] == report.matrix[j][i]);
    }
  }
  const double expected_within =
      0.5 * (report.matrix[0][1] + report.matrix[2][3]);
  const double expected_among =
      0.25 * (report.matrix[0][2] + report.matrix[0][3] +
              report.matrix[1][2] + report.matrix[1][3]);
  CHECK(report.within == doctest::Approx(expected_within).epsilon(1e-12));
  CHECK(report.among == doctest::Approx(expected_among).epsilon(1e-12));
  CHECK(report.overall ==
        doctest::Approx(expected_within - expected_among).epsilon(1e-12));
  CHECK(report.within > 0.9);
  CHECK(report.among < 0.0);

  CHECK_THROWS_AS(similarity_report(rates, {0, 0, 1}), ValidationError);
  CHECK_THROWS_AS(similarity_report({}, {}), ValidationError);
}

TEST_CASE("bootstrap summary is deterministic and ordered") {
  std::vector<std::vector<double>> rates;
  std::vector<int> labels;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> jitter(0.0, 0.1);
  const std::vector<double> proto_a = {1, 2, 3, 4, 5, 4, 3, 2};
  const std::vector<double> proto_b = {5, 4, 3, 2, 1, 2, 3, 4};
  for (int i = 0; i < 6; ++i) {
    std::vector<double> v = (i < 3) ? proto_a : proto_b;
    for (double& x : v) x += jitter(rng);
    rates.push_back(v);
    labels.push_back(i < 3 ? 0 : 1);
  }
  SimilarityReport report = similarity_report(rates, labels);
  BootstrapSummary s1 = bootstrap_overall(report, labels, 500, 42);
  BootstrapSummary s2 = bootstrap_overall(report, labels, 500, 42);
  CHECK(s1.mean == s2.mean);
  CHECK(s1.ci_low == s2.ci_low);
  CHECK(s1.ci_high == s2.ci_high);
  CHECK(s1.ci_low <= s1.mean);
  CHECK(s1.mean <= s1.ci_high);
  // Clearly separated clusters keep the whole interval positive.
  CHECK(s1.ci_low > 0.0);
  // Near the point estimate.
  CHECK(s1.mean == doctest::Approx(report.overall).epsilon(0.25));

  BootstrapSummary s3 = bootstrap_overall(report, labels, 500, 43);
  CHECK(s3.mean != s1.mean);

  CHECK_THROWS_AS(bootstrap_overall(report, labels, 0, 1), ConfigError);
  CHECK_THROWS_AS(bootstrap_overall(report, {0, 1}, 10, 1), ValidationError);
}

TEST_CASE("entropy matches the white-count oracle") {
  // Poisson counts are white: S(f) = lambda * w, so the Gaussian rate is
  // (1 / (2 w ln 2)) * ln(2*pi*e*(lambda*w + floor)) bits/s with
  // floor = 1/(4*pi*e).
  const double rate = 500.0, duration = 10.0, w = 0.005;
  Spiketrum spikes = pattern_of(poisson_events(1, rate, duration, 7), 1,
                                duration);
  EntropyReport r = entropy(spikes, w, 64);
  CHECK(r.channels_used == 1);
  CHECK(r.channels_excluded == 0);

  const double floor = 1.0 / (4.0 * M_PI * M_E);
  const double expected =
      std::log(2.0 * M_PI * M_E * (rate * w + floor)) /
      (2.0 * w * std::log(2.0));
  CHECK(r.per_channel_sum == doctest::Approx(expected).epsilon(0.15));
  CHECK(r.population == doctest::Approx(r.per_channel_sum).epsilon(1e-12));
  CHECK(r.redundancy == 0.0);
}

TEST_CASE("entropy grows with spike rate") {
  const double duration = 10.0, w = 0.005;
  Spiketrum slow = pattern_of(poisson_events(1, 250.0, duration, 3), 1,
                              duration);
  Spiketrum fast = pattern_of(poisson_events(1, 500.0, duration, 3), 1,
                              duration);
  CHECK(entropy(fast, w, 64).population > entropy(slow, w, 64).population);
}

TEST_CASE("a duplicated channel is half redundant") {
  const double duration = 10.0, w = 0.005;
  auto base = poisson_events(1, 500.0, duration, 5);
  std::vector<SpikeEvent> doubled;
  for (const auto& e : base) {
    doubled.push_back({1, e.time});
    doubled.push_back({2, e.time});
  }
  Spiketrum spikes = pattern_of(std::move(doubled), 2, duration);
  EntropyReport r = entropy(spikes, w, 64);
  CHECK(r.channels_used == 2);
  // The duplicate adds (almost) nothing to the joint rate.
  const double single =
      entropy(pattern_of(base, 1, duration), w, 64).population;
  CHECK(r.population == doctest::Approx(single).epsilon(0.05));
  CHECK(r.redundancy == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("independent channels carry little redundancy") {
  const double duration = 10.0, w = 0.005;
  auto a = poisson_events(1, 400.0, duration, 21);
  auto b = poisson_events(2, 400.0, duration, 22);
  std::vector<SpikeEvent> merged = a;
  merged.insert(merged.end(), b.begin(), b.end());
  Spiketrum spikes = pattern_of(std::move(merged), 2, duration);
  EntropyReport r = entropy(spikes, w, 64);
  CHECK(r.channels_used == 2);
  CHECK(r.redundancy < 0.15);
}

TEST_CASE("silent and sub-floor channels are excluded") {
  const double duration = 10.0, w = 0.005;
  auto events = poisson_events(1, 500.0, duration, 9);
  events.push_back({3, 1.0});  // two spikes in 10 s: below the floor
  events.push_back({3, 6.0});
  Spiketrum spikes = pattern_of(std::move(events), 3, duration);
  EntropyReport r = entropy(spikes, w, 64);
  CHECK(r.channels_used == 1);
  CHECK(r.channels_excluded == 2);
}

TEST_CASE("entropy names its minimum duration") {
  CHECK(entropy_min_duration(0.01, 64) == doctest::Approx(0.96).epsilon(1e-12));
  Spiketrum tiny = pattern_of({{1, 0.1}, {1, 0.2}}, 1, 0.5);
  CHECK_THROWS_WITH_AS(entropy(tiny, 0.01, 64),
                       doctest::Contains("need at least"), ValidationError);
  CHECK_THROWS_AS(entropy(tiny, 0.0, 64), ConfigError);
  CHECK_THROWS_AS(entropy(tiny, 0.01, 2), ConfigError);
}

TEST_CASE("add_noise hits the requested SNR exactly") {
  Signal x = test_tone(1600, 440.0);
  Signal noise;
  noise.sample_rate = 16000.0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  noise.samples.resize(4000);
  for (auto& v : noise.samples) v = u(rng);

  for (double snr : {20.0, 10.0, 0.0, -10.0}) {
    Signal mixed = add_noise(x, noise, snr, 1);
    REQUIRE(mixed.samples.size() == x.samples.size());
    CHECK(achieved_snr_db(x, mixed) == doctest::Approx(snr).epsilon(1e-9));
  }

  // Seeded offset: same seed reproduces, different seed moves the segment.
  Signal m1 = add_noise(x, noise, 10.0, 1);
  Signal m2 = add_noise(x, noise, 10.0, 1);
  Signal m3 = add_noise(x, noise, 10.0, 2);
  CHECK(m1.samples == m2.samples);
  CHECK(m1.samples != m3.samples);

  // SNR caps at 120 dB.
  Signal hi = add_noise(x, noise, 200.0, 1);
  Signal cap = add_noise(x, noise, 120.0, 1);
  CHECK(hi.samples == cap.samples);

  // Wrap-around keeps length and exactness when noise length == x length.
  Signal tight = noise;
  tight.samples.resize(x.samples.size());
  Signal m4 = add_noise(x, tight, 5.0, 9);
  CHECK(achieved_snr_db(x, m4) == doctest::Approx(5.0).epsilon(1e-9));

  Signal short_noise = noise;
  short_noise.samples.resize(100);
  CHECK_THROWS_AS(add_noise(x, short_noise, 10.0, 1), ValidationError);
  Signal silent = noise;
  for (auto& v : silent.samples) v = 0.0;
  CHECK_THROWS_AS(add_noise(x, silent, 10.0, 1), ValidationError);
  Signal silent_x = x;
  for (auto& v : silent_x.samples) v = 0.0;
  CHECK_THROWS_AS(add_noise(silent_x, noise, 10.0, 1), ValidationError);
  Signal wrong_rate = noise;
  wrong_rate.sample_rate = 8000.0;
  CHECK_THROWS_AS(add_noise(x, wrong_rate, 10.0, 1), ValidationError);
}
