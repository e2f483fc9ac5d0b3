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

#include "spikecodec/codec.hpp"
#include "spikecodec/errors.hpp"
#include "spikecodec/kernels.hpp"
#include "spikecodec/types.hpp"

using namespace spikecodec;

namespace {

const KernelBank& default_bank() {
  static KernelBank bank{KernelBankConfig{}};
  return bank;
}

// Small bank keeps the full-recompute reference path affordable.
const KernelBank& small_bank() {
  static KernelBank bank = [] {
    KernelBankConfig config;
    config.num_kernels = 8;
    config.sample_rate = 8000.0;
    config.f_min = 50.0;
    config.f_max = 3000.0;
    return KernelBank{config};
  }();
  return bank;
}

Signal noise_signal(std::size_t n, double fs, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Signal x;
  x.sample_rate = fs;
  x.samples.resize(n);
  for (double& v : x.samples) v = dist(rng);
  return x;
}

// Adds amp * kernel at the given offset, clipped at the signal end.
void plant(Signal& x, const KernelBank& bank, int m, std::int64_t tau,
           double amp) {
  const auto& k = bank.kernel(m).samples;
  for (std::size_t u = 0; u < k.size(); ++u) {
    const std::size_t t = static_cast<std::size_t>(tau) + u;
    if (t >= x.samples.size()) break;
    x.samples[t] += amp * k[u];
  }
}

// Direct-sum correlation oracle.
std::vector<double> correlate_direct(const std::vector<double>& x,
                                     const std::vector<double>& k) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double sum = 0.0;
    for (std::size_t u = 0; u < k.size() && j + u < x.size(); ++u) {
      sum += x[j + u] * k[u];
    }
    out[j] = sum;
  }
  return out;
}

EncoderParams exact_n(std::int64_t n) {
  EncoderParams params;
  params.max_codes = n;
  params.min_energy_ratio = 0.0;
  return params;
}

}  // namespace

TEST_CASE("cross_correlate matches a direct sum on a real kernel") {
  Signal x = noise_signal(2000, 16000.0, 5);
  const Kernel& k = default_bank().kernel(25);
  auto fast = cross_correlate(x, k);
  auto slow = correlate_direct(x.samples, k.samples);
  REQUIRE(fast.size() == x.samples.size());
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-11));
  }
}

TEST_CASE("cross_correlate refuses kernels longer than the signal") {
  Signal x = noise_signal(100, 16000.0, 6);
  CHECK_THROWS_AS(cross_correlate(x, default_bank().kernel(1)),
                  ValidationError);
}

TEST_CASE("a single planted kernel is recovered exactly") {
  Signal x;
  x.sample_rate = 16000.0;
  x.samples.assign(3200, 0.0);
  plant(x, default_bank(), 17, 100, 0.8);

  CodeSet cs = encode(x, default_bank(), exact_n(1));
  REQUIRE(cs.codes.size() == 1);
  CHECK(cs.codes[0].kernel_index == 17);
  CHECK(cs.codes[0].sample_index == 100);
  CHECK(cs.codes[0].amplitude == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(cs.residual_energy_ratio < 1e-20);
  CHECK(cs.bank_fingerprint == default_bank().fingerprint());
  REQUIRE(cs.residual_energies.size() == 2);
  CHECK(cs.residual_energies[0] == doctest::Approx(energy(x)).epsilon(1e-12));
  CHECK(cs.time_seconds(0) == doctest::Approx(100.0 / 16000.0));
}

TEST_CASE("separated kernels come out largest projection first") {
  Signal x;
  x.sample_rate = 16000.0;
  x.samples.assign(3840, 0.0);
  plant(x, default_bank(), 30, 1900, 0.6);
  plant(x, default_bank(), 10, 100, 1.0);

  CodeSet cs = encode(x, default_bank(), exact_n(2));
  REQUIRE(cs.codes.size() == 2);
  CHECK(cs.codes[0].kernel_index == 10);
  CHECK(cs.codes[0].sample_index == 100);
  CHECK(cs.codes[0].amplitude == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cs.codes[1].kernel_index == 30);
  CHECK(cs.codes[1].sample_index == 1900);
  CHECK(cs.codes[1].amplitude == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(cs.residual_energy_ratio < 1e-12);
}

TEST_CASE("twenty separated kernels are all recovered") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> pick_kernel(20, 40);  // short kernels
  std::uniform_real_distribution<double> pick_amp(0.5, 2.0);
  Signal x;
  x.sample_rate = 16000.0;
  x.samples.assign(20 * 400, 0.0);
  struct Planted {
    int m;
    std::int64_t tau;
    double amp;
  };
  std::vector<Planted> planted;
  for (int i = 0; i < 20; ++i) {
    // Slot width 400 exceeds every kernel length for m >= 20.
    Planted p{pick_kernel(rng), 400 * i, pick_amp(rng)};
    REQUIRE(default_bank().kernel(p.m).length() <= 400);
    plant(x, default_bank(), p.m, p.tau, p.amp);
    planted.push_back(p);
  }
  CodeSet cs = encode(x, default_bank(), exact_n(20));
  REQUIRE(cs.codes.size() == 20);
  for (const Planted& p : planted) {
    bool found = false;
    for (const Code& c : cs.codes) {
      if (c.kernel_index == p.m && c.sample_index == p.tau &&
          std::abs(c.amplitude - p.amp) < 1e-9) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
  CHECK(cs.residual_energy_ratio < 1e-16);
}

TEST_CASE("incremental and full-recompute paths behave identically") {
  Signal x = noise_signal(1600, 8000.0, 11);
  // Overhanging component so end-of-signal bookkeeping is exercised.
  plant(x, small_bank(), 2,
        static_cast<std::int64_t>(x.samples.size()) - 150, 2.5);
  plant(x, small_bank(), 7,
        static_cast<std::int64_t>(x.samples.size()) - 40, 3.0);

  for (Selection selection : {Selection::kSigned, Selection::kMagnitude}) {
    CAPTURE(static_cast<int>(selection));
    EncoderParams fast = exact_n(25);
    fast.selection = selection;
    EncoderParams slow = fast;
    slow.full_recompute = true;

    CodeSet a = encode(x, small_bank(), fast);
    CodeSet b = encode(x, small_bank(), slow);
    REQUIRE(a.codes.size() == b.codes.size());
    for (std::size_t i = 0; i < a.codes.size(); ++i) {
      CHECK(a.codes[i].kernel_index == b.codes[i].kernel_index);
      CHECK(a.codes[i].sample_index == b.codes[i].sample_index);
      CHECK(a.codes[i].amplitude ==
            doctest::Approx(b.codes[i].amplitude).epsilon(1e-9));
    }
    REQUIRE(a.residual_energies.size() == b.residual_energies.size());
    for (std::size_t i = 0; i < a.residual_energies.size(); ++i) {
      CHECK(a.residual_energies[i] ==
            doctest::Approx(b.residual_energies[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("energy trace tracks the reconstruction error") {
  Signal x = noise_signal(1600, 8000.0, 13);
  CodeSet cs = encode(x, small_bank(), exact_n(30));
  REQUIRE(cs.residual_energies.size() == 31);
  CHECK(cs.residual_energies[0] == doctest::Approx(energy(x)).epsilon(1e-12));
  for (std::size_t i = 1; i < cs.residual_energies.size(); ++i) {
    CHECK(cs.residual_energies[i] <= cs.residual_energies[i - 1]);
  }
  CHECK(cs.residual_energy_ratio ==
        doctest::Approx(cs.residual_energies.back() /
                        cs.residual_energies.front())
            .epsilon(1e-12));

  // The analytic trace must agree with the actual residual energy.
  Signal approx = reconstruct(cs, small_bank());
  double err = 0.0;
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    const double d = x.samples[t] - approx.samples[t];
    err += d * d;
  }
  CHECK(cs.residual_energies.back() == doctest::Approx(err).epsilon(1e-9));
}

TEST_CASE("signed selection only emits positive amplitudes") {
  Signal x = noise_signal(1600, 8000.0, 17);
  CodeSet cs = encode(x, small_bank(), exact_n(50));
  REQUIRE(cs.codes.size() == 50);
  for (const Code& c : cs.codes) CHECK(c.amplitude > 0.0);
}

TEST_CASE("magnitude selection recovers a negated kernel exactly") {
  Signal x;
  x.sample_rate = 16000.0;
  x.samples.assign(2000, 0.0);
  plant(x, default_bank(), 28, 300, -1.0);

  EncoderParams params = exact_n(1);
  params.selection = Selection::kMagnitude;
  CodeSet cs = encode(x, default_bank(), params);
  REQUIRE(cs.codes.size() == 1);
  CHECK(cs.codes[0].kernel_index == 28);
  CHECK(cs.codes[0].sample_index == 300);
  CHECK(cs.codes[0].amplitude == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cs.residual_energy_ratio < 1e-12);
}

TEST_CASE("no meaningful extraction when no positive projection remains") {
  // Fourth-order kernels all start at zero, so a one-sample signal has zero
  // correlation everywhere. Frequency-domain correlations sit at the noise
  // floor (~1e-17), so at most vanishing atoms may appear; the signal energy
  // must stay untouched.
  Signal x;
  x.sample_rate = 16000.0;
  x.samples = {-1.0};
  CodeSet cs = encode(x, default_bank(), exact_n(5));
  for (const Code& c : cs.codes) CHECK(std::abs(c.amplitude) < 1e-12);
  CHECK(cs.residual_energy_ratio == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(cs.residual_energies.size() == cs.codes.size() + 1);
  CHECK(cs.residual_energies[0] == 1.0);
}

TEST_CASE("all-zero and empty input give an empty code set") {
  Signal zero;
  zero.sample_rate = 16000.0;
  zero.samples.assign(500, 0.0);
  CodeSet cs = encode(zero, default_bank(), exact_n(3));
  CHECK(cs.codes.empty());
  CHECK(cs.residual_energy_ratio == 0.0);

  Signal empty;
  empty.sample_rate = 16000.0;
  CodeSet cs2 = encode(empty, default_bank(), exact_n(3));
  CHECK(cs2.codes.empty());
  CHECK(cs2.residual_energy_ratio == 0.0);
}

TEST_CASE("min_energy_ratio stops the expansion") {
  Signal x = noise_signal(1600, 8000.0, 19);
  EncoderParams params;
  params.max_codes = 0;
  params.min_energy_ratio = 0.05;
  CodeSet cs = encode(x, small_bank(), params);
  REQUIRE(!cs.codes.empty());
  const double e0 = cs.residual_energies.front();
  CHECK(cs.residual_energy_ratio < 0.05);
  for (std::size_t i = 0; i + 1 < cs.residual_energies.size(); ++i) {
    CHECK(cs.residual_energies[i] / e0 >= 0.05);
  }
}

TEST_CASE("target_spike_rate fixes the code budget") {
  Signal x = noise_signal(8000, 16000.0, 23);  // 0.5 s
  EncoderParams params;
  params.target_spike_rate = 100.0;
  params.min_energy_ratio = 0.0;
  CodeSet cs = encode(x, default_bank(), params);
  CHECK(cs.codes.size() == 50);
  CHECK(spike_rate(cs) == doctest::Approx(100.0));
}

TEST_CASE("codes_for_rate rounds to the nearest count") {
  CHECK(codes_for_rate(100.0, 0.5) == 50);
  CHECK(codes_for_rate(999.99, 1.0) == 1000);
  CHECK(codes_for_rate(2.4, 1.0) == 2);
  CHECK(codes_for_rate(0.0, 10.0) == 0);
  CHECK_THROWS_AS(codes_for_rate(-1.0, 1.0), ConfigError);
}

TEST_CASE("prefix equals re-encoding with a smaller budget") {
  Signal x = noise_signal(1600, 8000.0, 29);
  CodeSet full = encode(x, small_bank(), exact_n(30));
  REQUIRE(full.codes.size() == 30);
  CodeSet direct = encode(x, small_bank(), exact_n(10));
  CodeSet sliced = prefix(full, 10);

  REQUIRE(sliced.codes.size() == direct.codes.size());
  for (std::size_t i = 0; i < direct.codes.size(); ++i) {
    CHECK(sliced.codes[i].kernel_index == direct.codes[i].kernel_index);
    CHECK(sliced.codes[i].sample_index == direct.codes[i].sample_index);
    CHECK(sliced.codes[i].amplitude == direct.codes[i].amplitude);
  }
  REQUIRE(sliced.residual_energies.size() == 11);
  CHECK(sliced.residual_energy_ratio ==
        doctest::Approx(direct.residual_energy_ratio).epsilon(1e-12));

  CodeSet none = prefix(full, 0);
  CHECK(none.codes.empty());
  CHECK(none.residual_energy_ratio == 1.0);
  CHECK_THROWS_AS(prefix(full, 31), ValidationError);
}

TEST_CASE("reconstruct sums kernel instances and clips at the end") {
  const KernelBank& bank = default_bank();
  CodeSet cs;
  cs.sample_rate = 16000.0;
  cs.duration = 0.1;  // 1600 samples
  cs.bank_fingerprint = bank.fingerprint();
  cs.codes = {{35, 100, 1.5}, {38, 1550, -0.7}};  // second one overhangs

  Signal y = reconstruct(cs, bank);
  REQUIRE(y.samples.size() == 1600);
  CHECK(y.sample_rate == 16000.0);

  std::vector<double> expected(1600, 0.0);
  for (const Code& c : cs.codes) {
    const auto& k = bank.kernel(c.kernel_index).samples;
    for (std::size_t u = 0; u < k.size(); ++u) {
      const std::size_t t = static_cast<std::size_t>(c.sample_index) + u;
      if (t >= expected.size()) break;
      expected[t] += c.amplitude * k[u];
    }
  }
  for (std::size_t t = 0; t < expected.size(); ++t) {
    CHECK(y.samples[t] == expected[t]);
  }
}

TEST_CASE("reconstruct validates its inputs") {
  const KernelBank& bank = default_bank();
  CodeSet cs;
  cs.sample_rate = 16000.0;
  cs.duration = 0.1;
  cs.bank_fingerprint = "0123456789abcdef";
  cs.codes = {{1, 0, 1.0}};
  CHECK_THROWS_AS(reconstruct(cs, bank), ValidationError);

  cs.bank_fingerprint = bank.fingerprint();
  cs.codes = {{0, 0, 1.0}};
  CHECK_THROWS_AS(reconstruct(cs, bank), ValidationError);
  cs.codes = {{41, 0, 1.0}};
  CHECK_THROWS_AS(reconstruct(cs, bank), ValidationError);
  cs.codes = {{1, 1600, 1.0}};
  CHECK_THROWS_AS(reconstruct(cs, bank), ValidationError);
  cs.codes = {{1, -1, 1.0}};
  CHECK_THROWS_AS(reconstruct(cs, bank), ValidationError);
}

TEST_CASE("encode is deterministic") {
  Signal x = noise_signal(1600, 8000.0, 31);
  CodeSet a = encode(x, small_bank(), exact_n(20));
  CodeSet b = encode(x, small_bank(), exact_n(20));
  REQUIRE(a.codes.size() == b.codes.size());
  for (std::size_t i = 0; i < a.codes.size(); ++i) {
    CHECK(a.codes[i].kernel_index == b.codes[i].kernel_index);
    CHECK(a.codes[i].sample_index == b.codes[i].sample_index);
    CHECK(a.codes[i].amplitude == b.codes[i].amplitude);
  }
}

TEST_CASE("encode validates parameters and input") {
  Signal x = noise_signal(800, 8000.0, 37);
  EncoderParams params = exact_n(5);

  Signal wrong_rate = x;
  wrong_rate.sample_rate = 16000.0;
  CHECK_THROWS_AS(encode(wrong_rate, small_bank(), params), ValidationError);

  EncoderParams no_stop;
  no_stop.max_codes = 0;
  no_stop.min_energy_ratio = 0.0;
  CHECK_THROWS_AS(encode(x, small_bank(), no_stop), ConfigError);

  EncoderParams negative_budget = params;
  negative_budget.max_codes = -2;
  CHECK_THROWS_AS(encode(x, small_bank(), negative_budget), ConfigError);

  EncoderParams negative_rate = params;
  negative_rate.target_spike_rate = -10.0;
  CHECK_THROWS_AS(encode(x, small_bank(), negative_rate), ConfigError);

  Signal with_nan = x;
  with_nan.samples[10] = std::nan("");
  CHECK_THROWS_AS(encode(with_nan, small_bank(), params), ValidationError);
}
