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

#include "spikecodec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <utility>

#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"

namespace spikecodec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// All generator randomness flows through seed_seq, which the standard pins
// down exactly, so corpora are reproducible across platforms.
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint32_t stream,
                           std::uint32_t item) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream, item};
  return std::mt19937_64(seq);
}

std::int64_t sample_count(double duration, double sample_rate) {
  return std::llround(duration * sample_rate);
}

// 5 ms raised-cosine onset/offset so events start and end without clicks.
void apply_ramp(std::vector<double>& x, double sample_rate) {
  const auto r = std::min<std::size_t>(
      x.size() / 2,
      static_cast<std::size_t>(std::llround(0.005 * sample_rate)));
  for (std::size_t i = 0; i < r; ++i) {
    const double g =
        0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i + 1) / (r + 1));
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

double rms_of(const std::vector<double>& x) {
  return x.empty() ? 0.0
                   : std::sqrt(energy(std::span<const double>(x)) /
                               static_cast<double>(x.size()));
}

void scale_to_rms(std::vector<double>& x, double target) {
  const double r = rms_of(x);
  if (r > 0.0) {
    const double g = target / r;
    for (double& v : x) v *= g;
  }
}

void scale_to_peak(std::vector<double>& x, double target) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double g = target / peak;
    for (double& v : x) v *= g;
  }
}

// Keeps samples inside [-1, 1] no matter how the random phases landed.
void limit_peak(std::vector<double>& x, double ceiling) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > ceiling && peak > 0.0) {
    const double g = ceiling / peak;
    for (double& v : x) v *= g;
  }
}

// White noise passed through an exact frequency-domain brick-wall band.
std::vector<double> band_limited_noise(std::size_t n, double sample_rate,
                                       double f_lo, double f_hi,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  RealFft fft(n);
  std::vector<std::complex<double>> spectrum(fft.bins());
  fft.forward(x, spectrum.data());
  for (std::size_t b = 0; b < spectrum.size(); ++b) {
    const double f =
        static_cast<double>(b) * sample_rate / static_cast<double>(n);
    if (f < f_lo || f > f_hi) spectrum[b] = 0.0;
  }
  fft.inverse(spectrum, x.data());
  return x;
}

std::vector<double> make_tone(std::size_t n, double sample_rate, double f_lo,
                              double f_hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double f = f_lo + (f_hi - f_lo) * u01(rng);
  const double phase = kTwoPi * u01(rng);
  const double amp = 0.3 + 0.3 * u01(rng);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = amp * std::sin(kTwoPi * f * static_cast<double>(t) / sample_rate +
                          phase);
  }
  return x;
}

std::vector<double> make_harmonic_stack(std::size_t n, double sample_rate,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double f0 = 150.0 + 150.0 * u01(rng);
  const double target = 0.2 + 0.1 * u01(rng);
  constexpr int kHarmonics = 5;
  double phases[kHarmonics];
  for (double& p : phases) p = kTwoPi * u01(rng);
  std::vector<double> x(n, 0.0);
  for (int h = 1; h <= kHarmonics; ++h) {
    const double f = f0 * h;
    if (f >= 0.45 * sample_rate) break;
    const double a = 1.0 / h;
    for (std::size_t t = 0; t < n; ++t) {
      x[t] += a * std::sin(kTwoPi * f * static_cast<double>(t) / sample_rate +
                           phases[h - 1]);
    }
  }
  scale_to_rms(x, target);
  return x;
}

std::vector<double> make_event_chirp(std::size_t n, double duration,
                                     double sample_rate, bool upward,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double low = 300.0 + 300.0 * u01(rng);
  const double high = 3000.0 + 3000.0 * u01(rng);
  const double amp = 0.3 + 0.3 * u01(rng);
  const double f0 = upward ? low : high;
  const double f1 = upward ? high : low;
  Signal chirp = make_chirp(f0, f1, duration, sample_rate, amp);
  chirp.samples.resize(n, 0.0);
  return std::move(chirp.samples);
}

std::vector<double> make_am_tone(std::size_t n, double sample_rate,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double fc = 1000.0 + 1000.0 * u01(rng);
  const double fm = 4.0 + 12.0 * u01(rng);
  const double carrier_phase = kTwoPi * u01(rng);
  const double mod_phase = kTwoPi * u01(rng);
  const double amp = 0.3 + 0.3 * u01(rng);
  constexpr double kDepth = 0.8;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double ts = static_cast<double>(t) / sample_rate;
    const double env =
        (1.0 - kDepth) + kDepth * (0.5 + 0.5 * std::sin(kTwoPi * fm * ts +
                                                        mod_phase));
    x[t] = amp * env * std::sin(kTwoPi * fc * ts + carrier_phase);
  }
  return x;
}

std::vector<double> make_noise_bursts(std::size_t n, double sample_rate,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int bursts = 3 + static_cast<int>(4.0 * u01(rng));  // 3..6
  std::vector<double> envelope(n, 0.0);
  const double duration = static_cast<double>(n) / sample_rate;
  for (int b = 0; b < bursts; ++b) {
    const double len_s = 0.02 + 0.02 * u01(rng);
    const double start_s = (duration - len_s) * u01(rng);
    const auto len = static_cast<std::size_t>(std::llround(len_s *
                                                           sample_rate));
    const auto start = static_cast<std::size_t>(std::llround(start_s *
                                                             sample_rate));
    for (std::size_t i = 0; i < len && start + i < n; ++i) {
      const double g = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                            static_cast<double>(len - 1));
      envelope[start + i] = std::max(envelope[start + i], g);
    }
  }
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = 0.35 * envelope[t] * noise(rng);
  return x;
}

std::vector<double> make_band_noise(std::size_t n, double sample_rate,
                                    double f_lo, double f_hi,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double target = 0.2 + 0.1 * u01(rng);
  std::vector<double> x = band_limited_noise(n, sample_rate, f_lo, f_hi, rng);
  scale_to_rms(x, target);
  return x;
}

// Equal-amplitude cosine comb on a low fundamental: a periodic pulse train
// whose energy is spread across many harmonics.
std::vector<double> make_buzz(std::size_t n, double sample_rate,
                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double f0 = 40.0 + 40.0 * u01(rng);
  const double peak = 0.6 + 0.2 * u01(rng);
  const int harmonics =
      static_cast<int>(std::min(4000.0, 0.45 * sample_rate) / f0);
  std::vector<double> x(n, 0.0);
  for (int h = 1; h <= harmonics; ++h) {
    const double f = f0 * h;
    for (std::size_t t = 0; t < n; ++t) {
      x[t] += std::cos(kTwoPi * f * static_cast<double>(t) / sample_rate);
    }
  }
  scale_to_peak(x, peak);
  return x;
}

}  // namespace

const std::vector<std::string>& corpus_class_names() {
  static const std::vector<std::string> names = {
      "tone_low",     "tone_high",      "harmonic_stack", "chirp_up",
      "chirp_down",   "am_tone",        "noise_bursts",   "band_noise_low",
      "band_noise_high", "buzz"};
  return names;
}

Signal make_sound_event(int class_id, int sample_index, double duration,
                        double sample_rate, std::uint64_t seed) {
  const auto num_classes = static_cast<int>(corpus_class_names().size());
  if (class_id < 0 || class_id >= num_classes) {
    throw ConfigError("class_id must be in [0, " +
                      std::to_string(num_classes) + ")");
  }
  if (sample_index < 0) throw ConfigError("sample_index must be >= 0");
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");

  const auto n = static_cast<std::size_t>(sample_count(duration, sample_rate));
  std::mt19937_64 rng = seeded_rng(seed, static_cast<std::uint32_t>(class_id),
                                   static_cast<std::uint32_t>(sample_index));

  std::vector<double> x;
  bool ramp = true;
  switch (class_id) {
    case 0:
      x = make_tone(n, sample_rate, 200.0, 400.0, rng);
      break;
    case 1:
      x = make_tone(n, sample_rate, 2000.0, 4000.0, rng);
      break;
    case 2:
      x = make_harmonic_stack(n, sample_rate, rng);
      break;
    case 3:
      x = make_event_chirp(n, duration, sample_rate, true, rng);
      break;
    case 4:
      x = make_event_chirp(n, duration, sample_rate, false, rng);
      break;
    case 5:
      x = make_am_tone(n, sample_rate, rng);
      break;
    case 6:
      x = make_noise_bursts(n, sample_rate, rng);
      ramp = false;  // bursts carry their own gates
      break;
    case 7:
      x = make_band_noise(n, sample_rate, 100.0, 500.0, rng);
      break;
    case 8:
      x = make_band_noise(n, sample_rate, 2000.0, 6000.0, rng);
      break;
    default:
      x = make_buzz(n, sample_rate, rng);
      break;
  }
  if (ramp) apply_ramp(x, sample_rate);
  limit_peak(x, 0.98);

  Signal out;
  out.samples = std::move(x);
  out.sample_rate = sample_rate;
  return out;
}

std::vector<LabeledSignal> make_corpus(const CorpusParams& params) {
  const auto max_classes = static_cast<int>(corpus_class_names().size());
  if (params.num_classes < 1 || params.num_classes > max_classes) {
    throw ConfigError("num_classes must be in [1, " +
                      std::to_string(max_classes) + "]");
  }
  if (params.samples_per_class < 1) {
    throw ConfigError("samples_per_class must be >= 1");
  }
  std::vector<LabeledSignal> corpus;
  corpus.reserve(static_cast<std::size_t>(params.num_classes) *
                 static_cast<std::size_t>(params.samples_per_class));
  for (int c = 0; c < params.num_classes; ++c) {
    for (int i = 0; i < params.samples_per_class; ++i) {
      LabeledSignal labeled;
      labeled.signal = make_sound_event(c, i, params.duration,
                                        params.sample_rate, params.seed);
      labeled.label = c;
      labeled.class_name = corpus_class_names()[c];
      labeled.index = i;
      corpus.push_back(std::move(labeled));
    }
  }
  return corpus;
}

std::vector<LabeledSignal> make_snn_corpus(int samples_per_class,
                                           double duration,
                                           double sample_rate,
                                           std::uint64_t seed) {
  if (samples_per_class < 1) {
    throw ConfigError("samples_per_class must be >= 1");
  }
  // Families with distinct place signatures; chirp_up adds rate structure.
  static constexpr int kClassIds[] = {0, 1, 3, 6, 9};
  std::vector<LabeledSignal> corpus;
  corpus.reserve(5 * static_cast<std::size_t>(samples_per_class));
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < samples_per_class; ++i) {
      LabeledSignal labeled;
      labeled.signal =
          make_sound_event(kClassIds[k], i, duration, sample_rate, seed);
      labeled.label = k;
      labeled.class_name = corpus_class_names()[kClassIds[k]];
      labeled.index = i;
      corpus.push_back(std::move(labeled));
    }
  }
  return corpus;
}

Signal make_chirp(double f0, double f1, double duration, double sample_rate,
                  double amplitude) {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
  if (!(f0 >= 0.0) || !(f1 >= 0.0)) {
    throw ConfigError("chirp frequencies must be >= 0");
  }
  const auto n = static_cast<std::size_t>(sample_count(duration, sample_rate));
  Signal out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double ts = static_cast<double>(t) / sample_rate;
    // Instantaneous frequency f0 + (f1 - f0) * ts / duration, integrated.
    const double phase =
        kTwoPi * (f0 * ts + (f1 - f0) * ts * ts / (2.0 * duration));
    out.samples[t] = amplitude * std::sin(phase);
  }
  return out;
}

Signal make_babble(double duration, double sample_rate, std::uint64_t seed) {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
  const auto n = static_cast<std::size_t>(sample_count(duration, sample_rate));
  constexpr int kSources = 8;
  constexpr double kBabbleRms = 0.2;
  std::vector<double> mix(n, 0.0);
  for (int s = 0; s < kSources; ++s) {
    std::mt19937_64 rng =
        seeded_rng(seed, 0xBABB1Eu, static_cast<std::uint32_t>(s));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double syllable_rate = 2.0 + 4.0 * u01(rng);
    const double mod_phase = kTwoPi * u01(rng);
    std::vector<double> voice =
        band_limited_noise(n, sample_rate, 100.0, 4000.0, rng);
    for (std::size_t t = 0; t < n; ++t) {
      const double ts = static_cast<double>(t) / sample_rate;
      const double env =
          0.5 + 0.5 * std::sin(kTwoPi * syllable_rate * ts + mod_phase);
      mix[t] += env * voice[t];
    }
  }
  scale_to_rms(mix, kBabbleRms);
  Signal out;
  out.samples = std::move(mix);
  out.sample_rate = sample_rate;
  return out;
}

Signal make_kernel_sum(const KernelBank& bank, double duration, int count,
                       std::uint64_t seed, double amplitude_mean,
                       bool non_overlapping, std::vector<Code>* planted) {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (count < 0) throw ConfigError("count must be >= 0");
  if (!(amplitude_mean > 0.0)) throw ConfigError("amplitude_mean must be > 0");
  const double sample_rate = bank.config().sample_rate;
  const auto n = sample_count(duration, sample_rate);

  std::mt19937_64 rng = seeded_rng(seed, 0x5E1Eu, 0xC7u);
  std::uniform_int_distribution<int> pick_kernel(1, bank.config().num_kernels);
  std::exponential_distribution<double> pick_amplitude(1.0 / amplitude_mean);

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  std::vector<Code> codes;
  constexpr int kMaxAttempts = 1000;
  for (int i = 0; i < count; ++i) {
    int m = 0;
    std::int64_t tau = 0;
    std::int64_t len = 0;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      m = pick_kernel(rng);
      len = static_cast<std::int64_t>(bank.kernel(m).length());
      if (len > n) continue;
      tau = std::uniform_int_distribution<std::int64_t>(0, n - len)(rng);
      placed = true;
      if (non_overlapping) {
        for (const auto& span : spans) {
          if (tau < span.second && span.first < tau + len) {
            placed = false;
            break;
          }
        }
      }
    }
    if (!placed) {
      throw ValidationError("could not place " + std::to_string(count) +
                            " non-overlapping kernel instances in " +
                            std::to_string(duration) + " s");
    }
    double amplitude = 0.0;
    do {
      amplitude = pick_amplitude(rng);
    } while (!(amplitude > 0.0));

    const Kernel& kernel = bank.kernel(m);
    for (std::int64_t u = 0; u < len; ++u) {
      x[static_cast<std::size_t>(tau + u)] +=
          amplitude * kernel.samples[static_cast<std::size_t>(u)];
    }
    spans.emplace_back(tau, tau + len);
    Code code;
    code.kernel_index = m;
    code.sample_index = tau;
    code.amplitude = amplitude;
    codes.push_back(code);
  }

  if (planted) {
    planted->insert(planted->end(), codes.begin(), codes.end());
  }
  Signal out;
  out.samples = std::move(x);
  out.sample_rate = sample_rate;
  return out;
}

}  // namespace spikecodec
