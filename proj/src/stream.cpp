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

#include "spikecodec/stream.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "spikecodec/corpus.hpp"
#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"

namespace spikecodec {

namespace {

struct Candidate {
  double key = 0.0;
  int kernel = 0;
  std::size_t shift = 0;
};

// Larger correlation wins; exact ties fall to the earlier shift, then the
// lower kernel index, matching the whole-signal encoder.
bool better(const Candidate& a, const Candidate& b) {
  if (a.key != b.key) return a.key > b.key;
  if (a.shift != b.shift) return a.shift < b.shift;
  return a.kernel < b.kernel;
}

}  // namespace

StreamResult stream_encode(const Signal& x, const KernelBank& bank,
                           const StreamConfig& config) {
  if (!(config.segment_length > 0.0)) {
    throw ConfigError("segment_length must be > 0");
  }
  if (!(config.sample_rate > 0.0)) {
    throw ConfigError("sample_rate must be > 0");
  }
  if (config.budget < 0) throw ConfigError("budget must be >= 0");
  if (config.num_kernels != bank.config().num_kernels) {
    throw ConfigError("config.num_kernels (" +
                      std::to_string(config.num_kernels) +
                      ") must match the bank (" +
                      std::to_string(bank.config().num_kernels) + ")");
  }
  // Validates k_levels / strategy / c_min before any heavy work; the real
  // map is rebuilt at end of stream so the scale covers every code.
  make_intensity_map(CodeSet{}, config.k_levels, config.strategy,
                     config.c_min);

  if (x.sample_rate != config.sample_rate) {
    throw ValidationError("signal sample rate differs from the stream config");
  }
  if (bank.config().sample_rate != config.sample_rate) {
    throw ValidationError("bank sample rate differs from the stream config");
  }
  for (double v : x.samples) {
    if (!std::isfinite(v)) {
      throw ValidationError("signal contains non-finite samples");
    }
  }

  const auto segment_samples =
      std::llround(config.segment_length * config.sample_rate);
  if (segment_samples < 1) {
    throw ConfigError("segment_length is under one sample");
  }
  // 2 kHz output cap by default.
  const std::int64_t budget =
      config.budget > 0 ? config.budget
                        : codes_for_rate(2000.0, config.segment_length);

  const std::size_t max_len = bank.max_kernel_length();
  const std::size_t needed =
      static_cast<std::size_t>(segment_samples) + max_len - 1;
  const std::size_t fft_length =
      config.fft_length != 0 ? config.fft_length : next_pow2(needed);
  if (fft_length < needed) {
    throw ConfigError("fft_length " + std::to_string(fft_length) +
                      " too small: need >= " + std::to_string(needed));
  }

  const auto& spectra = bank.spectra(fft_length);
  const int num_kernels = bank.config().num_kernels;
  RealFft fft(fft_length);
  const std::size_t bins = fft.bins();
  std::vector<std::complex<double>> residual_spectrum(bins);
  std::vector<std::complex<double>> product(bins);
  std::vector<double> correlation(fft_length);

  StreamResult result;
  result.codes.bank_fingerprint = bank.fingerprint();
  result.codes.sample_rate = config.sample_rate;
  result.codes.duration = x.duration();

  const auto total = static_cast<std::int64_t>(x.samples.size());
  std::vector<double> carry(max_len, 0.0);
  std::vector<double> residual;
  for (std::int64_t start = 0; start < total; start += segment_samples) {
    const auto len = static_cast<std::size_t>(
        std::min<std::int64_t>(segment_samples, total - start));

    // Load the segment net of the reconstruction tail carried from earlier
    // segments, then advance the carry window.
    residual.assign(len, 0.0);
    const std::size_t consumed = std::min(len, carry.size());
    for (std::size_t i = 0; i < len; ++i) {
      residual[i] = x.samples[static_cast<std::size_t>(start) + i] -
                    (i < consumed ? carry[i] : 0.0);
    }
    carry.erase(carry.begin(),
                carry.begin() + static_cast<std::ptrdiff_t>(consumed));
    carry.resize(max_len, 0.0);

    SegmentStats stats;
    stats.start_sample = start;
    stats.length = static_cast<std::int64_t>(len);
    const double energy_before = energy(std::span<const double>(residual));

    for (std::int64_t iter = 0; iter < budget; ++iter) {
      // One transform of the residual per iteration; correlations integrate
      // over this segment only because the residual is zero-padded past it.
      fft.forward(residual, residual_spectrum.data());
      Candidate best;
      bool found = false;
      for (int m = 1; m <= num_kernels; ++m) {
        const auto& kernel_spectrum = spectra[static_cast<std::size_t>(m - 1)];
        for (std::size_t b = 0; b < bins; ++b) {
          product[b] = std::conj(kernel_spectrum[b]) * residual_spectrum[b];
        }
        fft.inverse(product, correlation.data());
        for (std::size_t tau = 0; tau < len; ++tau) {
          const Candidate candidate{correlation[tau], m, tau};
          if (!found || better(candidate, best)) {
            best = candidate;
            found = true;
          }
        }
      }
      if (!found || !(best.key > 0.0)) break;

      const double amplitude = best.key;
      const auto& kernel = bank.kernel(best.kernel).samples;
      for (std::size_t u = 0; u < kernel.size(); ++u) {
        const std::size_t pos = best.shift + u;
        if (pos < len) {
          residual[pos] -= amplitude * kernel[u];
        } else {
          carry[pos - len] += amplitude * kernel[u];
        }
      }
      Code code;
      code.kernel_index = best.kernel;
      code.sample_index = start + static_cast<std::int64_t>(best.shift);
      code.amplitude = amplitude;
      result.codes.codes.push_back(code);
      ++stats.codes_emitted;
    }

    const double energy_after = energy(std::span<const double>(residual));
    stats.residual_energy_ratio =
        energy_before > 0.0 ? energy_after / energy_before : 0.0;
    result.segments.push_back(stats);
  }

  const double input_energy = energy(x);
  if (input_energy > 0.0) {
    const Signal rebuilt = reconstruct(result.codes, bank);
    double error_energy = 0.0;
    for (std::size_t t = 0; t < x.samples.size(); ++t) {
      const double d = x.samples[t] - rebuilt.samples[t];
      error_energy += d * d;
    }
    result.codes.residual_energy_ratio = error_energy / input_energy;
  }

  const IntensityMap map = make_intensity_map(
      result.codes, config.k_levels, config.strategy, config.c_min);
  result.spikes = itp_encode(result.codes, map, config.num_kernels);
  return result;
}

ErrorTrace segment_error(const Signal& full, const Signal& segmented) {
  if (full.samples.size() != segmented.samples.size()) {
    throw ValidationError("reconstruction lengths differ: " +
                          std::to_string(full.samples.size()) + " vs " +
                          std::to_string(segmented.samples.size()));
  }
  if (full.sample_rate != segmented.sample_rate) {
    throw ValidationError("reconstruction sample rates differ");
  }
  ErrorTrace trace;
  trace.difference.resize(full.samples.size());
  double error_energy = 0.0;
  for (std::size_t t = 0; t < full.samples.size(); ++t) {
    const double d = full.samples[t] - segmented.samples[t];
    trace.difference[t] = d;
    trace.max_abs = std::max(trace.max_abs, std::abs(d));
    error_energy += d * d;
  }
  if (!full.samples.empty()) {
    trace.rms =
        std::sqrt(error_energy / static_cast<double>(full.samples.size()));
  }
  const double reference_energy = energy(full);
  if (reference_energy > 0.0) {
    trace.precision_gap = error_energy / reference_energy;
  } else if (error_energy > 0.0) {
    throw ValidationError("reference reconstruction carries no energy");
  }
  return trace;
}

StreamResult characteristics_raster(const StreamConfig& config) {
  KernelBankConfig bank_config;
  bank_config.num_kernels = config.num_kernels;
  bank_config.sample_rate = config.sample_rate;
  KernelBank bank{bank_config};
  const Signal chirp =
      make_chirp(20.0, 8000.0, 5.0, config.sample_rate, 0.5);
  return stream_encode(chirp, bank, config);
}

}  // namespace spikecodec
