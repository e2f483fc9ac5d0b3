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

#ifndef SPIKECODEC_METRICS_HPP_
#define SPIKECODEC_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "spikecodec/itp.hpp"
#include "spikecodec/types.hpp"

namespace spikecodec {

struct PrecisionReport {
  double precision = 0.0;  // 1 - error_energy / original_energy, in [0, 1]
  double original_energy = 0.0;
  double error_energy = 0.0;
};

// Reconstruction precision P = 1 - ||x - xr||^2 / ||x||^2, clamped to [0, 1]
// for reporting. The original must carry nonzero energy.
PrecisionReport precision(const Signal& original, const Signal& reconstructed);

enum class PsthMode {
  kCollapsed,   // one rate vector over time, all channels pooled
  kPerChannel,  // channel-major concatenation of per-channel rate vectors
};

// Binned spike rates (counts / bin_width). ceil(duration / bin_width) bins;
// a spike exactly at the duration edge lands in the last bin.
std::vector<double> psth(const Spiketrum& spikes, double bin_width,
                         PsthMode mode = PsthMode::kPerChannel);

struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // a zero-variance input forced the 0 definition
};

// Pearson correlation between two rate vectors; the shorter one is
// zero-padded. Zero variance on either side yields 0 with the flag set.
Similarity psth_similarity(std::span<const double> a,
                           std::span<const double> b);

struct SimilarityReport {
  std::vector<std::vector<double>> matrix;  // symmetric, unit diagonal
  double within = 0.0;   // mean over same-label pairs, diagonal excluded
  double among = 0.0;    // mean over different-label pairs
  double overall = 0.0;  // within - among
};

// Pairwise PSTH similarity over labeled rate vectors.
SimilarityReport similarity_report(
    const std::vector<std::vector<double>>& rate_vectors,
    const std::vector<int>& labels);

struct BootstrapSummary {
  double mean = 0.0;
  double ci_low = 0.0;   // 2.5th percentile
  double ci_high = 0.0;  // 97.5th percentile
};

// Bootstrap distribution of (within - among) under pattern resampling with
// replacement; self-pairs introduced by duplicate draws are skipped.
BootstrapSummary bootstrap_overall(const SimilarityReport& report,
                                   const std::vector<int>& labels,
                                   int resamples, std::uint64_t seed);

struct EntropyReport {
  double per_channel_sum = 0.0;  // sum of per-channel entropy rates, bits/s
  double population = 0.0;       // joint entropy rate, bits/s
  double redundancy = 0.0;       // 1 - population / per_channel_sum, in [0,1]
  int channels_used = 0;
  int channels_excluded = 0;  // silent or below the discreteness floor
};

// Gaussian spectral entropy rates from windowed binned counts: Welch-averaged
// cross-spectral matrices (Hann, 50% overlap, `window_bins` per segment) give
// the joint rate via the mean log-determinant and per-channel rates via mean
// log spectra. A constant diagonal floor of 1/(4*pi*e) stands in for count
// discreteness; it is calibrated so a channel duplicated exactly adds no
// joint entropy, which also keeps redundancy of a duplicated pair at 1/2.
EntropyReport entropy(const Spiketrum& spikes, double bin_width,
                      int window_bins);

// Minimum pattern duration entropy() accepts for this binning.
double entropy_min_duration(double bin_width, int window_bins);

// Mix `noise` into `x` at an exact signal-to-noise ratio (dB, capped at
// 120). The noise segment starts at a seed-derived offset and wraps; it must
// be at least as long as x and carry nonzero energy.
Signal add_noise(const Signal& x, const Signal& noise, double snr_db,
                 std::uint64_t seed);

}  // namespace spikecodec

#endif  // SPIKECODEC_METRICS_HPP_
