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

#ifndef SPIKECODEC_ITP_HPP_
#define SPIKECODEC_ITP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spikecodec/codec.hpp"

namespace spikecodec {

enum class IntensityStrategy {
  kLinear,  // c_k = k / K
  kLog,     // c_k equally spaced in log10 from c_min to 1
};

// Shared quantization grid mapping normalized amplitudes to K discrete
// levels. One grid serves all kernels; channel h = K * (m - 1) + k.
struct IntensityMap {
  int k_levels = 3;
  IntensityStrategy strategy = IntensityStrategy::kLog;
  double c_min = 1e-3;           // smallest log level; unused for linear
  std::vector<double> levels;    // ascending, last element exactly 1.0
  double normalization_scale = 1.0;  // max |amplitude| of the mapped codes

  // 0-based index of the nearest level; exact distance ties resolve to the
  // smaller level.
  int nearest_level(double normalized) const;

  // Tight bound on |amplitude - decoded amplitude| / normalization_scale for
  // inputs in (0, 1]: values inside the grid miss by at most half the widest
  // adjacent gap, and values below the lowest level miss by at most
  // levels[0] itself (which exceeds half of the first gap on linear grids).
  double quantization_bound() const;
};

IntensityMap make_intensity_map(const CodeSet& codes, int k_levels,
                                IntensityStrategy strategy,
                                double c_min = 1e-3);

// Address-event spike: channel h in [1, K*M], time in seconds.
struct SpikeEvent {
  int channel = 0;
  double time = 0.0;
};

// Binary spike pattern over K*M intensity-by-kernel channels, sorted by time
// then channel. `signs` is empty when every source amplitude was positive
// (always true under signed selection); otherwise it aligns with `events`.
struct Spiketrum {
  std::vector<SpikeEvent> events;
  std::vector<std::int8_t> signs;
  int num_channels = 0;
  int k_levels = 0;
  double duration = 0.0;
  double sample_rate = 0.0;
  IntensityMap intensity_map;
  std::string bank_fingerprint;
};

// Quantize each code's amplitude onto the map and emit one spike on the
// channel addressing (kernel, level). Spike count equals code count.
Spiketrum itp_encode(const CodeSet& codes, const IntensityMap& map,
                     int num_kernels);

// Inverse addressing: m = 1 + (h-1) div K, k = 1 + (h-1) mod K, amplitude =
// levels[k-1] * normalization_scale (negated where signs say so).
CodeSet itp_decode(const Spiketrum& spikes);

struct SpreadReport {
  std::vector<std::int64_t> per_channel;  // spike counts, index = channel - 1
  double occupancy = 0.0;  // fraction of channels with at least one spike
};

SpreadReport spike_spread(const Spiketrum& spikes);

}  // namespace spikecodec

#endif  // SPIKECODEC_ITP_HPP_
