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

#include "spikecodec/itp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikecodec/errors.hpp"

namespace spikecodec {

int IntensityMap::nearest_level(double normalized) const {
  const auto it = std::lower_bound(levels.begin(), levels.end(), normalized);
  if (it == levels.begin()) return 0;
  if (it == levels.end()) return static_cast<int>(levels.size()) - 1;
  const auto hi = static_cast<int>(it - levels.begin());
  const int lo = hi - 1;
  // <= sends exact midpoints to the smaller level.
  return normalized - levels[lo] <= levels[hi] - normalized ? lo : hi;
}

double IntensityMap::quantization_bound() const {
  double widest = 0.0;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    widest = std::max(widest, levels[i] - levels[i - 1]);
  }
  return std::max(levels.front(), widest / 2.0);
}

IntensityMap make_intensity_map(const CodeSet& codes, int k_levels,
                                IntensityStrategy strategy, double c_min) {
  if (k_levels < 1) {
    throw ConfigError("intensity map: k_levels must be >= 1, got " +
                      std::to_string(k_levels));
  }
  IntensityMap map;
  map.k_levels = k_levels;
  map.strategy = strategy;
  map.c_min = c_min;
  if (k_levels == 1) {
    map.levels = {1.0};
  } else if (strategy == IntensityStrategy::kLinear) {
    map.levels.resize(k_levels);
    for (int k = 1; k <= k_levels; ++k) {
      map.levels[k - 1] = static_cast<double>(k) / k_levels;
    }
  } else {
    if (!(c_min > 0.0 && c_min < 1.0)) {
      throw ConfigError("intensity map: c_min must be in (0, 1), got " +
                        std::to_string(c_min));
    }
    map.levels.resize(k_levels);
    const double lg_min = std::log10(c_min);
    for (int k = 1; k <= k_levels; ++k) {
      // Exponent 0 for the top level, so levels.back() == 1.0 exactly.
      map.levels[k - 1] =
          std::pow(10.0, lg_min * (k_levels - k) / (k_levels - 1));
    }
  }

  double scale = 0.0;
  for (const Code& c : codes.codes) {
    scale = std::max(scale, std::abs(c.amplitude));
  }
  map.normalization_scale = scale;
  return map;
}

Spiketrum itp_encode(const CodeSet& codes, const IntensityMap& map,
                     int num_kernels) {
  if (map.levels.empty() ||
      static_cast<int>(map.levels.size()) != map.k_levels) {
    throw ConfigError("itp_encode: intensity map is not initialized");
  }
  if (num_kernels < 1) {
    throw ConfigError("itp_encode: num_kernels must be >= 1");
  }

  Spiketrum out;
  out.num_channels = map.k_levels * num_kernels;
  out.k_levels = map.k_levels;
  out.duration = codes.duration;
  out.sample_rate = codes.sample_rate;
  out.intensity_map = map;
  out.bank_fingerprint = codes.bank_fingerprint;

  const double scale = map.normalization_scale;
  bool any_negative = false;
  std::vector<SpikeEvent> events;
  std::vector<std::int8_t> signs;
  events.reserve(codes.codes.size());
  signs.reserve(codes.codes.size());
  for (const Code& c : codes.codes) {
    if (c.kernel_index < 1 || c.kernel_index > num_kernels) {
      throw ValidationError("itp_encode: kernel index " +
                            std::to_string(c.kernel_index) + " outside [1, " +
                            std::to_string(num_kernels) + "]");
    }
    const double normalized = scale > 0.0 ? std::abs(c.amplitude) / scale : 0.0;
    const int level = map.nearest_level(normalized);
    SpikeEvent event;
    event.channel = map.k_levels * (c.kernel_index - 1) + level + 1;
    event.time = static_cast<double>(c.sample_index) / codes.sample_rate;
    events.push_back(event);
    signs.push_back(c.amplitude < 0.0 ? -1 : 1);
    any_negative = any_negative || c.amplitude < 0.0;
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (events[a].time != events[b].time) return events[a].time < events[b].time;
    if (events[a].channel != events[b].channel) {
      return events[a].channel < events[b].channel;
    }
    return signs[a] < signs[b];
  });
  out.events.reserve(events.size());
  out.signs.reserve(events.size());
  for (std::size_t i : order) {
    out.events.push_back(events[i]);
    out.signs.push_back(signs[i]);
  }
  if (!any_negative) out.signs.clear();
  return out;
}

CodeSet itp_decode(const Spiketrum& spikes) {
  const IntensityMap& map = spikes.intensity_map;
  if (map.levels.empty() ||
      static_cast<int>(map.levels.size()) != map.k_levels) {
    throw ConfigError("itp_decode: intensity map is not initialized");
  }
  CodeSet out;
  out.sample_rate = spikes.sample_rate;
  out.duration = spikes.duration;
  out.bank_fingerprint = spikes.bank_fingerprint;
  out.codes.reserve(spikes.events.size());
  for (std::size_t i = 0; i < spikes.events.size(); ++i) {
    const SpikeEvent& event = spikes.events[i];
    if (event.channel < 1 || event.channel > spikes.num_channels) {
      throw ValidationError("itp_decode: channel " +
                            std::to_string(event.channel) + " outside [1, " +
                            std::to_string(spikes.num_channels) + "]");
    }
    Code code;
    code.kernel_index = 1 + (event.channel - 1) / map.k_levels;
    const int level = (event.channel - 1) % map.k_levels;
    code.sample_index = std::llround(event.time * spikes.sample_rate);
    code.amplitude = map.levels[level] * map.normalization_scale;
    if (!spikes.signs.empty() && spikes.signs[i] < 0) {
      code.amplitude = -code.amplitude;
    }
    out.codes.push_back(code);
  }
  return out;
}

SpreadReport spike_spread(const Spiketrum& spikes) {
  SpreadReport report;
  report.per_channel.assign(spikes.num_channels, 0);
  for (const SpikeEvent& event : spikes.events) {
    if (event.channel >= 1 && event.channel <= spikes.num_channels) {
      ++report.per_channel[event.channel - 1];
    }
  }
  std::int64_t occupied = 0;
  for (std::int64_t count : report.per_channel) {
    if (count > 0) ++occupied;
  }
  report.occupancy = spikes.num_channels > 0
                         ? static_cast<double>(occupied) / spikes.num_channels
                         : 0.0;
  return report;
}

}  // namespace spikecodec
