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

#ifndef SPIKECODEC_TYPES_HPP_
#define SPIKECODEC_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spikecodec {

// Uniformly sampled mono waveform. Samples are dimensionless amplitudes,
// nominally within [-1, 1] when sourced from PCM audio.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz, > 0

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate
                             : 0.0;
  }
};

// Sum of squared samples.
double energy(std::span<const double> samples);
inline double energy(const Signal& x) {
  return energy(std::span<const double>(x.samples));
}

}  // namespace spikecodec

#endif  // SPIKECODEC_TYPES_HPP_
