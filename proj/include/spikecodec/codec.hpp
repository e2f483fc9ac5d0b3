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

#ifndef SPIKECODEC_CODEC_HPP_
#define SPIKECODEC_CODEC_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikecodec/kernels.hpp"
#include "spikecodec/types.hpp"

namespace spikecodec {

// One extracted component: kernel identity, placement, and projection
// amplitude. Placement is kept as an integer sample index so file round
// trips are exact; seconds are derived as sample_index / sample_rate.
struct Code {
  int kernel_index = 0;  // 1-based
  std::int64_t sample_index = 0;
  double amplitude = 0.0;
};

// Ordered result of a greedy matching-pursuit decomposition.
struct CodeSet {
  std::vector<Code> codes;  // extraction order
  double sample_rate = 0.0;
  double duration = 0.0;  // seconds of the source signal
  // ||R_final||^2 / ||x||^2; defined as 0 for empty or all-zero input.
  double residual_energy_ratio = 0.0;
  // Residual energy after 0, 1, ... subtractions. Populated by encode();
  // empty on instances read back from files unless the sidecar carried it.
  std::vector<double> residual_energies;
  std::string bank_fingerprint;

  double time_seconds(std::size_t i) const {
    return static_cast<double>(codes[i].sample_index) / sample_rate;
  }
};

enum class Selection {
  kSigned,     // argmax of H; only positive projections are extracted
  kMagnitude,  // argmax of |H|; amplitudes may be negative
};

struct EncoderParams {
  // Maximum number of codes N. Ignored when target_spike_rate is set.
  std::int64_t max_codes = 0;
  // Stop once residual energy ratio drops below this value. 0 disables the
  // energy stop so exactly N codes are emitted (unless the maximum
  // correlation goes nonpositive first).
  double min_energy_ratio = 1e-4;
  // When set, N = round(target_spike_rate * duration).
  std::optional<double> target_spike_rate;
  Selection selection = Selection::kSigned;
  // Reference path: rebuild every correlation from the residual after each
  // subtraction instead of updating incrementally. Slow; used to verify that
  // the incremental bookkeeping is behaviorally invisible.
  bool full_recompute = false;
};

// Greedy decomposition: repeatedly correlate the residual against every
// kernel at every shift in [0, T), subtract the best-matching kernel scaled
// by its projection, and record a code. Shifts past T - kernel_length
// evaluate against the zero-padded tail, and subtraction clips at the signal
// boundary. Ties resolve to the smallest shift, then the smallest kernel
// index.
CodeSet encode(const Signal& x, const KernelBank& bank,
               const EncoderParams& params);

// Sum of kernel instances, clipped to the signal support.
Signal reconstruct(const CodeSet& codes, const KernelBank& bank);

// H(tau) = sum_t x(t) * k(t - tau) for tau in [0, x.size()), computed in the
// frequency domain; x is zero past its end. The kernel must not be longer
// than the signal.
std::vector<double> cross_correlate(const Signal& x, const Kernel& kernel);

// Mean spike rate lambda = count / duration.
double spike_rate(const CodeSet& codes);

// N = round(lambda * duration).
std::int64_t codes_for_rate(double lambda, double duration);

// First n codes of a greedy decomposition, with the energy trace and ratio
// cut to match. Because extraction is greedy and deterministic, this equals
// re-encoding with max_codes = n and the same min_energy_ratio = 0.
CodeSet prefix(const CodeSet& codes, std::size_t n);

}  // namespace spikecodec

#endif  // SPIKECODEC_CODEC_HPP_
