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

#ifndef SPIKECODEC_CORPUS_HPP_
#define SPIKECODEC_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spikecodec/codec.hpp"
#include "spikecodec/kernels.hpp"
#include "spikecodec/types.hpp"

namespace spikecodec {

// Deterministic synthetic sound-event generator. Every sample is a pure
// function of (class, index, seed), so evaluation runs need no external
// datasets.

struct CorpusParams {
  int num_classes = 10;       // <= corpus_class_names().size()
  int samples_per_class = 50;
  double duration = 0.4;      // seconds
  double sample_rate = 16000.0;
  std::uint64_t seed = 1;
};

struct LabeledSignal {
  Signal signal;
  int label = 0;
  std::string class_name;
  int index = 0;  // sample number within the class
};

// Ten event families: tones (low/high), a harmonic stack, up/down chirps, an
// AM tone, gated noise bursts, band noise (low/high), and a pulse-train buzz.
const std::vector<std::string>& corpus_class_names();

Signal make_sound_event(int class_id, int sample_index, double duration,
                        double sample_rate, std::uint64_t seed);

std::vector<LabeledSignal> make_corpus(const CorpusParams& params);

// Five place-separable classes (tone_low, tone_high, chirp_up, noise_bursts,
// buzz) relabeled 0..4 for the readout demo.
std::vector<LabeledSignal> make_snn_corpus(int samples_per_class,
                                           double duration,
                                           double sample_rate,
                                           std::uint64_t seed);

// Linear sweep f0 -> f1 (instantaneous frequency), constant amplitude.
Signal make_chirp(double f0, double f1, double duration, double sample_rate,
                  double amplitude);

// Interfering-talker stand-in: eight amplitude-modulated speech-band noise
// sources summed and RMS-normalized.
Signal make_babble(double duration, double sample_rate, std::uint64_t seed);

// Sum of randomly placed bank kernels with exponentially distributed
// amplitudes (mean `amplitude_mean`). With non_overlapping set, supports are
// pairwise disjoint (throws if `count` instances cannot fit). The planted
// instances are appended to *planted when given, in placement order.
Signal make_kernel_sum(const KernelBank& bank, double duration, int count,
                       std::uint64_t seed, double amplitude_mean,
                       bool non_overlapping, std::vector<Code>* planted);

}  // namespace spikecodec

#endif  // SPIKECODEC_CORPUS_HPP_
