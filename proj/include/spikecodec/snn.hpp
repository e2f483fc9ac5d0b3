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

#ifndef SPIKECODEC_SNN_HPP_
#define SPIKECODEC_SNN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spikecodec/itp.hpp"

namespace spikecodec {

struct LifConfig {
  double tau_membrane = 0.020;  // seconds
  double tau_synapse = 0.005;   // seconds
  double threshold = 1.0;
};

// Time of the postsynaptic potential peak:
// (tau_m * tau_s / (tau_m - tau_s)) * ln(tau_m / tau_s).
double psp_peak_time(const LifConfig& config);

// Normalization V0 such that the kernel peaks at exactly 1.
double psp_scale(const LifConfig& config);

// PSP kernel V0 * (exp(-dt/tau_m) - exp(-dt/tau_s)) for dt > 0; 0 at and
// before dt = 0.
double psp(const LifConfig& config, double dt);

struct LifNeuron {
  LifConfig config;
  std::vector<double> weights;  // one per input channel
};

// Membrane potential at time t from all spikes strictly before t, without
// firing semantics. Exact sum; meant for analysis and tests.
double membrane_potential(const LifNeuron& neuron, const Spiketrum& spikes,
                          double t);

struct BinaryResponse {
  bool fired = false;
  double fire_time = 0.0;  // first threshold crossing, when fired
  double v_max = 0.0;      // maximum potential over the (shunted) trajectory
  double t_max = 0.0;      // time of that maximum
};

// Binary-response pass: integrate until the first threshold crossing, then
// ignore the remaining input. Event-driven and exact; inter-event extrema
// are located analytically.
BinaryResponse simulate_binary(const LifNeuron& neuron,
                               const Spiketrum& spikes);

// Threshold-reset pass: each crossing emits an output spike and clears both
// synaptic accumulators, then integration continues with later input.
std::vector<double> simulate_spikes(const LifNeuron& neuron,
                                    const Spiketrum& spikes);

// Output population partitioned into labeled groups.
struct ReadoutGroups {
  std::vector<std::string> labels;        // one per group
  std::vector<std::vector<int>> members;  // neuron indices per group
  int group_of(int neuron, int num_neurons) const;
  void validate(int num_neurons) const;
};

struct LabeledPattern {
  Spiketrum spikes;
  int label = 0;  // group index
};

struct TrainParams {
  int epochs = 200;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  // Stop once training accuracy reaches this value; > 1 never stops early.
  double target_accuracy = 2.0;
};

struct TrainResult {
  std::vector<double> epoch_accuracy;  // winner-group accuracy per epoch
  int epochs_run = 0;
};

// Binary tempotron updates: a neuron that should have fired but stayed
// silent gets w_h += lr * sum of PSPs from channel h at the time of maximal
// potential; one that fired but should not decrements likewise. Pattern
// order reshuffles every epoch from the seed.
TrainResult tempotron_train(std::vector<LifNeuron>& neurons,
                            const std::vector<LabeledPattern>& patterns,
                            const ReadoutGroups& groups,
                            const TrainParams& params);

struct Classification {
  int group = 0;
  std::string label;
  bool tie = false;  // no spikes anywhere, or equal top counts
  std::vector<std::int64_t> counts;  // readout spikes per group
};

// Winner group by total threshold-reset spike count; ties resolve to the
// smallest group index with the flag set.
Classification classify(const std::vector<LifNeuron>& neurons,
                        const ReadoutGroups& groups, const Spiketrum& spikes);

struct StaReport {
  int num_channels = 0;
  double window = 0.0;     // seconds, dt in (0, window]
  double bin_width = 0.0;  // seconds
  int bins = 0;
  std::vector<std::vector<std::int64_t>> counts;  // [channel][bin]
  std::vector<std::int64_t> channel_marginal;
  std::vector<std::int64_t> dt_marginal;
  std::int64_t total = 0;
};

// Joint histogram over (input channel, output_time - input_time) for every
// readout spike the neuron emits across the dataset. Errors if the neuron
// never fires.
StaReport spike_triggered_average(const LifNeuron& neuron,
                                  const std::vector<Spiketrum>& dataset,
                                  double window = 0.120,
                                  double bin_width = 0.010);

}  // namespace spikecodec

#endif  // SPIKECODEC_SNN_HPP_
