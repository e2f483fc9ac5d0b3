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

#include "spikecodec/snn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spikecodec/errors.hpp"

namespace spikecodec {

namespace {

void check_config(const LifConfig& config) {
  if (!(config.tau_synapse > 0.0) ||
      !(config.tau_membrane > config.tau_synapse)) {
    throw ConfigError("LIF taus must satisfy tau_membrane > tau_synapse > 0");
  }
}

void check_neuron(const LifNeuron& neuron, const Spiketrum& spikes) {
  check_config(neuron.config);
  if (!(neuron.config.threshold > 0.0)) {
    throw ConfigError("threshold must be > 0");
  }
  if (static_cast<int>(neuron.weights.size()) < spikes.num_channels) {
    throw ValidationError("neuron has " +
                          std::to_string(neuron.weights.size()) +
                          " weights for " +
                          std::to_string(spikes.num_channels) + " channels");
  }
  for (const SpikeEvent& e : spikes.events) {
    if (e.channel < 1 || e.channel > spikes.num_channels) {
      throw ValidationError("spike channel " + std::to_string(e.channel) +
                            " outside [1, " +
                            std::to_string(spikes.num_channels) + "]");
    }
  }
}

// Input events in time order. The encoder emits them sorted already; sorting
// here keeps simulation exact for hand-built patterns too.
std::vector<SpikeEvent> sorted_events(const Spiketrum& spikes) {
  std::vector<SpikeEvent> events = spikes.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const SpikeEvent& a, const SpikeEvent& b) {
                     return a.time < b.time;
                   });
  return events;
}

// State between events: V(d) = V0 * (a * exp(-d/tau_m) - b * exp(-d/tau_s))
// for d seconds past `origin`, with every input spike at or before `origin`
// folded into the accumulators.
struct LifState {
  double a = 0.0;
  double b = 0.0;
  double origin = 0.0;
  double v0 = 0.0;
  double tau_m = 0.0;
  double tau_s = 0.0;

  explicit LifState(const LifConfig& config)
      : v0(psp_scale(config)),
        tau_m(config.tau_membrane),
        tau_s(config.tau_synapse) {}

  double value(double d) const {
    return v0 * (a * std::exp(-d / tau_m) - b * std::exp(-d / tau_s));
  }

  // Offset of the lone interior extremum, or +inf when there is none.
  double extremum() const {
    if (!(a * b > 0.0)) return std::numeric_limits<double>::infinity();
    const double ratio = (b * tau_m) / (a * tau_s);
    if (!(ratio > 0.0)) return std::numeric_limits<double>::infinity();
    return (tau_m * tau_s / (tau_m - tau_s)) * std::log(ratio);
  }

  void advance_to(double t) {
    const double d = t - origin;
    a *= std::exp(-d / tau_m);
    b *= std::exp(-d / tau_s);
    origin = t;
  }

  void add_spike(double weight) {
    a += weight;
    b += weight;
  }
};

// Earliest d in (0, horizon] with V(d) = threshold, or +inf. Assumes
// V(0) < threshold. V has at most one interior extremum, so each monotone
// piece is bisected independently, earliest first.
double first_crossing(const LifState& state, double horizon,
                      double threshold) {
  const double ext = state.extremum();
  double splits[3] = {0.0, 0.0, 0.0};
  int pieces = 0;
  if (ext > 0.0 && ext < horizon) {
    splits[0] = 0.0;
    splits[1] = ext;
    splits[2] = horizon;
    pieces = 2;
  } else {
    splits[0] = 0.0;
    splits[1] = horizon;
    pieces = 1;
  }
  for (int p = 0; p < pieces; ++p) {
    double lo = splits[p];
    double hi = splits[p + 1];
    // An unbounded piece decays toward zero, so it cannot reach a positive
    // threshold; a bounded monotone piece crosses iff its right end is over.
    if (std::isinf(hi)) continue;
    if (!(state.value(hi) >= threshold)) continue;
    for (int i = 0; i < 120; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (state.value(mid) >= threshold) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

double psp_peak_time(const LifConfig& config) {
  check_config(config);
  return (config.tau_membrane * config.tau_synapse /
          (config.tau_membrane - config.tau_synapse)) *
         std::log(config.tau_membrane / config.tau_synapse);
}

double psp_scale(const LifConfig& config) {
  const double peak = psp_peak_time(config);
  return 1.0 / (std::exp(-peak / config.tau_membrane) -
                std::exp(-peak / config.tau_synapse));
}

double psp(const LifConfig& config, double dt) {
  if (dt <= 0.0) return 0.0;
  return psp_scale(config) * (std::exp(-dt / config.tau_membrane) -
                              std::exp(-dt / config.tau_synapse));
}

double membrane_potential(const LifNeuron& neuron, const Spiketrum& spikes,
                          double t) {
  check_neuron(neuron, spikes);
  double v = 0.0;
  for (const SpikeEvent& e : spikes.events) {
    if (e.time < t) {
      v += neuron.weights[static_cast<std::size_t>(e.channel - 1)] *
           psp(neuron.config, t - e.time);
    }
  }
  return v;
}

BinaryResponse simulate_binary(const LifNeuron& neuron,
                               const Spiketrum& spikes) {
  check_neuron(neuron, spikes);
  const auto events = sorted_events(spikes);
  const double threshold = neuron.config.threshold;
  LifState state(neuron.config);

  BinaryResponse resp;  // v_max starts at V(0) = 0, t_max = 0
  const std::size_t n = events.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const double interval_end =
        i < n ? events[i].time : std::numeric_limits<double>::infinity();
    const double horizon = interval_end - state.origin;
    if (horizon > 0.0) {
      const double cross = first_crossing(state, horizon, threshold);
      const double ext = state.extremum();
      // Track the free maximum up to the crossing (or interval end).
      const double scan_end = std::min(cross, horizon);
      for (double d : {ext, scan_end}) {
        if (d > 0.0 && d <= scan_end && std::isfinite(d)) {
          const double v = state.value(d);
          if (v > resp.v_max) {
            resp.v_max = v;
            resp.t_max = state.origin + d;
          }
        }
      }
      if (std::isfinite(cross)) {
        resp.fired = true;
        resp.fire_time = state.origin + cross;
        // Shunt: drop the remaining input, let the standing PSPs play out.
        resp.v_max = threshold;
        resp.t_max = resp.fire_time;
        if (ext > cross && std::isfinite(ext)) {
          const double v = state.value(ext);
          if (v > resp.v_max) {
            resp.v_max = v;
            resp.t_max = state.origin + ext;
          }
        }
        return resp;
      }
    }
    if (i < n) {
      state.advance_to(events[i].time);
      state.add_spike(
          neuron.weights[static_cast<std::size_t>(events[i].channel - 1)]);
    }
  }
  return resp;
}

std::vector<double> simulate_spikes(const LifNeuron& neuron,
                                    const Spiketrum& spikes) {
  check_neuron(neuron, spikes);
  const auto events = sorted_events(spikes);
  const double threshold = neuron.config.threshold;
  LifState state(neuron.config);

  std::vector<double> out;
  const std::size_t n = events.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const double interval_end =
        i < n ? events[i].time : std::numeric_limits<double>::infinity();
    double horizon = interval_end - state.origin;
    while (horizon > 0.0) {
      const double cross = first_crossing(state, horizon, threshold);
      if (!std::isfinite(cross)) break;
      const double fire_time = state.origin + cross;
      out.push_back(fire_time);
      // Output spike clears both accumulators; integration resumes with
      // input arriving after the crossing.
      state.a = 0.0;
      state.b = 0.0;
      state.origin = fire_time;
      horizon = interval_end - state.origin;
    }
    if (i < n) {
      state.advance_to(events[i].time);
      state.add_spike(
          neuron.weights[static_cast<std::size_t>(events[i].channel - 1)]);
    }
  }
  return out;
}

TrainResult tempotron_train(std::vector<LifNeuron>& neurons,
                            const std::vector<LabeledPattern>& patterns,
                            const ReadoutGroups& groups,
                            const TrainParams& params) {
  if (params.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(params.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (neurons.empty()) throw ValidationError("no readout neurons");
  groups.validate(static_cast<int>(neurons.size()));
  if (patterns.empty()) throw ValidationError("no training patterns");
  const auto num_groups = static_cast<int>(groups.members.size());
  for (const LabeledPattern& p : patterns) {
    if (p.label < 0 || p.label >= num_groups) {
      throw ValidationError("pattern label " + std::to_string(p.label) +
                            " outside [0, " + std::to_string(num_groups) +
                            ")");
    }
    for (const LifNeuron& neuron : neurons) check_neuron(neuron, p.spikes);
  }

  std::seed_seq seq{static_cast<std::uint32_t>(params.seed),
                    static_cast<std::uint32_t>(params.seed >> 32),
                    std::uint32_t{0x7E3907u}};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(patterns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t p : order) {
      const LabeledPattern& pattern = patterns[p];
      for (std::size_t ni = 0; ni < neurons.size(); ++ni) {
        LifNeuron& neuron = neurons[ni];
        const bool should_fire =
            groups.group_of(static_cast<int>(ni),
                            static_cast<int>(neurons.size())) ==
            pattern.label;
        const BinaryResponse resp = simulate_binary(neuron, pattern.spikes);
        if (resp.fired == should_fire) continue;
        const double sign = should_fire ? 1.0 : -1.0;
        const double t_ref = resp.t_max;
        for (const SpikeEvent& e : pattern.spikes.events) {
          if (e.time < t_ref) {
            neuron.weights[static_cast<std::size_t>(e.channel - 1)] +=
                sign * params.learning_rate *
                psp(neuron.config, t_ref - e.time);
          }
        }
      }
    }
    int correct = 0;
    for (const LabeledPattern& pattern : patterns) {
      const Classification c = classify(neurons, groups, pattern.spikes);
      if (!c.tie && c.group == pattern.label) ++correct;
    }
    result.epoch_accuracy.push_back(static_cast<double>(correct) /
                                    static_cast<double>(patterns.size()));
    ++result.epochs_run;
    if (result.epoch_accuracy.back() >= params.target_accuracy) break;
  }
  return result;
}

Classification classify(const std::vector<LifNeuron>& neurons,
                        const ReadoutGroups& groups,
                        const Spiketrum& spikes) {
  if (neurons.empty()) throw ValidationError("no readout neurons");
  groups.validate(static_cast<int>(neurons.size()));
  Classification result;
  result.counts.assign(groups.members.size(), 0);
  for (std::size_t ni = 0; ni < neurons.size(); ++ni) {
    const int g = groups.group_of(static_cast<int>(ni),
                                  static_cast<int>(neurons.size()));
    result.counts[static_cast<std::size_t>(g)] += static_cast<std::int64_t>(
        simulate_spikes(neurons[ni], spikes).size());
  }
  std::int64_t best = result.counts[0];
  result.group = 0;
  for (std::size_t g = 1; g < result.counts.size(); ++g) {
    if (result.counts[g] > best) {
      best = result.counts[g];
      result.group = static_cast<int>(g);
    }
  }
  int top_groups = 0;
  for (std::int64_t c : result.counts) {
    if (c == best) ++top_groups;
  }
  result.tie = top_groups > 1;
  result.label = groups.labels[static_cast<std::size_t>(result.group)];
  return result;
}

StaReport spike_triggered_average(const LifNeuron& neuron,
                                  const std::vector<Spiketrum>& dataset,
                                  double window, double bin_width) {
  if (!(window > 0.0)) throw ConfigError("window must be > 0");
  if (!(bin_width > 0.0) || bin_width > window) {
    throw ConfigError("bin_width must be in (0, window]");
  }
  StaReport report;
  report.window = window;
  report.bin_width = bin_width;
  report.bins =
      static_cast<int>(std::ceil(window / bin_width - 1e-12));
  for (const Spiketrum& spikes : dataset) {
    report.num_channels = std::max(report.num_channels, spikes.num_channels);
  }
  report.counts.assign(static_cast<std::size_t>(report.num_channels),
                       std::vector<std::int64_t>(
                           static_cast<std::size_t>(report.bins), 0));
  report.channel_marginal.assign(
      static_cast<std::size_t>(report.num_channels), 0);
  report.dt_marginal.assign(static_cast<std::size_t>(report.bins), 0);

  bool ever_fired = false;
  for (const Spiketrum& spikes : dataset) {
    const std::vector<double> out = simulate_spikes(neuron, spikes);
    if (!out.empty()) ever_fired = true;
    for (double fire : out) {
      for (const SpikeEvent& e : spikes.events) {
        const double dt = fire - e.time;
        if (dt <= 0.0 || dt > window) continue;
        auto bin = static_cast<std::size_t>(dt / bin_width);
        if (bin >= static_cast<std::size_t>(report.bins)) {
          bin = static_cast<std::size_t>(report.bins) - 1;
        }
        const auto ch = static_cast<std::size_t>(e.channel - 1);
        report.counts[ch][bin] += 1;
        report.channel_marginal[ch] += 1;
        report.dt_marginal[bin] += 1;
        report.total += 1;
      }
    }
  }
  if (!ever_fired) {
    throw ValidationError(
        "spike-triggered average: the neuron never fires on this dataset");
  }
  return report;
}

int ReadoutGroups::group_of(int neuron, int num_neurons) const {
  if (neuron < 0 || neuron >= num_neurons) return -1;
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (std::find(members[g].begin(), members[g].end(), neuron) !=
        members[g].end()) {
      return static_cast<int>(g);
    }
  }
  return -1;
}

void ReadoutGroups::validate(int num_neurons) const {
  if (labels.size() != members.size()) {
    throw ValidationError("readout groups: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(members.size()) +
                          " member lists");
  }
  if (members.empty()) {
    throw ValidationError("readout groups: no groups defined");
  }
  std::vector<int> owner(num_neurons, -1);
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g].empty()) {
      throw ValidationError("readout groups: group '" + labels[g] +
                            "' has no members");
    }
    for (int neuron : members[g]) {
      if (neuron < 0 || neuron >= num_neurons) {
        throw ValidationError("readout groups: neuron " +
                              std::to_string(neuron) + " outside [0, " +
                              std::to_string(num_neurons) + ")");
      }
      if (owner[neuron] != -1) {
        throw ValidationError("readout groups: neuron " +
                              std::to_string(neuron) +
                              " belongs to more than one group");
      }
      owner[neuron] = static_cast<int>(g);
    }
  }
  for (int neuron = 0; neuron < num_neurons; ++neuron) {
    if (owner[neuron] == -1) {
      throw ValidationError("readout groups: neuron " +
                            std::to_string(neuron) + " belongs to no group");
    }
  }
}

}  // namespace spikecodec
