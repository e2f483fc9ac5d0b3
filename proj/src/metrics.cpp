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

#include "spikecodec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"

namespace spikecodec {

namespace {

// Diagonal floor standing in for count discreteness. At high power the extra
// joint entropy of an exactly duplicated channel is (1/2)*ln(4*pi*e*floor),
// so this value makes a duplicate add exactly nothing.
constexpr double kDiscretenessFloor = 1.0 / (4.0 * M_PI * M_E);

std::size_t bin_count(double duration, double bin_width) {
  return static_cast<std::size_t>(std::ceil(duration / bin_width - 1e-12));
}

// Per-channel spike counts, channel-major. A spike exactly at the duration
// edge lands in the last bin.
std::vector<std::vector<double>> binned_counts(const Spiketrum& spikes,
                                               double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width must be > 0");
  if (!(spikes.duration > 0.0)) {
    throw ValidationError("pattern duration must be > 0");
  }
  if (spikes.num_channels < 1) {
    throw ValidationError("pattern must declare at least one channel");
  }
  const std::size_t bins = bin_count(spikes.duration, bin_width);
  std::vector<std::vector<double>> counts(
      static_cast<std::size_t>(spikes.num_channels),
      std::vector<double>(bins, 0.0));
  for (const SpikeEvent& e : spikes.events) {
    if (e.channel < 1 || e.channel > spikes.num_channels) {
      throw ValidationError("spike channel " + std::to_string(e.channel) +
                            " outside [1, " +
                            std::to_string(spikes.num_channels) + "]");
    }
    if (e.time < 0.0 || e.time > spikes.duration) {
      throw ValidationError("spike time " + std::to_string(e.time) +
                            " outside [0, duration]");
    }
    auto b = static_cast<std::size_t>(e.time / bin_width);
    if (b >= bins) b = bins - 1;
    counts[static_cast<std::size_t>(e.channel - 1)][b] += 1.0;
  }
  return counts;
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Mean similarity over same-label and different-label pairs (i < j), self
// pairs excluded. Missing pair classes contribute 0.
std::pair<double, double> within_among(
    const std::vector<std::vector<double>>& matrix,
    const std::vector<int>& labels, const std::vector<int>& members) {
  double within_sum = 0.0, among_sum = 0.0;
  std::size_t within_n = 0, among_n = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const int a = members[i];
      const int b = members[j];
      if (a == b) continue;  // resampled self pair
      const double s = matrix[static_cast<std::size_t>(a)]
                             [static_cast<std::size_t>(b)];
      if (labels[static_cast<std::size_t>(a)] ==
          labels[static_cast<std::size_t>(b)]) {
        within_sum += s;
        ++within_n;
      } else {
        among_sum += s;
        ++among_n;
      }
    }
  }
  return {within_n > 0 ? within_sum / static_cast<double>(within_n) : 0.0,
          among_n > 0 ? among_sum / static_cast<double>(among_n) : 0.0};
}

}  // namespace

PrecisionReport precision(const Signal& original,
                          const Signal& reconstructed) {
  if (original.samples.size() != reconstructed.samples.size()) {
    throw ValidationError("signal lengths differ: " +
                          std::to_string(original.samples.size()) + " vs " +
                          std::to_string(reconstructed.samples.size()));
  }
  if (original.sample_rate != reconstructed.sample_rate) {
    throw ValidationError("sample rates differ");
  }
  PrecisionReport report;
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const double v = original.samples[i];
    const double d = reconstructed.samples[i] - v;
    report.original_energy += v * v;
    report.error_energy += d * d;
  }
  if (!(report.original_energy > 0.0)) {
    throw ValidationError("original signal must carry nonzero energy");
  }
  report.precision = std::clamp(
      1.0 - report.error_energy / report.original_energy, 0.0, 1.0);
  return report;
}

std::vector<double> psth(const Spiketrum& spikes, double bin_width,
                         PsthMode mode) {
  const auto counts = binned_counts(spikes, bin_width);
  const std::size_t bins = counts.front().size();
  std::vector<double> rates;
  if (mode == PsthMode::kCollapsed) {
    rates.assign(bins, 0.0);
    for (const auto& channel : counts) {
      for (std::size_t b = 0; b < bins; ++b) rates[b] += channel[b];
    }
  } else {
    rates.reserve(counts.size() * bins);
    for (const auto& channel : counts) {
      rates.insert(rates.end(), channel.begin(), channel.end());
    }
  }
  for (double& r : rates) r /= bin_width;
  return rates;
}

Similarity psth_similarity(std::span<const double> a,
                           std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  Similarity out;
  if (n == 0) {
    out.degenerate = true;
    return out;
  }
  auto at = [](std::span<const double> v, std::size_t i) {
    return i < v.size() ? v[i] : 0.0;
  };
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += at(a, i);
    mean_b += at(b, i);
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = at(a, i) - mean_a;
    const double db = at(b, i) - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a <= 0.0 || var_b <= 0.0) {
    out.degenerate = true;
    return out;
  }
  out.value = cov / std::sqrt(var_a * var_b);
  return out;
}

SimilarityReport similarity_report(
    const std::vector<std::vector<double>>& rate_vectors,
    const std::vector<int>& labels) {
  if (rate_vectors.empty()) {
    throw ValidationError("similarity needs at least one pattern");
  }
  if (rate_vectors.size() != labels.size()) {
    throw ValidationError("labels must match rate vectors: " +
                          std::to_string(labels.size()) + " vs " +
                          std::to_string(rate_vectors.size()));
  }
  const std::size_t n = rate_vectors.size();
  SimilarityReport report;
  report.matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    report.matrix[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = psth_similarity(rate_vectors[i], rate_vectors[j]).value;
      report.matrix[i][j] = s;
      report.matrix[j][i] = s;
    }
  }
  std::vector<int> everyone(n);
  for (std::size_t i = 0; i < n; ++i) everyone[i] = static_cast<int>(i);
  const auto [within, among] = within_among(report.matrix, labels, everyone);
  report.within = within;
  report.among = among;
  report.overall = within - among;
  return report;
}

BootstrapSummary bootstrap_overall(const SimilarityReport& report,
                                   const std::vector<int>& labels,
                                   int resamples, std::uint64_t seed) {
  if (resamples < 1) throw ConfigError("resamples must be >= 1");
  const std::size_t n = report.matrix.size();
  if (n == 0 || labels.size() != n) {
    throw ValidationError("labels must match the similarity matrix");
  }
  std::mt19937_64 rng = seeded_rng(seed, 0xB007u);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(resamples));
  std::vector<int> members(n);
  for (int r = 0; r < resamples; ++r) {
    for (auto& m : members) m = pick(rng);
    const auto [within, among] = within_among(report.matrix, labels, members);
    values.push_back(within - among);
  }
  BootstrapSummary summary;
  for (double v : values) summary.mean += v;
  summary.mean /= static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  summary.ci_low = percentile(values, 0.025);
  summary.ci_high = percentile(values, 0.975);
  return summary;
}

EntropyReport entropy(const Spiketrum& spikes, double bin_width,
                      int window_bins) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width must be > 0");
  if (window_bins < 4) throw ConfigError("window_bins must be >= 4");
  const auto counts = binned_counts(spikes, bin_width);
  const std::size_t bins = counts.front().size();
  const auto window = static_cast<std::size_t>(window_bins);
  const std::size_t hop = window / 2;
  if (bins < window + hop) {
    throw ValidationError(
        "pattern too short for spectral entropy: need at least " +
        std::to_string(entropy_min_duration(bin_width, window_bins)) +
        " s at this binning");
  }

  // Channels kept: at least one spike and mean count variance above the
  // discreteness floor.
  std::vector<std::size_t> kept;
  for (std::size_t h = 0; h < counts.size(); ++h) {
    double total = 0.0, mean = 0.0;
    for (double c : counts[h]) mean += c;
    mean /= static_cast<double>(bins);
    for (double c : counts[h]) total += (c - mean) * (c - mean);
    const double variance = total / static_cast<double>(bins);
    if (mean > 0.0 && variance >= kDiscretenessFloor) kept.push_back(h);
  }
  EntropyReport report;
  report.channels_used = static_cast<int>(kept.size());
  report.channels_excluded =
      spikes.num_channels - static_cast<int>(kept.size());
  if (kept.empty()) return report;

  const std::size_t m = kept.size();
  std::vector<double> hann(window);
  double window_energy = 0.0;
  for (std::size_t t = 0; t < window; ++t) {
    hann[t] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) /
                                   static_cast<double>(window - 1));
    window_energy += hann[t] * hann[t];
  }

  const std::size_t freq_bins = window / 2 + 1;
  std::vector<Eigen::MatrixXcd> cross(
      freq_bins, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m),
                                        static_cast<Eigen::Index>(m)));
  RealFft fft(window);
  std::vector<double> segment(window);
  Eigen::MatrixXcd coefs(static_cast<Eigen::Index>(freq_bins),
                         static_cast<Eigen::Index>(m));
  std::size_t num_segments = 0;
  for (std::size_t start = 0; start + window <= bins; start += hop) {
    for (std::size_t c = 0; c < m; ++c) {
      const auto& channel = counts[kept[c]];
      double mean = 0.0;
      for (std::size_t t = 0; t < window; ++t) mean += channel[start + t];
      mean /= static_cast<double>(window);
      for (std::size_t t = 0; t < window; ++t) {
        segment[t] = (channel[start + t] - mean) * hann[t];
      }
      fft.forward(segment,
                  coefs.col(static_cast<Eigen::Index>(c)).data());
    }
    for (std::size_t f = 0; f < freq_bins; ++f) {
      const auto row = coefs.row(static_cast<Eigen::Index>(f));
      cross[f].noalias() += row.transpose() * row.conjugate();
    }
    ++num_segments;
  }
  const double norm =
      1.0 / (static_cast<double>(num_segments) * window_energy);

  // Mean over the full two-sided spectrum; interior one-sided bins count
  // twice. With the floor added the matrices are Hermitian positive
  // definite, so Cholesky gives the log determinant directly.
  double joint_logdet = 0.0;
  std::vector<double> channel_logspec(m, 0.0);
  for (std::size_t f = 0; f < freq_bins; ++f) {
    const bool interior = f != 0 && !(window % 2 == 0 && f == window / 2);
    const double weight = interior ? 2.0 : 1.0;
    Eigen::MatrixXcd s = cross[f] * norm;
    for (std::size_t c = 0; c < m; ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      channel_logspec[c] += weight * std::log(s(i, i).real() +
                                              kDiscretenessFloor);
      s(i, i) += kDiscretenessFloor;
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(s);
    if (llt.info() == Eigen::Success) {
      const auto l = llt.matrixLLT();
      for (Eigen::Index i = 0; i < l.rows(); ++i) {
        joint_logdet += weight * 2.0 * std::log(l(i, i).real());
      }
    } else {
      // Roundoff pushed an eigenvalue to zero; clamp at a sliver of the
      // floor rather than fail.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
      for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        joint_logdet += weight * std::log(std::max(
            eig.eigenvalues()[i], kDiscretenessFloor * 1e-9));
      }
    }
  }
  const double inv_bins = 1.0 / static_cast<double>(window);
  const double to_bits_per_second = 1.0 / (std::log(2.0) * bin_width);
  const double log_2pie = std::log(2.0 * M_PI * M_E);
  report.population = 0.5 *
                      (static_cast<double>(m) * log_2pie +
                       joint_logdet * inv_bins) *
                      to_bits_per_second;
  for (std::size_t c = 0; c < m; ++c) {
    report.per_channel_sum +=
        0.5 * (log_2pie + channel_logspec[c] * inv_bins) *
        to_bits_per_second;
  }
  if (report.per_channel_sum > 0.0) {
    report.redundancy = std::clamp(
        1.0 - report.population / report.per_channel_sum, 0.0, 1.0);
  }
  return report;
}

double entropy_min_duration(double bin_width, int window_bins) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width must be > 0");
  if (window_bins < 4) throw ConfigError("window_bins must be >= 4");
  const auto window = static_cast<std::size_t>(window_bins);
  return static_cast<double>(window + window / 2) * bin_width;
}

Signal add_noise(const Signal& x, const Signal& noise, double snr_db,
                 std::uint64_t seed) {
  if (noise.samples.size() < x.samples.size()) {
    throw ValidationError("noise must be at least as long as the signal: " +
                          std::to_string(noise.samples.size()) + " < " +
                          std::to_string(x.samples.size()));
  }
  if (x.sample_rate != noise.sample_rate) {
    throw ValidationError("noise sample rate differs from the signal");
  }
  const double signal_energy = energy(x);
  if (!(signal_energy > 0.0)) {
    throw ValidationError("signal must carry nonzero energy");
  }
  std::mt19937_64 rng = seeded_rng(seed, 0xAD0153u);
  const std::size_t offset = std::uniform_int_distribution<std::size_t>(
      0, noise.samples.size() - 1)(rng);

  Signal mixed = x;
  double noise_energy = 0.0;
  std::vector<double> segment(x.samples.size());
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    segment[t] = noise.samples[(offset + t) % noise.samples.size()];
    noise_energy += segment[t] * segment[t];
  }
  if (!(noise_energy > 0.0)) {
    throw ValidationError("noise segment carries no energy");
  }
  constexpr double kSnrCapDb = 120.0;
  const double snr = std::min(snr_db, kSnrCapDb);
  const double gain =
      std::sqrt(signal_energy / (noise_energy * std::pow(10.0, snr / 10.0)));
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    mixed.samples[t] += gain * segment[t];
  }
  return mixed;
}

}  // namespace spikecodec
