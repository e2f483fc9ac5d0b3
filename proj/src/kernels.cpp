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

#include "spikecodec/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>

#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"
#include "spikecodec/types.hpp"

namespace spikecodec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double envelope(double t, int order, double two_pi_b) {
  return std::pow(t, order - 1) * std::exp(-two_pi_b * t);
}

// Time at which the amplitude envelope t^(n-1)*exp(-2*pi*b*t) has decayed to
// `cutoff` times its peak. The envelope is strictly decreasing past its peak
// (n-1)/(2*pi*b), so bisection converges.
double truncation_time(int order, double bandwidth, double cutoff) {
  const double two_pi_b = kTwoPi * bandwidth;
  if (order == 1) return -std::log(cutoff) / two_pi_b;
  const double t_peak = (order - 1) / two_pi_b;
  const double target = cutoff * envelope(t_peak, order, two_pi_b);
  double hi = 2.0 * t_peak;
  while (envelope(hi, order, two_pi_b) > target) hi *= 2.0;
  double lo = t_peak;
  for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (envelope(mid, order, two_pi_b) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

class Fnv1a {
 public:
  void mix(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 1099511628211ull;
    }
  }
  void mix_double(double v) { mix(&v, sizeof v); }
  void mix_int(std::int64_t v) { mix(&v, sizeof v); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

}  // namespace

double erb_bandwidth(double frequency_hz) {
  return 24.7 * (4.37 * frequency_hz / 1000.0 + 1.0);
}

double erb_rate(double frequency_hz) {
  return 21.4 * std::log10(1.0 + 4.37 * frequency_hz / 1000.0);
}

double erb_rate_inverse(double rate) {
  return (std::pow(10.0, rate / 21.4) - 1.0) * 1000.0 / 4.37;
}

double eval_gammatone(double t, double amplitude, int order, double bandwidth,
                      double frequency, double phase) {
  if (t < 0.0) return 0.0;
  return amplitude * std::pow(t, order - 1) * std::exp(-kTwoPi * bandwidth * t) *
         std::cos(kTwoPi * frequency * t + phase);
}

KernelPairTable::KernelPairTable(const std::vector<Kernel>& kernels)
    : num_kernels_(kernels.size()), table_(kernels.size() * kernels.size()) {
  const int m_count = static_cast<int>(kernels.size());
  for (int m = 0; m < m_count; ++m) {
    const auto& a = kernels[m].samples;
    const int la = static_cast<int>(a.size());
    for (int mp = m; mp < m_count; ++mp) {
      const auto& b = kernels[mp].samples;
      const int lb = static_cast<int>(b.size());
      std::vector<double> lags(la + lb - 1);
      for (int d = -(la - 1); d <= lb - 1; ++d) {
        const int u_lo = std::max(0, d);
        const int u_hi = std::min(lb - 1, d + la - 1);
        double sum = 0.0;
        for (int u = u_lo; u <= u_hi; ++u) sum += b[u] * a[u - d];
        lags[d + la - 1] = sum;
      }
      // Entry (mp, m) is the same sequence with the lag axis reversed.
      if (mp != m) {
        std::vector<double> mirrored(lags.rbegin(), lags.rend());
        table_[static_cast<std::size_t>(mp) * num_kernels_ + m] =
            std::move(mirrored);
      }
      table_[static_cast<std::size_t>(m) * num_kernels_ + mp] = std::move(lags);
    }
  }
}

struct KernelBank::Caches {
  std::mutex mutex;
  std::map<std::size_t, std::vector<std::vector<std::complex<double>>>>
      spectra;
  std::unique_ptr<KernelPairTable> pairs;
};

KernelBank::KernelBank(const KernelBankConfig& config)
    : config_(config), caches_(std::make_unique<Caches>()) {
  if (config.num_kernels < 1) {
    throw ConfigError("bank: num_kernels must be >= 1, got " +
                      std::to_string(config.num_kernels));
  }
  if (!(config.sample_rate > 0.0)) {
    throw ConfigError("bank: sample_rate must be > 0");
  }
  if (!(config.f_min > 0.0)) {
    throw ConfigError("bank: f_min must be > 0, got " +
                      std::to_string(config.f_min));
  }
  if (!(config.f_min < config.f_max)) {
    throw ConfigError("bank: f_min must be < f_max, got [" +
                      std::to_string(config.f_min) + ", " +
                      std::to_string(config.f_max) + "]");
  }
  if (!(config.f_max <= config.sample_rate / 2.0)) {
    throw ConfigError("bank: f_max must be <= sample_rate/2 = " +
                      std::to_string(config.sample_rate / 2.0) + ", got " +
                      std::to_string(config.f_max));
  }
  if (config.order < 1) {
    throw ConfigError("bank: order must be >= 1, got " +
                      std::to_string(config.order));
  }
  if (!(config.envelope_cutoff > 0.0 && config.envelope_cutoff < 1.0)) {
    throw ConfigError("bank: envelope_cutoff must be in (0, 1)");
  }
  if (!std::isfinite(config.phase)) {
    throw ConfigError("bank: phase must be finite");
  }

  const int m_count = config.num_kernels;
  const double rate_lo = erb_rate(config.f_min);
  const double rate_hi = erb_rate(config.f_max);
  kernels_.reserve(m_count);
  for (int m = 0; m < m_count; ++m) {
    const double rate =
        m_count == 1 ? rate_lo
                     : rate_lo + (rate_hi - rate_lo) * m / (m_count - 1);
    Kernel kernel;
    kernel.index = m + 1;
    kernel.center_frequency = erb_rate_inverse(rate);
    kernel.bandwidth = 1.019 * erb_bandwidth(kernel.center_frequency);
    const double t_end = truncation_time(config.order, kernel.bandwidth,
                                         config.envelope_cutoff);
    const auto length =
        static_cast<std::size_t>(t_end * config.sample_rate) + 1;
    kernel.samples.resize(length);
    for (std::size_t j = 0; j < length; ++j) {
      kernel.samples[j] =
          eval_gammatone(j / config.sample_rate, 1.0, config.order,
                         kernel.bandwidth, kernel.center_frequency,
                         config.phase);
    }
    const double norm = std::sqrt(energy(kernel.samples));
    if (!(norm > 0.0)) {
      throw ConfigError("bank: kernel " + std::to_string(kernel.index) +
                        " is degenerate (all samples ~ 0)");
    }
    for (double& v : kernel.samples) v /= norm;
    max_length_ = std::max(max_length_, length);
    kernels_.push_back(std::move(kernel));
  }

  Fnv1a hash;
  hash.mix("spikecodec.bank.v1", 18);
  hash.mix_int(config.num_kernels);
  hash.mix_int(config.order);
  hash.mix_double(config.sample_rate);
  hash.mix_double(config.f_min);
  hash.mix_double(config.f_max);
  hash.mix_double(config.phase);
  hash.mix_double(config.envelope_cutoff);
  for (const Kernel& k : kernels_) {
    hash.mix_double(k.center_frequency);
    hash.mix_double(k.bandwidth);
    hash.mix_int(static_cast<std::int64_t>(k.samples.size()));
    hash.mix(k.samples.data(), k.samples.size() * sizeof(double));
  }
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << hash.value();
  fingerprint_ = hex.str();
}

KernelBank::~KernelBank() = default;
KernelBank::KernelBank(KernelBank&&) noexcept = default;
KernelBank& KernelBank::operator=(KernelBank&&) noexcept = default;

const Kernel& KernelBank::kernel(int index) const {
  if (index < 1 || index > size()) {
    throw ValidationError("bank: kernel index " + std::to_string(index) +
                          " outside [1, " + std::to_string(size()) + "]");
  }
  return kernels_[index - 1];
}

const std::vector<std::vector<std::complex<double>>>& KernelBank::spectra(
    std::size_t fft_length) const {
  if (fft_length < max_length_) {
    throw ConfigError("bank: fft length " + std::to_string(fft_length) +
                      " shorter than longest kernel (" +
                      std::to_string(max_length_) + " samples)");
  }
  std::lock_guard<std::mutex> lock(caches_->mutex);
  auto it = caches_->spectra.find(fft_length);
  if (it == caches_->spectra.end()) {
    RealFft fft(fft_length);
    std::vector<std::vector<std::complex<double>>> spectra;
    spectra.reserve(kernels_.size());
    for (const Kernel& k : kernels_) {
      std::vector<std::complex<double>> spectrum(fft.bins());
      fft.forward(k.samples, spectrum.data());
      spectra.push_back(std::move(spectrum));
    }
    it = caches_->spectra.emplace(fft_length, std::move(spectra)).first;
  }
  return it->second;
}

const KernelPairTable& KernelBank::pair_table() const {
  std::lock_guard<std::mutex> lock(caches_->mutex);
  if (caches_->pairs == nullptr) {
    caches_->pairs = std::make_unique<KernelPairTable>(kernels_);
  }
  return *caches_->pairs;
}

}  // namespace spikecodec
