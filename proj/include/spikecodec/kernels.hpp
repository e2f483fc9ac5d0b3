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

#ifndef SPIKECODEC_KERNELS_HPP_
#define SPIKECODEC_KERNELS_HPP_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spikecodec {

// Gammatone filter-bank configuration. Center frequencies are spaced
// uniformly on the ERB-rate scale between f_min and f_max.
struct KernelBankConfig {
  int num_kernels = 40;
  double sample_rate = 16000.0;  // Hz
  double f_min = 20.0;           // Hz, lowest center frequency
  double f_max = 8000.0;         // Hz, highest center frequency; <= Nyquist
  int order = 4;                 // gammatone order n
  double phase = 0.0;            // carrier phase, radians
  // Kernel support is truncated where the amplitude envelope falls below this
  // fraction of its peak.
  double envelope_cutoff = 1e-3;
};

// One sampled gammatone kernel with unit L2 norm.
struct Kernel {
  int index = 0;                  // 1-based position in the bank
  double center_frequency = 0.0;  // Hz
  double bandwidth = 0.0;         // Hz, b = 1.019 * ERB(f)
  std::vector<double> samples;

  std::size_t length() const { return samples.size(); }
};

// Equivalent rectangular bandwidth at a given frequency (Glasberg & Moore):
// ERB(f) = 24.7 * (4.37 * f / 1000 + 1).
double erb_bandwidth(double frequency_hz);

// ERB-rate scale value for a frequency, and its inverse.
double erb_rate(double frequency_hz);
double erb_rate_inverse(double rate);

// Gammatone g(t) = a * t^(n-1) * exp(-2*pi*b*t) * cos(2*pi*f*t + phi) for
// t >= 0; 0 for t < 0 (causal impulse response).
double eval_gammatone(double t, double amplitude, int order, double bandwidth,
                      double frequency, double phase);

// Cross-correlations between every ordered kernel pair, used by the encoder
// to update correlation scores without touching the residual. Entry (m, m')
// at lag d = tau_m - tau_m' holds sum_u phi_m'(u) * phi_m(u - d), stored at
// offset d + len(m) - 1 for d in [-(len(m)-1), len(m')-1].
class KernelPairTable {
 public:
  explicit KernelPairTable(const std::vector<Kernel>& kernels);

  std::span<const double> lags(int m, int m_prime) const {
    return table_[static_cast<std::size_t>(m - 1) * num_kernels_ +
                  (m_prime - 1)];
  }

 private:
  std::size_t num_kernels_;
  std::vector<std::vector<double>> table_;
};

// Immutable gammatone bank. Safe to share across concurrent readers; the
// spectra and pair-table caches are built lazily under an internal lock.
class KernelBank {
 public:
  explicit KernelBank(const KernelBankConfig& config);
  ~KernelBank();
  KernelBank(KernelBank&&) noexcept;
  KernelBank& operator=(KernelBank&&) noexcept;
  KernelBank(const KernelBank&) = delete;
  KernelBank& operator=(const KernelBank&) = delete;

  const KernelBankConfig& config() const { return config_; }
  int size() const { return static_cast<int>(kernels_.size()); }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  // 1-based accessor matching kernel_index fields.
  const Kernel& kernel(int index) const;
  std::size_t max_kernel_length() const { return max_length_; }

  // Hash over the configuration and kernel samples; stored in emitted files
  // so decoders can refuse codes produced by a different bank.
  const std::string& fingerprint() const { return fingerprint_; }

  // Frequency-domain kernel transforms at the given length (>= longest
  // kernel), one spectrum of length/2+1 bins per kernel. Cached per length.
  const std::vector<std::vector<std::complex<double>>>& spectra(
      std::size_t fft_length) const;

  // Pairwise kernel cross-correlation table; built on first use.
  const KernelPairTable& pair_table() const;

 private:
  struct Caches;

  KernelBankConfig config_;
  std::vector<Kernel> kernels_;
  std::size_t max_length_ = 0;
  std::string fingerprint_;
  std::unique_ptr<Caches> caches_;
};

}  // namespace spikecodec

#endif  // SPIKECODEC_KERNELS_HPP_
