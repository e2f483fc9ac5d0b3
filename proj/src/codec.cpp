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

#include "spikecodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "spikecodec/errors.hpp"
#include "spikecodec/fft.hpp"

namespace spikecodec {

namespace {

constexpr std::int64_t kBlock = 1024;

struct Pick {
  double key = -std::numeric_limits<double>::infinity();
  double value = 0.0;  // signed H at the pick
  int m = 0;           // 1-based kernel index
  std::int64_t tau = -1;
};

// Candidate ordering: larger key first, then smaller shift, then smaller
// kernel index. This makes the greedy expansion deterministic even under
// exact ties.
bool better(double key, std::int64_t tau, int m, const Pick& best) {
  if (key != best.key) return key > best.key;
  if (tau != best.tau) return tau < best.tau;
  return m < best.m;
}

class CorrelationField {
 public:
  CorrelationField(const Signal& x, const KernelBank& bank, Selection selection)
      : bank_(bank),
        selection_(selection),
        t_count_(static_cast<std::int64_t>(x.samples.size())),
        fft_(next_pow2(x.samples.size() + bank.max_kernel_length() - 1)) {
    const std::size_t nfft = fft_.length();
    std::vector<std::complex<double>> spectrum(fft_.bins());
    fft_.forward(x.samples, spectrum.data());
    const auto& kernel_spectra = bank_.spectra(nfft);

    h_.resize(bank.size());
    block_max_.resize(bank.size());
    std::vector<std::complex<double>> product(fft_.bins());
    std::vector<double> time(nfft);
    for (int m = 0; m < bank.size(); ++m) {
      for (std::size_t i = 0; i < product.size(); ++i) {
        product[i] = spectrum[i] * std::conj(kernel_spectra[m][i]);
      }
      fft_.inverse(product, time.data());
      h_[m].assign(time.begin(), time.begin() + t_count_);
      block_max_[m].assign(num_blocks(), 0.0);
      for (std::int64_t blk = 0; blk < num_blocks(); ++blk) {
        refresh_block(m, blk);
      }
    }
  }

  // Recomputes every correlation from the residual. Reference path.
  void rebuild(const std::vector<double>& residual) {
    std::vector<std::complex<double>> spectrum(fft_.bins());
    fft_.forward(residual, spectrum.data());
    const auto& kernel_spectra = bank_.spectra(fft_.length());
    std::vector<std::complex<double>> product(fft_.bins());
    std::vector<double> time(fft_.length());
    for (int m = 0; m < bank_.size(); ++m) {
      for (std::size_t i = 0; i < product.size(); ++i) {
        product[i] = spectrum[i] * std::conj(kernel_spectra[m][i]);
      }
      fft_.inverse(product, time.data());
      std::copy(time.begin(), time.begin() + t_count_, h_[m].begin());
      for (std::int64_t blk = 0; blk < num_blocks(); ++blk) {
        refresh_block(m, blk);
      }
    }
  }

  Pick best() const {
    Pick best;
    for (int m = 0; m < bank_.size(); ++m) {
      const auto& h = h_[m];
      for (std::int64_t blk = 0; blk < num_blocks(); ++blk) {
        if (block_max_[m][blk] < best.key) continue;
        const std::int64_t lo = blk * kBlock;
        const std::int64_t hi = std::min(lo + kBlock, t_count_);
        for (std::int64_t tau = lo; tau < hi; ++tau) {
          const double key = this->key(h[tau]);
          if (better(key, tau, m + 1, best)) {
            best = Pick{key, h[tau], m + 1, tau};
          }
        }
      }
    }
    return best;
  }

  // Applies the effect of subtracting s * kernel(m_star) placed at tau_star
  // (clipped at the signal end) on every correlation, using the precomputed
  // kernel pair table plus an exact correction for the clipped tail.
  void subtract(int m_star, std::int64_t tau_star, double s) {
    const KernelPairTable& table = bank_.pair_table();
    const auto& phi_star = bank_.kernel(m_star).samples;
    const auto l_star = static_cast<std::int64_t>(phi_star.size());
    const std::int64_t kept = std::min(l_star, t_count_ - tau_star);

    for (int m = 1; m <= bank_.size(); ++m) {
      auto& h = h_[m - 1];
      const auto& phi = bank_.kernel(m).samples;
      const auto l_m = static_cast<std::int64_t>(phi.size());
      const std::int64_t tau_lo = std::max<std::int64_t>(0, tau_star - l_m + 1);
      const std::int64_t tau_hi =
          std::min(t_count_ - 1, tau_star + l_star - 1);

      auto lags = table.lags(m, m_star);
      for (std::int64_t tau = tau_lo; tau <= tau_hi; ++tau) {
        h[tau] -= s * lags[tau - tau_star + l_m - 1];
      }
      // The table assumes the whole kernel was subtracted; restore the
      // contribution of samples that fell past the signal end.
      for (std::int64_t u = kept; u < l_star; ++u) {
        const double a = s * phi_star[u];
        const std::int64_t t_lo =
            std::max<std::int64_t>(0, tau_star + u - l_m + 1);
        const std::int64_t t_hi = std::min(t_count_ - 1, tau_star + u);
        for (std::int64_t tau = t_lo; tau <= t_hi; ++tau) {
          h[tau] += a * phi[u - (tau - tau_star)];
        }
      }
      for (std::int64_t blk = tau_lo / kBlock; blk <= tau_hi / kBlock; ++blk) {
        refresh_block(m - 1, blk);
      }
    }
  }

 private:
  double key(double v) const {
    return selection_ == Selection::kSigned ? v : std::abs(v);
  }

  std::int64_t num_blocks() const { return (t_count_ + kBlock - 1) / kBlock; }

  void refresh_block(int m, std::int64_t blk) {
    const std::int64_t lo = blk * kBlock;
    const std::int64_t hi = std::min(lo + kBlock, t_count_);
    double best = -std::numeric_limits<double>::infinity();
    const auto& h = h_[m];
    for (std::int64_t tau = lo; tau < hi; ++tau) {
      best = std::max(best, key(h[tau]));
    }
    block_max_[m][blk] = best;
  }

  const KernelBank& bank_;
  Selection selection_;
  std::int64_t t_count_;
  RealFft fft_;
  std::vector<std::vector<double>> h_;
  std::vector<std::vector<double>> block_max_;
};

}  // namespace

std::vector<double> cross_correlate(const Signal& x, const Kernel& kernel) {
  if (kernel.samples.size() > x.samples.size()) {
    throw ValidationError(
        "cross_correlate: kernel (" + std::to_string(kernel.samples.size()) +
        " samples) is longer than the signal (" +
        std::to_string(x.samples.size()) + " samples)");
  }
  return correlate_zero_padded(x.samples, kernel.samples);
}

CodeSet encode(const Signal& x, const KernelBank& bank,
               const EncoderParams& params) {
  if (params.max_codes < 0) {
    throw ConfigError("encode: max_codes must be >= 0");
  }
  if (params.min_energy_ratio < 0.0) {
    throw ConfigError("encode: min_energy_ratio must be >= 0");
  }
  if (params.target_spike_rate && *params.target_spike_rate < 0.0) {
    throw ConfigError("encode: target_spike_rate must be >= 0");
  }
  if (x.sample_rate != bank.config().sample_rate) {
    throw ValidationError(
        "encode: signal sample rate " + std::to_string(x.sample_rate) +
        " does not match bank sample rate " +
        std::to_string(bank.config().sample_rate));
  }
  for (double v : x.samples) {
    if (!std::isfinite(v)) {
      throw ValidationError("encode: signal contains non-finite samples");
    }
  }

  CodeSet out;
  out.sample_rate = x.sample_rate;
  out.duration = x.duration();
  out.bank_fingerprint = bank.fingerprint();

  const std::int64_t budget =
      params.target_spike_rate
          ? codes_for_rate(*params.target_spike_rate, x.duration())
          : params.max_codes;
  if (budget == 0 && params.min_energy_ratio == 0.0) {
    throw ConfigError(
        "encode: no stopping rule; set max_codes, target_spike_rate, or "
        "min_energy_ratio");
  }

  const double e0 = energy(x.samples);
  if (x.samples.empty() || e0 == 0.0) {
    out.residual_energy_ratio = 0.0;
    out.residual_energies = {e0};
    return out;
  }

  // Prefix sums of squared kernel samples give the retained norm of an
  // instance clipped at the signal end.
  std::vector<std::vector<double>> norm_prefix(bank.size());
  for (int m = 0; m < bank.size(); ++m) {
    const auto& samples = bank.kernel(m + 1).samples;
    norm_prefix[m].resize(samples.size());
    double acc = 0.0;
    for (std::size_t u = 0; u < samples.size(); ++u) {
      acc += samples[u] * samples[u];
      norm_prefix[m][u] = acc;
    }
  }

  CorrelationField field(x, bank, params.selection);
  std::vector<double> residual;
  if (params.full_recompute) residual = x.samples;

  const auto t_count = static_cast<std::int64_t>(x.samples.size());
  double e = e0;
  out.residual_energies.push_back(e0);
  while (true) {
    if (budget > 0 &&
        static_cast<std::int64_t>(out.codes.size()) >= budget) {
      break;
    }
    if (params.min_energy_ratio > 0.0 && e / e0 < params.min_energy_ratio) {
      break;
    }
    const Pick pick = field.best();
    if (!(pick.key > 0.0)) break;

    const Kernel& kernel = bank.kernel(pick.m);
    const auto length = static_cast<std::int64_t>(kernel.length());
    const std::int64_t kept = std::min(length, t_count - pick.tau);
    const double s = pick.value;
    out.codes.push_back(Code{pick.m, pick.tau, s});

    if (params.full_recompute) {
      for (std::int64_t u = 0; u < kept; ++u) {
        residual[pick.tau + u] -= s * kernel.samples[u];
      }
      e = energy(residual);
      field.rebuild(residual);
    } else {
      const double q2 = norm_prefix[pick.m - 1][kept - 1];
      e -= s * s * (2.0 - q2);
      e = std::max(e, 0.0);
      field.subtract(pick.m, pick.tau, s);
    }
    out.residual_energies.push_back(e);
  }

  out.residual_energy_ratio = std::max(e, 0.0) / e0;
  return out;
}

Signal reconstruct(const CodeSet& codes, const KernelBank& bank) {
  if (!codes.bank_fingerprint.empty() &&
      codes.bank_fingerprint != bank.fingerprint()) {
    throw ValidationError(
        "reconstruct: code set was produced with bank " +
        codes.bank_fingerprint + " but this bank is " + bank.fingerprint());
  }
  if (!(codes.sample_rate > 0.0)) {
    throw ValidationError("reconstruct: code set has no sample rate");
  }
  Signal out;
  out.sample_rate = codes.sample_rate;
  const auto t_count =
      static_cast<std::int64_t>(std::llround(codes.duration * codes.sample_rate));
  out.samples.assign(t_count, 0.0);
  for (const Code& c : codes.codes) {
    if (c.kernel_index < 1 || c.kernel_index > bank.size()) {
      throw ValidationError("reconstruct: kernel index " +
                            std::to_string(c.kernel_index) + " outside [1, " +
                            std::to_string(bank.size()) + "]");
    }
    if (c.sample_index < 0 || c.sample_index >= t_count) {
      throw ValidationError("reconstruct: sample index " +
                            std::to_string(c.sample_index) +
                            " outside the signal support [0, " +
                            std::to_string(t_count) + ")");
    }
    const auto& k = bank.kernel(c.kernel_index).samples;
    const std::int64_t kept =
        std::min<std::int64_t>(k.size(), t_count - c.sample_index);
    for (std::int64_t u = 0; u < kept; ++u) {
      out.samples[c.sample_index + u] += c.amplitude * k[u];
    }
  }
  return out;
}

double spike_rate(const CodeSet& codes) {
  if (!(codes.duration > 0.0)) return 0.0;
  return static_cast<double>(codes.codes.size()) / codes.duration;
}

std::int64_t codes_for_rate(double lambda, double duration) {
  if (lambda < 0.0) {
    throw ConfigError("codes_for_rate: spike rate must be >= 0");
  }
  if (duration < 0.0) {
    throw ConfigError("codes_for_rate: duration must be >= 0");
  }
  return std::llround(lambda * duration);
}

CodeSet prefix(const CodeSet& codes, std::size_t n) {
  if (n > codes.codes.size()) {
    throw ValidationError("prefix: asked for " + std::to_string(n) +
                          " codes but only " +
                          std::to_string(codes.codes.size()) + " are present");
  }
  if (codes.residual_energies.size() < n + 1) {
    throw ValidationError(
        "prefix: code set is missing its residual energy trace");
  }
  CodeSet out;
  out.codes.assign(codes.codes.begin(), codes.codes.begin() + n);
  out.sample_rate = codes.sample_rate;
  out.duration = codes.duration;
  out.bank_fingerprint = codes.bank_fingerprint;
  out.residual_energies.assign(codes.residual_energies.begin(),
                               codes.residual_energies.begin() + n + 1);
  const double e0 = out.residual_energies.front();
  out.residual_energy_ratio = e0 > 0.0 ? out.residual_energies.back() / e0 : 0.0;
  return out;
}

}  // namespace spikecodec
