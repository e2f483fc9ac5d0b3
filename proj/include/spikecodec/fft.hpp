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

#ifndef SPIKECODEC_FFT_HPP_
#define SPIKECODEC_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spikecodec {

// Thin RAII wrapper over FFTW double-precision real transforms of a fixed
// length. Plan creation happens under a process-wide mutex (FFTW planning is
// not thread-safe); execution touches only this instance's buffers, so
// distinct instances may run concurrently. Plans use FFTW_ESTIMATE so results
// are identical from run to run.
class RealFft {
 public:
  explicit RealFft(std::size_t length);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t length() const { return length_; }
  std::size_t bins() const { return length_ / 2 + 1; }

  // Forward r2c transform. Input shorter than length() is zero-padded.
  // `out` must hold bins() values.
  void forward(std::span<const double> in, std::complex<double>* out);

  // Inverse c2r transform scaled by 1/length(). `in` must hold bins()
  // values; `out` receives length() samples.
  void inverse(std::span<const std::complex<double>> in, double* out);

 private:
  std::size_t length_;
  double* real_;     // fftw-aligned scratch, length_ samples
  void* complex_;    // fftw_complex scratch, bins() entries
  void* forward_plan_;
  void* inverse_plan_;
};

// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

// Correlation H(tau) = sum_u x[tau+u] * k[u] for tau in [0, x.size()), with x
// treated as zero past its end. Allocates its own transform; callers on a hot
// path should manage a RealFft and kernel spectra themselves.
std::vector<double> correlate_zero_padded(std::span<const double> x,
                                          std::span<const double> k);

}  // namespace spikecodec

#endif  // SPIKECODEC_FFT_HPP_
