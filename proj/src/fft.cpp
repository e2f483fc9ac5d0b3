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

#include "spikecodec/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace spikecodec {

namespace {
// FFTW plan creation and destruction share global state.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t length) : length_(length) {
  if (length_ == 0) throw std::invalid_argument("RealFft: zero length");
  real_ = fftw_alloc_real(length_);
  fftw_complex* cplx = fftw_alloc_complex(bins());
  complex_ = cplx;
  if (real_ == nullptr || cplx == nullptr) throw std::bad_alloc();
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_plan_ =
      fftw_plan_dft_r2c_1d(static_cast<int>(length_), real_, cplx,
                           FFTW_ESTIMATE);
  inverse_plan_ =
      fftw_plan_dft_c2r_1d(static_cast<int>(length_), cplx, real_,
                           FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  }
  fftw_free(real_);
  fftw_free(static_cast<fftw_complex*>(complex_));
}

void RealFft::forward(std::span<const double> in, std::complex<double>* out) {
  if (in.size() > length_) throw std::invalid_argument("RealFft: input too long");
  std::memcpy(real_, in.data(), in.size() * sizeof(double));
  std::memset(real_ + in.size(), 0, (length_ - in.size()) * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(out, complex_, bins() * sizeof(std::complex<double>));
}

void RealFft::inverse(std::span<const std::complex<double>> in, double* out) {
  if (in.size() != bins()) throw std::invalid_argument("RealFft: bad bin count");
  std::memcpy(complex_, in.data(), bins() * sizeof(std::complex<double>));
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(length_);
  for (std::size_t i = 0; i < length_; ++i) out[i] = real_[i] * scale;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> correlate_zero_padded(std::span<const double> x,
                                          std::span<const double> k) {
  if (x.empty() || k.empty()) return {};
  const std::size_t nfft = next_pow2(x.size() + k.size() - 1);
  RealFft fft(nfft);
  std::vector<std::complex<double>> sx(fft.bins());
  std::vector<std::complex<double>> sk(fft.bins());
  fft.forward(x, sx.data());
  fft.forward(k, sk.data());
  for (std::size_t i = 0; i < sx.size(); ++i) sx[i] *= std::conj(sk[i]);
  std::vector<double> full(nfft);
  fft.inverse(sx, full.data());
  full.resize(x.size());
  return full;
}

}  // namespace spikecodec
