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

#ifndef SPIKECODEC_IO_HPP_
#define SPIKECODEC_IO_HPP_

#include <string>

#include "spikecodec/codec.hpp"
#include "spikecodec/itp.hpp"
#include "spikecodec/kernels.hpp"
#include "spikecodec/snn.hpp"
#include "spikecodec/types.hpp"

namespace spikecodec::io {

// All writers go through a temp-file-plus-rename so a failure never leaves a
// partial file behind. All emitted files round-trip through their readers
// bit-exactly (doubles are printed with 17 significant digits).
void atomic_write_text(const std::string& path, const std::string& text);

// --- WAV ------------------------------------------------------------------

// Mono PCM WAV, 8/16/24-bit. Samples land in [-1, 1). Multichannel input is
// refused with a hint to mix down first.
Signal read_wav(const std::string& path);

// 16-bit PCM. Samples outside [-1, 1] clip; the return value reports how
// many did.
std::size_t write_wav(const std::string& path, const Signal& x);

// Windowed-sinc resampling to a new rate.
Signal resample(const Signal& x, double target_rate);

// --- Codes ----------------------------------------------------------------

// CSV `kernel_index,time_s,amplitude` in extraction order, plus a JSON
// sidecar at <path>.json carrying the bank fingerprint, sample rate,
// duration, and residual energy ratio (and the energy trace when present).
void write_codeset(const std::string& csv_path, const CodeSet& codes);
CodeSet read_codeset(const std::string& csv_path);

// --- Spikes ---------------------------------------------------------------

// CSV `channel,time_s` sorted by time then channel, plus a JSON sidecar at
// <path>.json with the intensity map, normalization scale, duration, and
// bank fingerprint.
void write_spiketrum(const std::string& csv_path, const Spiketrum& spikes);
Spiketrum read_spiketrum(const std::string& csv_path);

// --- Bank configuration ----------------------------------------------------

// JSON object with keys num_kernels, sample_rate, f_min, f_max, order,
// phase, envelope_cutoff.
void write_bank_config(const std::string& path, const KernelBankConfig& cfg);
KernelBankConfig read_bank_config(const std::string& path);
KernelBankConfig bank_config_from_json_text(const std::string& text);
std::string bank_config_to_json_text(const KernelBankConfig& cfg);

// --- Readout model ---------------------------------------------------------

struct ReadoutModel {
  LifConfig lif;
  std::vector<LifNeuron> neurons;
  ReadoutGroups groups;
  int num_channels = 0;
  int k_levels = 0;
  std::string bank_fingerprint;
};

void write_readout_model(const std::string& path, const ReadoutModel& model);
ReadoutModel read_readout_model(const std::string& path);

// --- STA -------------------------------------------------------------------

// CSV `channel,dt_bin,count`, channels ascending then bins ascending;
// dt_bin is 1-based, bin b covering ((b-1)*bin_width, b*bin_width].
void write_sta_csv(const std::string& path, const StaReport& report);

// --- Raster ----------------------------------------------------------------

// CSV `channel,time_s` rows for raster inspection (no sidecar).
void write_raster_csv(const std::string& path,
                      const std::vector<SpikeEvent>& events);

}  // namespace spikecodec::io

#endif  // SPIKECODEC_IO_HPP_
