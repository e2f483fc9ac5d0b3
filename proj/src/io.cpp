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

#include "spikecodec/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "spikecodec/errors.hpp"

namespace spikecodec::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("failed reading " + path);
  return text.str();
}

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

double parse_double(const std::string& field, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw IoError(where + ": cannot parse number '" + field + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& field, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0') {
    throw IoError(where + ": cannot parse integer '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(field);
  return out;
}

// Iterates data rows of a CSV file, checking the header line first.
template <typename RowFn>
void for_each_csv_row(const std::string& path, const std::string& header,
                      RowFn&& fn) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError(path + ": expected header '" + header + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fn(split_csv_line(line), path + ":" + std::to_string(line_no));
  }
}

// --- little-endian byte helpers for WAV -------------------------------------

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::string path)
      : data_(data), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    const auto* p = bytes() + pos_;
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  std::uint16_t u16() {
    need(2);
    const auto* p = bytes() + pos_;
    pos_ += 2;
    return static_cast<std::uint16_t>(p[0] |
                                      (static_cast<std::uint16_t>(p[1]) << 8));
  }

  std::string tag() {
    need(4);
    std::string t = data_.substr(pos_, 4);
    pos_ += 4;
    return t;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const unsigned char* bytes() const {
    return reinterpret_cast<const unsigned char*>(data_.data());
  }

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw IoError(path_ + ": truncated WAV file");
    }
  }

 private:
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void atomic_write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out.good()) {
      throw IoError("failed writing " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

Signal read_wav(const std::string& path) {
  const std::string data = read_file(path);
  ByteReader reader(data, path);
  if (reader.tag() != "RIFF") throw IoError(path + ": not a RIFF file");
  reader.u32();  // overall size; trust the chunk walk instead
  if (reader.tag() != "WAVE") throw IoError(path + ": not a WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  Signal out;
  while (reader.remaining() >= 8) {
    const std::string chunk = reader.tag();
    const std::uint32_t size = reader.u32();
    if (chunk == "fmt ") {
      if (size < 16) throw IoError(path + ": fmt chunk too small");
      const std::uint16_t format = reader.u16();
      channels = reader.u16();
      rate = reader.u32();
      reader.u32();  // byte rate
      reader.u16();  // block align
      bits = reader.u16();
      reader.skip(size - 16);
      if (format != 1) {
        throw IoError(path + ": only PCM WAV is supported (format tag " +
                      std::to_string(format) + ")");
      }
      if (channels != 1) {
        throw IoError(path + ": contains " + std::to_string(channels) +
                      " channels; mix down to mono first");
      }
      if (bits != 8 && bits != 16 && bits != 24) {
        throw IoError(path + ": unsupported bit depth " +
                      std::to_string(bits));
      }
      have_fmt = true;
    } else if (chunk == "data") {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      reader.need(size);
      const std::size_t bytes_per = bits / 8;
      const std::size_t count = size / bytes_per;
      out.samples.resize(count);
      const unsigned char* p = reader.bytes() + reader.pos();
      for (std::size_t i = 0; i < count; ++i, p += bytes_per) {
        if (bits == 8) {
          out.samples[i] = (static_cast<int>(p[0]) - 128) / 128.0;
        } else if (bits == 16) {
          const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
          out.samples[i] = v / 32768.0;
        } else {
          std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
          if (v & 0x800000) v -= 0x1000000;
          out.samples[i] = v / 8388608.0;
        }
      }
      out.sample_rate = rate;
      return out;
    } else {
      reader.skip(size + (size % 2));  // chunks are word-aligned
    }
  }
  throw IoError(path + ": no data chunk found");
}

std::size_t write_wav(const std::string& path, const Signal& x) {
  if (!(x.sample_rate > 0.0)) {
    throw ValidationError("write_wav: signal has no sample rate");
  }
  std::size_t clipped = 0;
  std::string pcm;
  pcm.reserve(2 * x.samples.size());
  for (double v : x.samples) {
    if (v < -1.0 || v > 1.0) ++clipped;
    auto q = static_cast<std::int64_t>(std::llround(v * 32768.0));
    q = std::min<std::int64_t>(32767, std::max<std::int64_t>(-32768, q));
    put_u16(pcm, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }

  const auto rate = static_cast<std::uint32_t>(std::llround(x.sample_rate));
  std::string out;
  out.reserve(44 + pcm.size());
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + pcm.size()));
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);        // bits
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(pcm.size()));
  out += pcm;
  atomic_write_text(path, out);
  return clipped;
}

Signal resample(const Signal& x, double target_rate) {
  if (!(target_rate > 0.0)) {
    throw ConfigError("resample: target rate must be > 0");
  }
  if (!(x.sample_rate > 0.0)) {
    throw ValidationError("resample: signal has no sample rate");
  }
  if (x.sample_rate == target_rate) return x;

  Signal out;
  out.sample_rate = target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::llround(x.samples.size() * target_rate / x.sample_rate));
  out.samples.assign(n_out, 0.0);

  // Hann-windowed sinc; the cutoff shrinks when downsampling.
  constexpr int kTaps = 32;
  const double scale = std::min(1.0, target_rate / x.sample_rate);
  const auto n_in = static_cast<std::int64_t>(x.samples.size());
  for (std::size_t j = 0; j < n_out; ++j) {
    const double center = j * x.sample_rate / target_rate;
    const auto k_lo =
        std::max<std::int64_t>(0, static_cast<std::int64_t>(center) - kTaps);
    const auto k_hi = std::min<std::int64_t>(
        n_in - 1, static_cast<std::int64_t>(center) + kTaps);
    double acc = 0.0;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const double d = center - static_cast<double>(k);
      const double u = scale * d;
      const double sinc =
          u == 0.0 ? 1.0 : std::sin(M_PI * u) / (M_PI * u);
      const double window =
          0.5 * (1.0 + std::cos(M_PI * d / (kTaps + 1)));
      acc += x.samples[k] * scale * sinc * window;
    }
    out.samples[j] = acc;
  }
  return out;
}

void write_codeset(const std::string& csv_path, const CodeSet& codes) {
  std::string csv = "kernel_index,time_s,amplitude\n";
  for (const Code& c : codes.codes) {
    csv += std::to_string(c.kernel_index);
    csv += ',';
    csv += fmt(static_cast<double>(c.sample_index) / codes.sample_rate);
    csv += ',';
    csv += fmt(c.amplitude);
    csv += '\n';
  }
  json sidecar;
  sidecar["format"] = "spikecodec-codes-v1";
  sidecar["bank_fingerprint"] = codes.bank_fingerprint;
  sidecar["sample_rate"] = codes.sample_rate;
  sidecar["duration"] = codes.duration;
  sidecar["residual_energy_ratio"] = codes.residual_energy_ratio;
  if (!codes.residual_energies.empty()) {
    sidecar["residual_energies"] = codes.residual_energies;
  }
  atomic_write_text(csv_path, csv);
  atomic_write_text(csv_path + ".json", sidecar.dump(2) + "\n");
}

CodeSet read_codeset(const std::string& csv_path) {
  const json sidecar = parse_json_file(csv_path + ".json");
  CodeSet out;
  try {
    if (sidecar.at("format") != "spikecodec-codes-v1") {
      throw IoError(csv_path + ".json: not a code set sidecar");
    }
    out.bank_fingerprint = sidecar.at("bank_fingerprint").get<std::string>();
    out.sample_rate = sidecar.at("sample_rate").get<double>();
    out.duration = sidecar.at("duration").get<double>();
    out.residual_energy_ratio =
        sidecar.at("residual_energy_ratio").get<double>();
    if (sidecar.contains("residual_energies")) {
      out.residual_energies =
          sidecar.at("residual_energies").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw IoError(csv_path + ".json: " + e.what());
  }
  if (!(out.sample_rate > 0.0)) {
    throw ValidationError(csv_path + ".json: sample_rate must be > 0");
  }

  for_each_csv_row(
      csv_path, "kernel_index,time_s,amplitude",
      [&](const std::vector<std::string>& fields, const std::string& where) {
        if (fields.size() != 3) {
          throw IoError(where + ": expected 3 fields, got " +
                        std::to_string(fields.size()));
        }
        Code c;
        c.kernel_index = static_cast<int>(parse_int(fields[0], where));
        c.sample_index =
            std::llround(parse_double(fields[1], where) * out.sample_rate);
        c.amplitude = parse_double(fields[2], where);
        if (c.kernel_index < 1) {
          throw ValidationError(where + ": kernel index must be >= 1");
        }
        if (c.sample_index < 0) {
          throw ValidationError(where + ": negative spike time");
        }
        out.codes.push_back(c);
      });
  return out;
}

namespace {

json intensity_map_to_json(const IntensityMap& map) {
  json j;
  j["k_levels"] = map.k_levels;
  j["strategy"] =
      map.strategy == IntensityStrategy::kLinear ? "linear" : "log";
  j["c_min"] = map.c_min;
  j["levels"] = map.levels;
  j["normalization_scale"] = map.normalization_scale;
  return j;
}

IntensityMap intensity_map_from_json(const json& j) {
  IntensityMap map;
  map.k_levels = j.at("k_levels").get<int>();
  const std::string strategy = j.at("strategy").get<std::string>();
  if (strategy == "linear") {
    map.strategy = IntensityStrategy::kLinear;
  } else if (strategy == "log") {
    map.strategy = IntensityStrategy::kLog;
  } else {
    throw ValidationError("unknown intensity strategy '" + strategy + "'");
  }
  map.c_min = j.at("c_min").get<double>();
  map.levels = j.at("levels").get<std::vector<double>>();
  map.normalization_scale = j.at("normalization_scale").get<double>();
  if (static_cast<int>(map.levels.size()) != map.k_levels) {
    throw ValidationError("intensity map levels do not match k_levels");
  }
  return map;
}

}  // namespace

void write_spiketrum(const std::string& csv_path, const Spiketrum& spikes) {
  const bool with_signs = !spikes.signs.empty();
  std::string csv =
      with_signs ? "channel,time_s,sign\n" : "channel,time_s\n";
  for (std::size_t i = 0; i < spikes.events.size(); ++i) {
    csv += std::to_string(spikes.events[i].channel);
    csv += ',';
    csv += fmt(spikes.events[i].time);
    if (with_signs) {
      csv += ',';
      csv += std::to_string(static_cast<int>(spikes.signs[i]));
    }
    csv += '\n';
  }
  json sidecar;
  sidecar["format"] = "spikecodec-spikes-v1";
  sidecar["num_channels"] = spikes.num_channels;
  sidecar["k_levels"] = spikes.k_levels;
  sidecar["duration"] = spikes.duration;
  sidecar["sample_rate"] = spikes.sample_rate;
  sidecar["bank_fingerprint"] = spikes.bank_fingerprint;
  sidecar["intensity_map"] = intensity_map_to_json(spikes.intensity_map);
  atomic_write_text(csv_path, csv);
  atomic_write_text(csv_path + ".json", sidecar.dump(2) + "\n");
}

Spiketrum read_spiketrum(const std::string& csv_path) {
  const json sidecar = parse_json_file(csv_path + ".json");
  Spiketrum out;
  try {
    if (sidecar.at("format") != "spikecodec-spikes-v1") {
      throw IoError(csv_path + ".json: not a spike pattern sidecar");
    }
    out.num_channels = sidecar.at("num_channels").get<int>();
    out.k_levels = sidecar.at("k_levels").get<int>();
    out.duration = sidecar.at("duration").get<double>();
    out.sample_rate = sidecar.at("sample_rate").get<double>();
    out.bank_fingerprint = sidecar.at("bank_fingerprint").get<std::string>();
    out.intensity_map = intensity_map_from_json(sidecar.at("intensity_map"));
  } catch (const json::exception& e) {
    throw IoError(csv_path + ".json: " + e.what());
  }

  // The header determines whether a sign column is present.
  const std::string text = read_file(csv_path);
  const bool with_signs = text.rfind("channel,time_s,sign\n", 0) == 0;
  const std::string header =
      with_signs ? "channel,time_s,sign" : "channel,time_s";
  for_each_csv_row(
      csv_path, header,
      [&](const std::vector<std::string>& fields, const std::string& where) {
        const std::size_t expected = with_signs ? 3 : 2;
        if (fields.size() != expected) {
          throw IoError(where + ": expected " + std::to_string(expected) +
                        " fields, got " + std::to_string(fields.size()));
        }
        SpikeEvent event;
        event.channel = static_cast<int>(parse_int(fields[0], where));
        event.time = parse_double(fields[1], where);
        if (event.channel < 1 || event.channel > out.num_channels) {
          throw ValidationError(where + ": channel outside [1, " +
                                std::to_string(out.num_channels) + "]");
        }
        out.events.push_back(event);
        if (with_signs) {
          const std::int64_t sign = parse_int(fields[2], where);
          if (sign != 1 && sign != -1) {
            throw ValidationError(where + ": sign must be 1 or -1");
          }
          out.signs.push_back(static_cast<std::int8_t>(sign));
        }
      });
  return out;
}

std::string bank_config_to_json_text(const KernelBankConfig& cfg) {
  json j;
  j["num_kernels"] = cfg.num_kernels;
  j["sample_rate"] = cfg.sample_rate;
  j["f_min"] = cfg.f_min;
  j["f_max"] = cfg.f_max;
  j["order"] = cfg.order;
  j["phase"] = cfg.phase;
  j["envelope_cutoff"] = cfg.envelope_cutoff;
  return j.dump(2) + "\n";
}

KernelBankConfig bank_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed bank config JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("bank config must be a JSON object");
  }
  KernelBankConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "num_kernels") {
        if (!value.is_number_integer()) {
          throw ConfigError("bank config: num_kernels must be an integer");
        }
        cfg.num_kernels = value.get<int>();
      } else if (key == "sample_rate") {
        cfg.sample_rate = value.get<double>();
      } else if (key == "f_min") {
        cfg.f_min = value.get<double>();
      } else if (key == "f_max") {
        cfg.f_max = value.get<double>();
      } else if (key == "order") {
        if (!value.is_number_integer()) {
          throw ConfigError("bank config: order must be an integer");
        }
        cfg.order = value.get<int>();
      } else if (key == "phase") {
        cfg.phase = value.get<double>();
      } else if (key == "envelope_cutoff") {
        cfg.envelope_cutoff = value.get<double>();
      } else {
        throw ConfigError("bank config: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("bank config: bad value for '" + key + "': " +
                        e.what());
    }
  }
  return cfg;
}

void write_bank_config(const std::string& path, const KernelBankConfig& cfg) {
  atomic_write_text(path, bank_config_to_json_text(cfg));
}

KernelBankConfig read_bank_config(const std::string& path) {
  return bank_config_from_json_text(read_file(path));
}

void write_readout_model(const std::string& path, const ReadoutModel& model) {
  json j;
  j["format"] = "spikecodec-readout-v1";
  j["lif"] = {{"tau_membrane", model.lif.tau_membrane},
              {"tau_synapse", model.lif.tau_synapse},
              {"threshold", model.lif.threshold}};
  j["num_channels"] = model.num_channels;
  j["k_levels"] = model.k_levels;
  j["bank_fingerprint"] = model.bank_fingerprint;
  j["groups"] = {{"labels", model.groups.labels},
                 {"members", model.groups.members}};
  json neurons = json::array();
  for (const LifNeuron& n : model.neurons) {
    neurons.push_back({{"weights", n.weights}});
  }
  j["neurons"] = neurons;
  atomic_write_text(path, j.dump(2) + "\n");
}

ReadoutModel read_readout_model(const std::string& path) {
  const json j = parse_json_file(path);
  ReadoutModel model;
  try {
    if (j.at("format") != "spikecodec-readout-v1") {
      throw IoError(path + ": not a readout model file");
    }
    const json& lif = j.at("lif");
    model.lif.tau_membrane = lif.at("tau_membrane").get<double>();
    model.lif.tau_synapse = lif.at("tau_synapse").get<double>();
    model.lif.threshold = lif.at("threshold").get<double>();
    model.num_channels = j.at("num_channels").get<int>();
    model.k_levels = j.at("k_levels").get<int>();
    model.bank_fingerprint = j.at("bank_fingerprint").get<std::string>();
    model.groups.labels =
        j.at("groups").at("labels").get<std::vector<std::string>>();
    model.groups.members =
        j.at("groups").at("members").get<std::vector<std::vector<int>>>();
    for (const json& n : j.at("neurons")) {
      LifNeuron neuron;
      neuron.config = model.lif;
      neuron.weights = n.at("weights").get<std::vector<double>>();
      model.neurons.push_back(std::move(neuron));
    }
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  model.groups.validate(static_cast<int>(model.neurons.size()));
  return model;
}

void write_sta_csv(const std::string& path, const StaReport& report) {
  std::string csv = "channel,dt_bin,count\n";
  for (int channel = 1; channel <= report.num_channels; ++channel) {
    for (int bin = 1; bin <= report.bins; ++bin) {
      csv += std::to_string(channel);
      csv += ',';
      csv += std::to_string(bin);
      csv += ',';
      csv += std::to_string(report.counts[channel - 1][bin - 1]);
      csv += '\n';
    }
  }
  atomic_write_text(path, csv);
}

void write_raster_csv(const std::string& path,
                      const std::vector<SpikeEvent>& events) {
  std::string csv = "channel,time_s\n";
  for (const SpikeEvent& event : events) {
    csv += std::to_string(event.channel);
    csv += ',';
    csv += fmt(event.time);
    csv += '\n';
  }
  atomic_write_text(path, csv);
}

}  // namespace spikecodec::io
