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
//
// Command-line surface for the sparse spike codec. Subcommands: kernels,
// encode, decode, stream, eval, train, classify, sta. A single JSON config
// file seeds every parameter; command-line flags override it. Exit codes:
// 0 success, 2 configuration error, 3 I/O error, 4 data-validation error.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spikecodec/codec.hpp"
#include "spikecodec/corpus.hpp"
#include "spikecodec/errors.hpp"
#include "spikecodec/io.hpp"
#include "spikecodec/itp.hpp"
#include "spikecodec/kernels.hpp"
#include "spikecodec/metrics.hpp"
#include "spikecodec/snn.hpp"
#include "spikecodec/stream.hpp"
#include "spikecodec/types.hpp"

namespace {

using nlohmann::json;
using namespace spikecodec;

// Doubles print with 17 significant digits so every emitted file and report
// is bit-stable across runs and round-trips through readers exactly.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

IntensityStrategy parse_strategy(const std::string& s) {
  if (s == "log") return IntensityStrategy::kLog;
  if (s == "linear") return IntensityStrategy::kLinear;
  throw ConfigError("strategy must be 'log' or 'linear', got '" + s + "'");
}

const char* strategy_name(IntensityStrategy s) {
  return s == IntensityStrategy::kLog ? "log" : "linear";
}

Selection parse_selection(const std::string& s) {
  if (s == "signed") return Selection::kSigned;
  if (s == "magnitude") return Selection::kMagnitude;
  throw ConfigError("selection must be 'signed' or 'magnitude', got '" + s +
                    "'");
}

// Every knob the config file can carry; flags overwrite fields in place.
struct RunConfig {
  KernelBankConfig bank;
  double lambda = 1000.0;        // target spike rate; 0 means unset
  std::int64_t n_spikes = 0;     // exact code budget; 0 means unset
  double min_energy_ratio = 1e-4;
  std::string selection = "signed";
  int k_levels = 3;
  std::string strategy = "log";
  double c_min = 1e-3;
  double segment_ms = 43.5;
  int budget = 0;
  double bin_width = 0.010;
  int window_bins = 8;
  std::uint64_t seed = 1;
};

void expect_keys(const json& j, const std::string& section,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown config key '" + section + item.key() + "'");
    }
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  expect_keys(j, "",
              {"bank", "encoder", "itp", "stream", "metrics", "seed"});

  RunConfig cfg;
  if (j.contains("bank")) {
    const json& b = j["bank"];
    expect_keys(b, "bank.",
                {"num_kernels", "sample_rate", "f_min", "f_max", "order",
                 "phase", "envelope_cutoff"});
    cfg.bank.num_kernels = b.value("num_kernels", cfg.bank.num_kernels);
    cfg.bank.sample_rate = b.value("sample_rate", cfg.bank.sample_rate);
    cfg.bank.f_min = b.value("f_min", cfg.bank.f_min);
    cfg.bank.f_max = b.value("f_max", cfg.bank.f_max);
    cfg.bank.order = b.value("order", cfg.bank.order);
    cfg.bank.phase = b.value("phase", cfg.bank.phase);
    cfg.bank.envelope_cutoff =
        b.value("envelope_cutoff", cfg.bank.envelope_cutoff);
  }
  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    expect_keys(e, "encoder.",
                {"lambda", "n_spikes", "min_energy_ratio", "selection"});
    cfg.lambda = e.value("lambda", cfg.lambda);
    cfg.n_spikes = e.value("n_spikes", cfg.n_spikes);
    cfg.min_energy_ratio = e.value("min_energy_ratio", cfg.min_energy_ratio);
    cfg.selection = e.value("selection", cfg.selection);
    if (e.contains("lambda") && e.contains("n_spikes") && cfg.lambda > 0.0 &&
        cfg.n_spikes > 0) {
      throw ConfigError(
          "config sets both encoder.lambda and encoder.n_spikes; choose one");
    }
    if (e.contains("n_spikes") && cfg.n_spikes > 0 && !e.contains("lambda")) {
      cfg.lambda = 0.0;
    }
  }
  if (j.contains("itp")) {
    const json& i = j["itp"];
    expect_keys(i, "itp.", {"k_levels", "strategy", "c_min"});
    cfg.k_levels = i.value("k_levels", cfg.k_levels);
    cfg.strategy = i.value("strategy", cfg.strategy);
    cfg.c_min = i.value("c_min", cfg.c_min);
  }
  if (j.contains("stream")) {
    const json& s = j["stream"];
    expect_keys(s, "stream.", {"segment_ms", "budget"});
    cfg.segment_ms = s.value("segment_ms", cfg.segment_ms);
    cfg.budget = s.value("budget", cfg.budget);
  }
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    expect_keys(m, "metrics.", {"bin_width", "window_bins"});
    cfg.bin_width = m.value("bin_width", cfg.bin_width);
    cfg.window_bins = m.value("window_bins", cfg.window_bins);
  }
  cfg.seed = j.value("seed", cfg.seed);
  parse_strategy(cfg.strategy);
  parse_selection(cfg.selection);
  return cfg;
}

// The config file must be applied before CLI11 writes flag values into the
// bound RunConfig, so the path is scanned out of argv up front.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<int> out;
  for (double v : parse_double_list(text, what)) {
    out.push_back(static_cast<int>(v));
  }
  return out;
}

EncoderParams encoder_params(const RunConfig& cfg) {
  EncoderParams p;
  p.min_energy_ratio = cfg.min_energy_ratio;
  p.selection = parse_selection(cfg.selection);
  if (cfg.lambda > 0.0) {
    p.target_spike_rate = cfg.lambda;
  } else if (cfg.n_spikes > 0) {
    p.max_codes = cfg.n_spikes;
  } else {
    throw ConfigError("no spike budget: set --lambda or --n-spikes");
  }
  return p;
}

Signal load_audio(const std::string& path, double bank_rate) {
  Signal x = io::read_wav(path);
  if (x.sample_rate != bank_rate) {
    std::cerr << "note: resampling '" << path << "' from "
              << fmt(x.sample_rate) << " Hz to " << fmt(bank_rate)
              << " Hz to match the kernel bank\n";
    x = io::resample(x, bank_rate);
  }
  return x;
}

bool ends_with_wav(const std::string& path) {
  if (path.size() < 4) return false;
  std::string tail = path.substr(path.size() - 4);
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == ".wav";
}

double trimmed_precision(const Signal& a, const Signal& b) {
  const std::size_t n = std::min(a.size(), b.size());
  Signal ta{std::vector<double>(a.samples.begin(),
                                a.samples.begin() + static_cast<long>(n)),
            a.sample_rate};
  Signal tb{std::vector<double>(b.samples.begin(),
                                b.samples.begin() + static_cast<long>(n)),
            a.sample_rate};
  return precision(ta, tb).precision;
}

// --- Option plumbing shared across subcommands ------------------------------

struct BankOpts {
  CLI::Option* rate = nullptr;
  CLI::Option* num = nullptr;
  CLI::Option* f_min = nullptr;
  CLI::Option* f_max = nullptr;
  CLI::Option* order = nullptr;
  CLI::Option* phase = nullptr;
  CLI::Option* cutoff = nullptr;
  std::string bank_path;
};

BankOpts add_bank_opts(CLI::App* cmd, RunConfig& cfg) {
  BankOpts o;
  o.rate = cmd->add_option("--rate", cfg.bank.sample_rate,
                           "bank sample rate, Hz");
  o.num = cmd->add_option("--num-kernels", cfg.bank.num_kernels,
                          "number of gammatone kernels");
  o.f_min = cmd->add_option("--f-min", cfg.bank.f_min,
                            "lowest center frequency, Hz");
  o.f_max = cmd->add_option("--f-max", cfg.bank.f_max,
                            "highest center frequency, Hz");
  o.order = cmd->add_option("--order", cfg.bank.order, "gammatone order");
  o.phase = cmd->add_option("--phase", cfg.bank.phase,
                            "carrier phase, radians");
  o.cutoff = cmd->add_option("--envelope-cutoff", cfg.bank.envelope_cutoff,
                             "envelope truncation fraction");
  cmd->add_option("--bank", o.bank_path,
                  "bank config JSON (explicit bank flags still win)");
  return o;
}

// File -> config file defaults -> JSON bank file -> explicit flags, later
// sources winning field by field.
void apply_bank_file(RunConfig& cfg, const BankOpts& o) {
  if (o.bank_path.empty()) return;
  KernelBankConfig file = io::read_bank_config(o.bank_path);
  if (!o.rate->count()) cfg.bank.sample_rate = file.sample_rate;
  if (!o.num->count()) cfg.bank.num_kernels = file.num_kernels;
  if (!o.f_min->count()) cfg.bank.f_min = file.f_min;
  if (!o.f_max->count()) cfg.bank.f_max = file.f_max;
  if (!o.order->count()) cfg.bank.order = file.order;
  if (!o.phase->count()) cfg.bank.phase = file.phase;
  if (!o.cutoff->count()) cfg.bank.envelope_cutoff = file.envelope_cutoff;
}

struct BudgetOpts {
  CLI::Option* lambda = nullptr;
  CLI::Option* n_spikes = nullptr;
};

BudgetOpts add_budget_opts(CLI::App* cmd, RunConfig& cfg) {
  BudgetOpts o;
  o.lambda = cmd->add_option("--lambda", cfg.lambda,
                             "target spike rate, Hz (codes = rate x duration)");
  o.n_spikes =
      cmd->add_option("--n-spikes", cfg.n_spikes, "exact code budget N");
  o.lambda->excludes(o.n_spikes);
  o.n_spikes->excludes(o.lambda);
  cmd->add_option("--min-energy-ratio", cfg.min_energy_ratio,
                  "stop once residual energy ratio drops below this");
  cmd->add_option("--selection", cfg.selection,
                  "projection selection: signed | magnitude");
  return o;
}

void apply_budget_flags(RunConfig& cfg, const BudgetOpts& o) {
  // An explicit --n-spikes replaces a rate budget carried by the config.
  if (o.n_spikes->count() > 0 && o.lambda->count() == 0) cfg.lambda = 0.0;
}

void add_itp_opts(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--k-levels", cfg.k_levels, "intensity levels per kernel");
  cmd->add_option("--strategy", cfg.strategy,
                  "intensity grid: log | linear");
  cmd->add_option("--c-min", cfg.c_min, "smallest log level");
}

// --- Subcommands -------------------------------------------------------------

int cmd_kernels(const RunConfig& cfg, const std::string& out_prefix) {
  KernelBank bank(cfg.bank);
  std::string freq = "index,center_frequency_hz,bandwidth_hz,length_samples\n";
  std::string wave = "kernel_index,sample_index,value\n";
  for (const Kernel& k : bank.kernels()) {
    freq += std::to_string(k.index) + "," + fmt(k.center_frequency) + "," +
            fmt(k.bandwidth) + "," + std::to_string(k.length()) + "\n";
    for (std::size_t i = 0; i < k.samples.size(); ++i) {
      wave += std::to_string(k.index) + "," + std::to_string(i) + "," +
              fmt(k.samples[i]) + "\n";
    }
  }
  io::atomic_write_text(out_prefix + ".frequencies.csv", freq);
  io::atomic_write_text(out_prefix + ".waveforms.csv", wave);
  io::write_bank_config(out_prefix + ".bank.json", cfg.bank);
  std::cout << "kernels=" << bank.size()
            << " longest=" << bank.max_kernel_length()
            << " fingerprint=" << bank.fingerprint() << "\n";
  return 0;
}

int cmd_encode(const RunConfig& cfg, const std::string& input,
               const std::string& out_prefix) {
  KernelBank bank(cfg.bank);
  Signal x = load_audio(input, cfg.bank.sample_rate);
  CodeSet codes = encode(x, bank, encoder_params(cfg));
  IntensityMap map = make_intensity_map(codes, cfg.k_levels,
                                        parse_strategy(cfg.strategy),
                                        cfg.c_min);
  Spiketrum spikes = itp_encode(codes, map, bank.size());
  io::write_codeset(out_prefix + ".codes.csv", codes);
  io::write_spiketrum(out_prefix + ".spikes.csv", spikes);
  Signal quantized = reconstruct(itp_decode(spikes), bank);
  std::cout << "lambda=" << fmt(spike_rate(codes))
            << " spikes=" << spikes.events.size()
            << " precision=" << fmt(precision(x, quantized).precision)
            << "\n";
  return 0;
}

int cmd_decode(const RunConfig& cfg, const std::string& spikes_path,
               const std::string& out_wav, const std::string& reference) {
  Spiketrum spikes = io::read_spiketrum(spikes_path);
  KernelBank bank(cfg.bank);
  if (!spikes.bank_fingerprint.empty() &&
      spikes.bank_fingerprint != bank.fingerprint()) {
    throw ValidationError(
        "bank fingerprint mismatch: spikes were produced by bank " +
        spikes.bank_fingerprint + " but the configured bank is " +
        bank.fingerprint() + "; pass the matching --bank config");
  }
  Signal y = reconstruct(itp_decode(spikes), bank);
  const std::size_t clipped = io::write_wav(out_wav, y);
  std::cout << "duration=" << fmt(y.duration()) << " samples=" << y.size()
            << " clipped=" << clipped;
  if (!reference.empty()) {
    Signal ref = load_audio(reference, cfg.bank.sample_rate);
    std::cout << " precision=" << fmt(trimmed_precision(ref, y));
  }
  std::cout << "\n";
  return 0;
}

int cmd_stream(const RunConfig& cfg, const std::string& input,
               const std::string& out_prefix, int channels) {
  RunConfig local = cfg;
  if (channels > 0) {
    if (channels % local.bank.num_kernels != 0) {
      throw ConfigError(
          "--channels must be a multiple of the kernel count (channels = "
          "K x M); got " +
          std::to_string(channels) + " over " +
          std::to_string(local.bank.num_kernels) + " kernels");
    }
    local.k_levels = channels / local.bank.num_kernels;
  }
  KernelBank bank(local.bank);
  Signal x = load_audio(input, local.bank.sample_rate);
  StreamConfig sc;
  sc.segment_length = local.segment_ms / 1000.0;
  sc.sample_rate = local.bank.sample_rate;
  sc.budget = local.budget;
  sc.k_levels = local.k_levels;
  sc.strategy = parse_strategy(local.strategy);
  sc.c_min = local.c_min;
  sc.num_kernels = local.bank.num_kernels;
  StreamResult result = stream_encode(x, bank, sc);
  io::write_codeset(out_prefix + ".codes.csv", result.codes);
  io::write_spiketrum(out_prefix + ".spikes.csv", result.spikes);
  std::string seg = "start_sample,length,codes_emitted,residual_energy_ratio\n";
  for (const SegmentStats& s : result.segments) {
    seg += std::to_string(s.start_sample) + "," + std::to_string(s.length) +
           "," + std::to_string(s.codes_emitted) + "," +
           fmt(s.residual_energy_ratio) + "\n";
  }
  io::atomic_write_text(out_prefix + ".segments.csv", seg);
  Signal quantized = reconstruct(itp_decode(result.spikes), bank);
  std::cout << "segments=" << result.segments.size()
            << " spikes=" << result.spikes.events.size()
            << " lambda=" << fmt(spike_rate(result.codes))
            << " precision=" << fmt(precision(x, quantized).precision)
            << " precision_analog="
            << fmt(1.0 - result.codes.residual_energy_ratio) << "\n";
  return 0;
}

struct EvalFlags {
  std::string input;       // optional WAV; corpus otherwise
  int classes = 10;
  int per_class = 2;
  double duration = 0.4;
  std::string lambda_list;
  double lambda_min = 250.0;
  double lambda_max = 2000.0;
  double lambda_step = 250.0;
  std::string k_list;
  std::string strategies;
  double snr_db = 0.0;
  bool snr_set = false;
  std::int64_t max_cells = 10000;
  int threads = 0;
  std::string raster_dir;
  std::string output;
};

struct EvalRow {
  std::string label;
  int index = 0;
  double lambda = 0.0;
  int k_levels = 0;
  std::string strategy;
  std::int64_t spike_count = 0;
  double rate = 0.0;
  double precision_quantized = 0.0;
  double precision_analog = 0.0;
  double quantization_bound = 0.0;
  double residual_ratio = 0.0;
};

int cmd_eval(const RunConfig& cfg, const EvalFlags& flags) {
  KernelBank bank(cfg.bank);

  std::vector<LabeledSignal> signals;
  if (!flags.input.empty()) {
    LabeledSignal s;
    s.signal = load_audio(flags.input, cfg.bank.sample_rate);
    s.label = 0;
    s.class_name = "input";
    s.index = 0;
    signals.push_back(std::move(s));
  } else {
    CorpusParams cp;
    cp.num_classes = flags.classes;
    cp.samples_per_class = flags.per_class;
    cp.duration = flags.duration;
    cp.sample_rate = cfg.bank.sample_rate;
    cp.seed = cfg.seed;
    signals = make_corpus(cp);
  }
  if (flags.snr_set) {
    for (std::size_t i = 0; i < signals.size(); ++i) {
      Signal babble =
          make_babble(signals[i].signal.duration(),
                      signals[i].signal.sample_rate,
                      cfg.seed + 1000003ull * (i + 1));
      signals[i].signal = add_noise(signals[i].signal, babble, flags.snr_db,
                                    cfg.seed + i);
    }
  }

  std::vector<double> lambdas;
  if (!flags.lambda_list.empty()) {
    lambdas = parse_double_list(flags.lambda_list, "--lambda-list");
  } else {
    if (!(flags.lambda_step > 0.0) || flags.lambda_max < flags.lambda_min) {
      throw ConfigError("bad lambda range: need step > 0 and max >= min");
    }
    for (double v = flags.lambda_min; v <= flags.lambda_max + 1e-9;
         v += flags.lambda_step) {
      lambdas.push_back(v);
    }
  }
  std::vector<int> k_list = flags.k_list.empty()
                                ? std::vector<int>{cfg.k_levels}
                                : parse_int_list(flags.k_list, "--k-list");
  std::vector<IntensityStrategy> strategies;
  if (flags.strategies.empty()) {
    strategies.push_back(parse_strategy(cfg.strategy));
  } else {
    std::stringstream ss(flags.strategies);
    std::string item;
    while (std::getline(ss, item, ',')) {
      strategies.push_back(parse_strategy(item));
    }
  }

  const std::int64_t cells =
      static_cast<std::int64_t>(signals.size()) *
      static_cast<std::int64_t>(lambdas.size()) *
      static_cast<std::int64_t>(k_list.size()) *
      static_cast<std::int64_t>(strategies.size());
  if (cells > flags.max_cells) {
    throw ConfigError(
        "evaluation grid has " + std::to_string(cells) + " cells (" +
        std::to_string(signals.size()) + " signals x " +
        std::to_string(lambdas.size()) + " rates x " +
        std::to_string(k_list.size()) + " level counts x " +
        std::to_string(strategies.size()) +
        " strategies), over the --max-cells budget of " +
        std::to_string(flags.max_cells) + "; shrink the grid or raise it");
  }

  struct Cell {
    std::size_t signal, lambda, k, strategy;
  };
  std::vector<Cell> grid;
  grid.reserve(static_cast<std::size_t>(cells));
  for (std::size_t s = 0; s < signals.size(); ++s) {
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      for (std::size_t k = 0; k < k_list.size(); ++k) {
        for (std::size_t t = 0; t < strategies.size(); ++t) {
          grid.push_back({s, l, k, t});
        }
      }
    }
  }

  std::vector<EvalRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size() || failed.load()) return;
      try {
        const Cell& cell = grid[i];
        const LabeledSignal& sig = signals[cell.signal];
        RunConfig local = cfg;
        local.lambda = lambdas[cell.lambda];
        local.n_spikes = 0;
        CodeSet codes = encode(sig.signal, bank, encoder_params(local));
        IntensityMap map =
            make_intensity_map(codes, k_list[cell.k],
                               strategies[cell.strategy], cfg.c_min);
        Spiketrum spikes = itp_encode(codes, map, bank.size());
        Signal analog = reconstruct(codes, bank);
        Signal quantized = reconstruct(itp_decode(spikes), bank);
        EvalRow& row = rows[i];
        row.label = sig.class_name;
        row.index = sig.index;
        row.lambda = lambdas[cell.lambda];
        row.k_levels = k_list[cell.k];
        row.strategy = strategy_name(strategies[cell.strategy]);
        row.spike_count = static_cast<std::int64_t>(spikes.events.size());
        row.rate = spike_rate(codes);
        row.precision_quantized =
            precision(sig.signal, quantized).precision;
        row.precision_analog = precision(sig.signal, analog).precision;
        row.quantization_bound = map.quantization_bound();
        row.residual_ratio = codes.residual_energy_ratio;
        if (!flags.raster_dir.empty()) {
          io::write_raster_csv(
              flags.raster_dir + "/raster_" + sig.class_name + "_" +
                  std::to_string(sig.index) + "_l" +
                  std::to_string(static_cast<long long>(row.lambda)) + "_k" +
                  std::to_string(row.k_levels) + "_" + row.strategy + ".csv",
              spikes.events);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = e.what();
        return;
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned requested =
      flags.threads > 0 ? static_cast<unsigned>(flags.threads)
                        : std::min(hw, 8u);
  const unsigned n_threads = static_cast<unsigned>(
      std::min<std::size_t>(requested, std::max<std::size_t>(grid.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failed.load()) throw ValidationError("evaluation failed: " + failure);

  // Single writer, cell order fixed by the grid construction above.
  std::string csv =
      "label,index,snr_db,lambda,k_levels,strategy,spike_count,rate,"
      "precision,precision_analog,quantization_bound,residual_ratio\n";
  json out_rows = json::array();
  for (const EvalRow& row : rows) {
    const std::string snr = flags.snr_set ? fmt(flags.snr_db) : "";
    csv += row.label + "," + std::to_string(row.index) + "," + snr + "," +
           fmt(row.lambda) + "," + std::to_string(row.k_levels) + "," +
           row.strategy + "," + std::to_string(row.spike_count) + "," +
           fmt(row.rate) + "," + fmt(row.precision_quantized) + "," +
           fmt(row.precision_analog) + "," + fmt(row.quantization_bound) +
           "," + fmt(row.residual_ratio) + "\n";
    json r;
    r["label"] = row.label;
    r["index"] = row.index;
    if (flags.snr_set) r["snr_db"] = flags.snr_db;
    r["lambda"] = row.lambda;
    r["k_levels"] = row.k_levels;
    r["strategy"] = row.strategy;
    r["spike_count"] = row.spike_count;
    r["rate"] = row.rate;
    r["precision"] = row.precision_quantized;
    r["precision_analog"] = row.precision_analog;
    r["quantization_bound"] = row.quantization_bound;
    r["residual_ratio"] = row.residual_ratio;
    out_rows.push_back(std::move(r));
  }
  io::atomic_write_text(flags.output, csv);
  io::atomic_write_text(flags.output + ".json", out_rows.dump(2) + "\n");
  std::cout << "cells=" << cells << " rows=" << rows.size()
            << " output=" << flags.output << "\n";
  return 0;
}

struct TrainFlags {
  int per_class = 10;
  double duration = 0.4;
  int epochs = 200;
  double learning_rate = 0.01;
  double target_accuracy = 1.0;
  double snr_db = 0.0;
  bool snr_set = false;
  int neurons_per_group = 1;
  double tau_membrane = 0.020;
  double tau_synapse = 0.005;
  double threshold = 1.0;
  std::string output;
};

std::vector<LabeledPattern> encode_patterns(
    const RunConfig& cfg, const KernelBank& bank,
    const std::vector<LabeledSignal>& corpus, bool with_noise, double snr_db) {
  std::vector<LabeledPattern> patterns;
  patterns.reserve(corpus.size());
  const EncoderParams params = encoder_params(cfg);
  const IntensityStrategy strategy = parse_strategy(cfg.strategy);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Signal x = corpus[i].signal;
    if (with_noise) {
      Signal babble = make_babble(x.duration(), x.sample_rate,
                                  cfg.seed + 1000003ull * (i + 1));
      x = add_noise(x, babble, snr_db, cfg.seed + i);
    }
    CodeSet codes = encode(x, bank, params);
    IntensityMap map =
        make_intensity_map(codes, cfg.k_levels, strategy, cfg.c_min);
    patterns.push_back({itp_encode(codes, map, bank.size()),
                        corpus[i].label});
  }
  return patterns;
}

int cmd_train(const RunConfig& cfg, const TrainFlags& flags) {
  KernelBank bank(cfg.bank);
  std::vector<LabeledSignal> corpus = make_snn_corpus(
      flags.per_class, flags.duration, cfg.bank.sample_rate, cfg.seed);
  std::vector<LabeledPattern> patterns =
      encode_patterns(cfg, bank, corpus, flags.snr_set, flags.snr_db);

  ReadoutGroups groups;
  int num_groups = 0;
  for (const LabeledSignal& s : corpus) {
    num_groups = std::max(num_groups, s.label + 1);
  }
  groups.labels.resize(static_cast<std::size_t>(num_groups));
  for (const LabeledSignal& s : corpus) {
    groups.labels[static_cast<std::size_t>(s.label)] = s.class_name;
  }
  groups.members.resize(static_cast<std::size_t>(num_groups));
  for (int g = 0; g < num_groups; ++g) {
    for (int n = 0; n < flags.neurons_per_group; ++n) {
      groups.members[static_cast<std::size_t>(g)].push_back(
          g * flags.neurons_per_group + n);
    }
  }

  const int num_channels = cfg.k_levels * bank.size();
  std::vector<LifNeuron> neurons(
      static_cast<std::size_t>(num_groups * flags.neurons_per_group));
  for (LifNeuron& n : neurons) {
    n.config.tau_membrane = flags.tau_membrane;
    n.config.tau_synapse = flags.tau_synapse;
    n.config.threshold = flags.threshold;
    // Small positive start: a flat-zero potential has no usable gradient.
    n.weights.assign(static_cast<std::size_t>(num_channels), 0.01);
  }

  TrainParams params;
  params.epochs = flags.epochs;
  params.learning_rate = flags.learning_rate;
  params.seed = cfg.seed;
  params.target_accuracy = flags.target_accuracy;
  TrainResult result = tempotron_train(neurons, patterns, groups, params);

  io::ReadoutModel model;
  model.lif = neurons.front().config;
  model.neurons = neurons;
  model.groups = groups;
  model.num_channels = num_channels;
  model.k_levels = cfg.k_levels;
  model.bank_fingerprint = bank.fingerprint();
  io::write_readout_model(flags.output + ".model.json", model);

  std::string acc = "epoch,accuracy\n";
  for (std::size_t e = 0; e < result.epoch_accuracy.size(); ++e) {
    acc += std::to_string(e + 1) + "," + fmt(result.epoch_accuracy[e]) + "\n";
  }
  io::atomic_write_text(flags.output + ".accuracy.csv", acc);

  std::cout << "epochs=" << result.epochs_run
            << " accuracy=" << fmt(result.epoch_accuracy.back())
            << " model=" << flags.output + ".model.json" << "\n";
  return 0;
}

Spiketrum load_pattern(const RunConfig& cfg, const io::ReadoutModel& model,
                       const std::string& input) {
  if (ends_with_wav(input)) {
    KernelBank bank(cfg.bank);
    if (!model.bank_fingerprint.empty() &&
        model.bank_fingerprint != bank.fingerprint()) {
      throw ValidationError(
          "bank fingerprint mismatch: model was trained with bank " +
          model.bank_fingerprint + " but the configured bank is " +
          bank.fingerprint() + "; pass the matching --bank config");
    }
    Signal x = load_audio(input, cfg.bank.sample_rate);
    CodeSet codes = encode(x, bank, encoder_params(cfg));
    IntensityMap map = make_intensity_map(
        codes, model.k_levels, parse_strategy(cfg.strategy), cfg.c_min);
    return itp_encode(codes, map, bank.size());
  }
  Spiketrum spikes = io::read_spiketrum(input);
  if (!spikes.bank_fingerprint.empty() && !model.bank_fingerprint.empty() &&
      spikes.bank_fingerprint != model.bank_fingerprint) {
    throw ValidationError(
        "bank fingerprint mismatch: spikes carry " + spikes.bank_fingerprint +
        " but the model was trained with " + model.bank_fingerprint);
  }
  return spikes;
}

int cmd_classify(const RunConfig& cfg, const std::string& model_path,
                 const std::string& input) {
  io::ReadoutModel model = io::read_readout_model(model_path);
  Spiketrum spikes = load_pattern(cfg, model, input);
  if (spikes.num_channels != model.num_channels) {
    throw ValidationError(
        "pattern has " + std::to_string(spikes.num_channels) +
        " channels but the model expects " +
        std::to_string(model.num_channels));
  }
  Classification c = classify(model.neurons, model.groups, spikes);
  std::cout << "label=" << c.label << " group=" << c.group
            << " tie=" << (c.tie ? 1 : 0) << " counts=";
  for (std::size_t g = 0; g < c.counts.size(); ++g) {
    std::cout << (g ? "," : "") << c.counts[g];
  }
  std::cout << "\n";
  return 0;
}

int cmd_sta(const RunConfig& cfg, const std::string& model_path,
            const std::vector<std::string>& inputs, int neuron_index,
            double window, double bin_width, const std::string& output) {
  io::ReadoutModel model = io::read_readout_model(model_path);
  if (neuron_index < 0 ||
      neuron_index >= static_cast<int>(model.neurons.size())) {
    throw ConfigError("--neuron " + std::to_string(neuron_index) +
                      " outside [0, " +
                      std::to_string(model.neurons.size()) + ")");
  }
  std::vector<Spiketrum> dataset;
  dataset.reserve(inputs.size());
  for (const std::string& input : inputs) {
    dataset.push_back(load_pattern(cfg, model, input));
  }
  StaReport report = spike_triggered_average(
      model.neurons[static_cast<std::size_t>(neuron_index)], dataset, window,
      bin_width);
  io::write_sta_csv(output, report);
  std::cout << "total=" << report.total << " bins=" << report.bins
            << " channels=" << report.num_channels << " output=" << output
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  }

  CLI::App app{"sparse spike codec: gammatone matching pursuit, "
               "intensity-to-place spike mapping, streaming encoder, "
               "evaluation sweeps, and a tempotron readout"};
  app.require_subcommand(1);
  std::string config_dummy;

  // kernels -------------------------------------------------------------
  CLI::App* kernels_cmd = app.add_subcommand(
      "kernels", "dump kernel waveforms and center-frequency tables as CSV");
  std::string kernels_out;
  kernels_cmd->add_option("--config", config_dummy, "JSON config file");
  kernels_cmd->add_option("-o,--output", kernels_out, "output path prefix")
      ->required();
  BankOpts kernels_bank = add_bank_opts(kernels_cmd, cfg);
  kernels_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // encode ----------------------------------------------------------------
  CLI::App* encode_cmd = app.add_subcommand(
      "encode", "decompose a WAV into codes and intensity-to-place spikes");
  std::string encode_input, encode_out;
  encode_cmd->add_option("--config", config_dummy, "JSON config file");
  encode_cmd->add_option("input", encode_input, "mono PCM WAV path")
      ->required();
  encode_cmd->add_option("-o,--output", encode_out, "output path prefix")
      ->required();
  BankOpts encode_bank = add_bank_opts(encode_cmd, cfg);
  BudgetOpts encode_budget = add_budget_opts(encode_cmd, cfg);
  add_itp_opts(encode_cmd, cfg);
  encode_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // decode ----------------------------------------------------------------
  CLI::App* decode_cmd = app.add_subcommand(
      "decode", "reconstruct a WAV from a spike file");
  std::string decode_input, decode_out, decode_reference;
  decode_cmd->add_option("--config", config_dummy, "JSON config file");
  decode_cmd->add_option("input", decode_input, "spike CSV path")->required();
  decode_cmd->add_option("-o,--output", decode_out, "output WAV path")
      ->required();
  decode_cmd->add_option("--reference", decode_reference,
                         "reference WAV for a precision report");
  BankOpts decode_bank = add_bank_opts(decode_cmd, cfg);
  decode_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // stream ----------------------------------------------------------------
  CLI::App* stream_cmd = app.add_subcommand(
      "stream", "segment-by-segment encoding with a fixed per-segment budget");
  std::string stream_input, stream_out;
  int stream_channels = 0;
  stream_cmd->add_option("--config", config_dummy, "JSON config file");
  stream_cmd->add_option("input", stream_input, "mono PCM WAV path")
      ->required();
  stream_cmd->add_option("-o,--output", stream_out, "output path prefix")
      ->required();
  stream_cmd->add_option("--segment-ms", cfg.segment_ms,
                         "segment length, milliseconds");
  stream_cmd->add_option("--budget", cfg.budget,
                         "max codes per segment (0 derives the 2 kHz cap)");
  stream_cmd->add_option("--channels", stream_channels,
                         "total output channels; k-levels = channels / "
                         "num-kernels");
  BankOpts stream_bank = add_bank_opts(stream_cmd, cfg);
  add_itp_opts(stream_cmd, cfg);
  stream_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // eval ------------------------------------------------------------------
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "sweep rates, level counts, and strategies into a long-format "
              "precision table");
  EvalFlags eval_flags;
  eval_cmd->add_option("--config", config_dummy, "JSON config file");
  eval_cmd->add_option("-o,--output", eval_flags.output, "output CSV path")
      ->required();
  eval_cmd->add_option("--input", eval_flags.input,
                       "evaluate this WAV instead of the built-in corpus");
  eval_cmd->add_option("--classes", eval_flags.classes,
                       "corpus classes (built-in corpus only)");
  eval_cmd->add_option("--per-class", eval_flags.per_class,
                       "corpus samples per class");
  eval_cmd->add_option("--duration", eval_flags.duration,
                       "corpus event duration, seconds");
  eval_cmd->add_option("--lambda-list", eval_flags.lambda_list,
                       "comma-separated spike rates (overrides the range)");
  eval_cmd->add_option("--lambda-min", eval_flags.lambda_min,
                       "lowest rate in the sweep, Hz");
  eval_cmd->add_option("--lambda-max", eval_flags.lambda_max,
                       "highest rate in the sweep, Hz");
  eval_cmd->add_option("--lambda-step", eval_flags.lambda_step,
                       "rate increment, Hz");
  eval_cmd->add_option("--k-list", eval_flags.k_list,
                       "comma-separated intensity level counts");
  eval_cmd->add_option("--strategies", eval_flags.strategies,
                       "comma-separated intensity strategies");
  CLI::Option* eval_snr = eval_cmd->add_option(
      "--snr-db", eval_flags.snr_db, "mix babble noise at this SNR first");
  eval_cmd->add_option("--max-cells", eval_flags.max_cells,
                       "refuse grids larger than this many cells");
  eval_cmd->add_option("--threads", eval_flags.threads,
                       "worker threads (0 = auto)");
  eval_cmd->add_option("--raster-dir", eval_flags.raster_dir,
                       "also write one spike raster CSV per grid cell here");
  BankOpts eval_bank = add_bank_opts(eval_cmd, cfg);
  eval_cmd->add_option("--min-energy-ratio", cfg.min_energy_ratio,
                       "stop once residual energy ratio drops below this");
  eval_cmd->add_option("--selection", cfg.selection,
                       "projection selection: signed | magnitude");
  add_itp_opts(eval_cmd, cfg);
  eval_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // train -----------------------------------------------------------------
  CLI::App* train_cmd = app.add_subcommand(
      "train", "train the tempotron readout on the built-in event corpus");
  TrainFlags train_flags;
  train_cmd->add_option("--config", config_dummy, "JSON config file");
  train_cmd->add_option("-o,--output", train_flags.output,
                        "output path prefix")
      ->required();
  train_cmd->add_option("--per-class", train_flags.per_class,
                        "training samples per class");
  train_cmd->add_option("--duration", train_flags.duration,
                        "event duration, seconds");
  train_cmd->add_option("--epochs", train_flags.epochs, "training epochs");
  train_cmd->add_option("--lr", train_flags.learning_rate, "learning rate");
  train_cmd->add_option("--target-acc", train_flags.target_accuracy,
                        "stop early at this training accuracy");
  CLI::Option* train_snr = train_cmd->add_option(
      "--snr-db", train_flags.snr_db, "mix babble noise at this SNR first");
  train_cmd->add_option("--neurons-per-group", train_flags.neurons_per_group,
                        "readout neurons per class");
  train_cmd->add_option("--tau-m", train_flags.tau_membrane,
                        "membrane time constant, seconds");
  train_cmd->add_option("--tau-s", train_flags.tau_synapse,
                        "synaptic time constant, seconds");
  train_cmd->add_option("--threshold", train_flags.threshold,
                        "firing threshold");
  BankOpts train_bank = add_bank_opts(train_cmd, cfg);
  BudgetOpts train_budget = add_budget_opts(train_cmd, cfg);
  add_itp_opts(train_cmd, cfg);
  train_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // classify --------------------------------------------------------------
  CLI::App* classify_cmd = app.add_subcommand(
      "classify", "run a trained readout on a spike file or WAV");
  std::string classify_model, classify_input;
  classify_cmd->add_option("--config", config_dummy, "JSON config file");
  classify_cmd->add_option("--model", classify_model, "model JSON path")
      ->required();
  classify_cmd
      ->add_option("input", classify_input, "spike CSV or WAV path")
      ->required();
  BankOpts classify_bank = add_bank_opts(classify_cmd, cfg);
  BudgetOpts classify_budget = add_budget_opts(classify_cmd, cfg);
  add_itp_opts(classify_cmd, cfg);
  classify_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  // sta ---------------------------------------------------------------------
  CLI::App* sta_cmd = app.add_subcommand(
      "sta", "spike-triggered average of one readout neuron over spike files");
  std::string sta_model, sta_out;
  std::vector<std::string> sta_inputs;
  int sta_neuron = 0;
  double sta_window = 0.120, sta_bin_width = 0.010;
  sta_cmd->add_option("--config", config_dummy, "JSON config file");
  sta_cmd->add_option("--model", sta_model, "model JSON path")->required();
  sta_cmd->add_option("inputs", sta_inputs, "spike CSV paths")->required();
  sta_cmd->add_option("-o,--output", sta_out, "output CSV path")->required();
  sta_cmd->add_option("--neuron", sta_neuron, "readout neuron index");
  sta_cmd->add_option("--window", sta_window, "lookback window, seconds");
  sta_cmd->add_option("--bin-width", sta_bin_width, "bin width, seconds");
  BankOpts sta_bank = add_bank_opts(sta_cmd, cfg);
  BudgetOpts sta_budget = add_budget_opts(sta_cmd, cfg);
  add_itp_opts(sta_cmd, cfg);
  sta_cmd->add_option("--seed", cfg.seed, "global RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (kernels_cmd->parsed()) {
      apply_bank_file(cfg, kernels_bank);
      return cmd_kernels(cfg, kernels_out);
    }
    if (encode_cmd->parsed()) {
      apply_bank_file(cfg, encode_bank);
      apply_budget_flags(cfg, encode_budget);
      return cmd_encode(cfg, encode_input, encode_out);
    }
    if (decode_cmd->parsed()) {
      apply_bank_file(cfg, decode_bank);
      return cmd_decode(cfg, decode_input, decode_out, decode_reference);
    }
    if (stream_cmd->parsed()) {
      apply_bank_file(cfg, stream_bank);
      return cmd_stream(cfg, stream_input, stream_out, stream_channels);
    }
    if (eval_cmd->parsed()) {
      apply_bank_file(cfg, eval_bank);
      eval_flags.snr_set = eval_snr->count() > 0;
      return cmd_eval(cfg, eval_flags);
    }
    if (train_cmd->parsed()) {
      apply_bank_file(cfg, train_bank);
      apply_budget_flags(cfg, train_budget);
      train_flags.snr_set = train_snr->count() > 0;
      return cmd_train(cfg, train_flags);
    }
    if (classify_cmd->parsed()) {
      apply_bank_file(cfg, classify_bank);
      apply_budget_flags(cfg, classify_budget);
      return cmd_classify(cfg, classify_model, classify_input);
    }
    if (sta_cmd->parsed()) {
      apply_bank_file(cfg, sta_bank);
      apply_budget_flags(cfg, sta_budget);
      return cmd_sta(cfg, sta_model, sta_inputs, sta_neuron, sta_window,
                     sta_bin_width, sta_out);
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
