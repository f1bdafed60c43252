#pragma once

#include "manifest.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace foley::cli {

struct Context {
  std::vector<std::string> argv;
  std::optional<std::uint64_t> env_seed;
  std::ostream& out;
  std::ostream& err;
};

struct FramingOptions {
  std::string preset;
  std::optional<int> window;
  std::optional<int> hop;
};

struct RmsExtractOptions {
  std::string input, output;
  FramingOptions framing;
  int sample_rate = 16000;
};

struct RmsQuantizeOptions {
  std::string input, output;
  int bins = 64;
};

struct RmsConvertOptions {
  std::string input, output;
};

struct RmsInterpOptions {
  std::string input, output;
  long length = 0;
};

struct RmsAblateOptions {
  std::string input, output;
  std::vector<int> bins{4, 8, 16, 32, 64, 128, 256, 512, 1024};
};

struct LabelsOptions {
  std::string input, output;
  int window = 2;
  double sigma = 1.0;
  int bins = 64;
};

struct EnvelopeSynthOptions {
  std::string output;
  std::string shape = "a";
  long length = 0;
  double peak = 1.0;
  double floor = 0.0;
  FramingOptions framing;
  int sample_rate = 16000;
};

struct EnvelopeOnsetOptions {
  std::string input, output;
  long length = 0;
  double decay = 10.0;
  FramingOptions framing;
  int sample_rate = 16000;
};

struct EnvelopeTransferOptions {
  std::string input, target, output;
  double eps = 1e-4;
  double max_gain = 100.0;
  int refine_passes = 2;
  std::string bit_depth = "float32";
};

struct DatasetOptions {
  std::string output, config;
  std::optional<int> sequences, frames, feature_dim;
  std::optional<double> event_rate, noise;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  std::string data, output, config;
  std::optional<std::string> loss;
  std::optional<int> epochs, lr_step, batch, smoothing_window, bins;
  std::optional<double> lr, momentum, sigma;
  std::optional<std::uint64_t> seed;
};

struct PredictOptions {
  std::string model, data, output;
};

struct EvalOptions {
  std::string gt, pred, output;
  bool event_frames = false;
  double threshold = 0.05;
  int bins = 64;
  std::vector<int> tolerances{2, 5, 8};
  double window_ms = 50.0;
  double tol_s = 0.1;
  double onset_threshold = 0.1;
};

struct ReportOptions {
  std::vector<std::string> run_dirs;
  std::string csv, json;
};

// Preset first, then explicit --window/--hop. Throws UsageError on invalid framing.
std::pair<int, int> resolve_framing(const FramingOptions& f);

// --seed beats FOLEY_RMS_SEED, which beats the config file.
SeedRecord resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config,
                        const Context& ctx);

// Parses a JSON configuration document; failures are usage errors.
Json read_config(const std::string& path);

// Writes the manifest (argv taken from ctx) and prints a one-line summary.
void publish(Manifest m, const Context& ctx, const std::string& what);

void rms_extract(const RmsExtractOptions& o, const Context& ctx);
void rms_quantize(const RmsQuantizeOptions& o, const Context& ctx);
void rms_dequantize(const RmsConvertOptions& o, const Context& ctx);
void rms_interp(const RmsInterpOptions& o, const Context& ctx);
void rms_ablate(const RmsAblateOptions& o, const Context& ctx);
void labels_smooth(const LabelsOptions& o, const Context& ctx);
void envelope_synth(const EnvelopeSynthOptions& o, const Context& ctx);
void envelope_from_onsets(const EnvelopeOnsetOptions& o, const Context& ctx);
void envelope_transfer(const EnvelopeTransferOptions& o, const Context& ctx);
void dataset_synth(const DatasetOptions& o, const Context& ctx);
void train_model(const TrainOptions& o, const Context& ctx);
void predict(const PredictOptions& o, const Context& ctx);
void eval_el1(const EvalOptions& o, const Context& ctx);
void eval_acc(const EvalOptions& o, const Context& ctx);
void eval_onset(const EvalOptions& o, const Context& ctx);
void eval_fad(const EvalOptions& o, const Context& ctx);
void eval_cosine(const EvalOptions& o, const Context& ctx);
void report(const ReportOptions& o, const Context& ctx);

}  // namespace foley::cli
