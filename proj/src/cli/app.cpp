#include "foley/cli.hpp"

#include "commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <functional>

namespace foley::cli {

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("FOLEY_RMS_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  const auto [ptr, ec] = std::from_chars(raw, end, v);
  if (ec != std::errc() || ptr != end) throw UsageError(std::string("FOLEY_RMS_SEED is not an unsigned integer: ") + raw);
  return v;
}

void add_framing(CLI::App* cmd, FramingOptions& f) {
  cmd->add_option("--preset", f.preset, "Framing preset: video2rms (512/128) or audioldm (1024/160)");
  cmd->add_option("--window", f.window, "RMS window in samples (default 512)");
  cmd->add_option("--hop", f.hop, "RMS hop in samples (default 128)");
}

void add_output(CLI::App* cmd, std::string& out, bool required = true) {
  auto* opt = cmd->add_option("-o,--out", out, "Output path");
  if (required) opt->required();
}

struct Options {
  RmsExtractOptions extract;
  RmsQuantizeOptions quantize;
  RmsConvertOptions dequantize;
  RmsInterpOptions interp;
  RmsAblateOptions ablate;
  LabelsOptions labels;
  EnvelopeSynthOptions env_synth;
  EnvelopeOnsetOptions env_onsets;
  EnvelopeTransferOptions env_transfer;
  DatasetOptions dataset;
  TrainOptions train;
  PredictOptions predict;
  EvalOptions eval;
  ReportOptions report;
  std::string rerun_manifest;
};

int dispatch(const std::vector<std::string>& args, Context& ctx);

void rerun(const std::string& manifest_file, Context& ctx) {
  const Json m = read_manifest(manifest_file);
  if (!m.contains("argv") || !m.at("argv").is_array()) throw FormatError(manifest_file + ": no argv");
  for (const Json& in : m.value("inputs", Json::array())) {
    const std::string path = in.at("path").get<std::string>();
    if (sha256_file(path) != in.at("sha256").get<std::string>())
      throw Error("rerun: input changed since the original run: " + path);
  }
  Context inner{m.at("argv").get<std::vector<std::string>>(), std::nullopt, ctx.out, ctx.err};
  if (m.contains("seed") && m.at("seed").at("source") == "env")
    inner.env_seed = m.at("seed").at("value").get<std::uint64_t>();
  const int status = dispatch(inner.argv, inner);
  if (status != 0) throw Error("rerun: command exited with status " + std::to_string(status));

  int differing = 0;
  for (const Json& out : m.value("outputs", Json::array())) {
    const std::string path = out.at("path").get<std::string>();
    if (sha256_file(path) != out.at("sha256").get<std::string>()) {
      ctx.err << "rerun: output differs: " << path << "\n";
      ++differing;
    }
  }
  if (differing > 0) throw Error("rerun: " + std::to_string(differing) + " output(s) not reproduced");
  ctx.out << "rerun reproduced " << m.value("outputs", Json::array()).size() << " output(s)\n";
}

int dispatch(const std::vector<std::string>& args, Context& ctx) {
  CLI::App app{"RMS envelope conditioning toolkit", "foley_rms"};
  app.require_subcommand(1);
  Options o;
  std::function<void()> action;
  auto on = [&action](CLI::App* cmd, std::function<void()> f) {
    cmd->callback([&action, f] { action = f; });
  };

  auto* rms = app.add_subcommand("rms", "RMS envelope operations")->require_subcommand(1);
  {
    auto* c = rms->add_subcommand("extract", "Frame-level RMS of a WAV file");
    c->add_option("input", o.extract.input, "WAV file")->required();
    add_output(c, o.extract.output);
    add_framing(c, o.extract.framing);
    c->add_option("--sample-rate", o.extract.sample_rate, "Resample to this rate first")->capture_default_str();
    on(c, [&] { rms_extract(o.extract, ctx); });

    c = rms->add_subcommand("quantize", "Mu-law quantization into bins");
    c->add_option("input", o.quantize.input, "RMS curve")->required();
    add_output(c, o.quantize.output);
    c->add_option("--bins", o.quantize.bins, "Number of bins")->capture_default_str();
    on(c, [&] { rms_quantize(o.quantize, ctx); });

    c = rms->add_subcommand("dequantize", "Codebook reconstruction");
    c->add_option("input", o.dequantize.input, "Quantized curve")->required();
    add_output(c, o.dequantize.output);
    on(c, [&] { rms_dequantize(o.dequantize, ctx); });

    c = rms->add_subcommand("interp", "Nearest-neighbour length matching");
    c->add_option("input", o.interp.input, "RMS curve")->required();
    add_output(c, o.interp.output);
    c->add_option("--length", o.interp.length, "Target frame count")->required();
    on(c, [&] { rms_interp(o.interp, ctx); });

    c = rms->add_subcommand("ablate", "Round-trip E-L1 per codebook size");
    c->add_option("input", o.ablate.input, "Curves (curve, collection or dataset)")->required();
    add_output(c, o.ablate.output);
    c->add_option("--bins", o.ablate.bins, "Codebook sizes")->delimiter(',');
    on(c, [&] { rms_ablate(o.ablate, ctx); });
  }

  auto* labels = app.add_subcommand("labels", "Classification targets")->require_subcommand(1);
  {
    auto* c = labels->add_subcommand("smooth", "Gaussian label smoothing");
    c->add_option("input", o.labels.input, "Quantized or continuous RMS curve")->required();
    add_output(c, o.labels.output);
    c->add_option("--window", o.labels.window, "Smoothing window W")->capture_default_str();
    c->add_option("--sigma", o.labels.sigma, "Gaussian width")->capture_default_str();
    c->add_option("--bins", o.labels.bins, "Bins used when the input is continuous")->capture_default_str();
    on(c, [&] { labels_smooth(o.labels, ctx); });
  }

  auto* envelope = app.add_subcommand("envelope", "Envelope synthesis and transfer")->require_subcommand(1);
  {
    auto* c = envelope->add_subcommand("synth", "Canonical envelope shapes");
    add_output(c, o.env_synth.output);
    c->add_option("--shape", o.env_synth.shape, "a, v, increase or decrease")->capture_default_str();
    c->add_option("--length", o.env_synth.length, "Frames")->required();
    c->add_option("--peak", o.env_synth.peak, "Peak value")->capture_default_str();
    c->add_option("--floor", o.env_synth.floor, "Floor value")->capture_default_str();
    c->add_option("--sample-rate", o.env_synth.sample_rate, "Recorded sample rate")->capture_default_str();
    add_framing(c, o.env_synth.framing);
    on(c, [&] { envelope_synth(o.env_synth, ctx); });

    c = envelope->add_subcommand("from-onsets", "Decaying transients at onset times");
    c->add_option("input", o.env_onsets.input, "Onset list (time_s,confidence)")->required();
    add_output(c, o.env_onsets.output);
    c->add_option("--length", o.env_onsets.length, "Frames")->required();
    c->add_option("--decay", o.env_onsets.decay, "Decay horizon in frames")->capture_default_str();
    c->add_option("--sample-rate", o.env_onsets.sample_rate, "Sample rate")->capture_default_str();
    add_framing(c, o.env_onsets.framing);
    on(c, [&] { envelope_from_onsets(o.env_onsets, ctx); });

    c = envelope->add_subcommand("transfer", "Impose an RMS curve on a waveform");
    c->add_option("input", o.env_transfer.input, "WAV file")->required();
    c->add_option("target", o.env_transfer.target, "Target RMS curve")->required();
    add_output(c, o.env_transfer.output);
    c->add_option("--eps", o.env_transfer.eps, "Source RMS floor")->capture_default_str();
    c->add_option("--max-gain", o.env_transfer.max_gain, "Gain cap")->capture_default_str();
    c->add_option("--refine-passes", o.env_transfer.refine_passes, "Gain correction passes")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    c->add_option("--bit-depth", o.env_transfer.bit_depth, "pcm16 or float32")->capture_default_str();
    on(c, [&] { envelope_transfer(o.env_transfer, ctx); });
  }

  auto* dataset = app.add_subcommand("dataset", "Synthetic training data")->require_subcommand(1);
  {
    auto* c = dataset->add_subcommand("synth", "Generate hit/scratch sequences");
    add_output(c, o.dataset.output);
    c->add_option("--config", o.dataset.config, "Dataset spec (JSON)");
    c->add_option("--sequences", o.dataset.sequences, "Number of sequences");
    c->add_option("--frames", o.dataset.frames, "Frames per sequence");
    c->add_option("--feature-dim", o.dataset.feature_dim, "Feature channels");
    c->add_option("--event-rate", o.dataset.event_rate, "Mean events per sequence");
    c->add_option("--noise", o.dataset.noise, "Feature noise standard deviation");
    c->add_option("--seed", o.dataset.seed, "Random seed");
    on(c, [&] { dataset_synth(o.dataset, ctx); });
  }

  {
    auto* c = app.add_subcommand("train", "Train the RMS predictor");
    c->add_option("data", o.train.data, "Dataset")->required();
    add_output(c, o.train.output);
    c->add_option("--config", o.train.config, "JSON with optional 'model' and 'train' blocks");
    c->add_option("--loss", o.train.loss, "ce_gls (classification) or l2 (regression)");
    c->add_option("--epochs", o.train.epochs, "Epochs");
    c->add_option("--lr", o.train.lr, "Learning rate");
    c->add_option("--lr-step", o.train.lr_step, "Halve the learning rate every N epochs");
    c->add_option("--batch", o.train.batch, "Sequences per batch");
    c->add_option("--momentum", o.train.momentum, "Momentum");
    c->add_option("--smoothing-window", o.train.smoothing_window, "GLS window W");
    c->add_option("--sigma", o.train.sigma, "GLS width");
    c->add_option("--bins", o.train.bins, "Classification bins");
    c->add_option("--seed", o.train.seed, "Initialisation and shuffling seed");
    on(c, [&] { train_model(o.train, ctx); });

    c = app.add_subcommand("predict", "Predict RMS curves for a dataset");
    c->add_option("model", o.predict.model, "Checkpoint")->required();
    c->add_option("data", o.predict.data, "Dataset")->required();
    add_output(c, o.predict.output);
    on(c, [&] { predict(o.predict, ctx); });
  }

  auto* eval = app.add_subcommand("eval", "Evaluation metrics")->require_subcommand(1);
  {
    auto pair = [&o](CLI::App* c, const char* a, const char* b) {
      c->add_option("reference", o.eval.gt, a)->required();
      c->add_option("candidate", o.eval.pred, b)->required();
      add_output(c, o.eval.output, false);
    };
    auto* c = eval->add_subcommand("el1", "Mean absolute RMS difference");
    pair(c, "Ground-truth curves", "Predicted curves");
    c->add_flag("--event-frames", o.eval.event_frames, "Only frames where ground truth exceeds the threshold");
    c->add_option("--threshold", o.eval.threshold, "Event threshold")->capture_default_str();
    on(c, [&] { eval_el1(o.eval, ctx); });

    c = eval->add_subcommand("acc", "Bin accuracy with tolerances");
    pair(c, "Ground-truth curves", "Predicted curves");
    c->add_option("--bins", o.eval.bins, "Bins")->capture_default_str();
    c->add_option("--tol", o.eval.tolerances, "Tolerances in bins")->delimiter(',');
    on(c, [&] { eval_acc(o.eval, ctx); });

    c = eval->add_subcommand("onset", "Onset accuracy and average precision");
    pair(c, "Ground-truth curves (.json) or onset list", "Predicted curves (.json) or onset list");
    c->add_option("--window-ms", o.eval.window_ms, "NMS window")->capture_default_str();
    c->add_option("--tol-s", o.eval.tol_s, "Matching tolerance in seconds")->capture_default_str();
    c->add_option("--threshold", o.eval.onset_threshold, "Minimum confidence")->capture_default_str();
    on(c, [&] { eval_onset(o.eval, ctx); });

    c = eval->add_subcommand("fad", "Frechet distance between embedding sets");
    pair(c, "Reference embeddings", "Generated embeddings");
    on(c, [&] { eval_fad(o.eval, ctx); });

    c = eval->add_subcommand("cosine", "Mean cosine similarity of paired embeddings");
    pair(c, "Embeddings", "Embeddings");
    on(c, [&] { eval_cosine(o.eval, ctx); });
  }

  {
    auto* c = app.add_subcommand("report", "Tabulate metrics of run directories");
    c->add_option("runs", o.report.run_dirs, "Run directories")->required();
    c->add_option("--csv", o.report.csv, "CSV output");
    c->add_option("--json", o.report.json, "JSON output");
    on(c, [&] { report(o.report, ctx); });

    c = app.add_subcommand("rerun", "Repeat a run from its manifest and verify its outputs");
    c->add_option("manifest", o.rerun_manifest, "Manifest file")->required();
    on(c, [&] { rerun(o.rerun_manifest, ctx); });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    ctx.err << "error: " << e.what() << "\n";
    return 2;
  }
  if (!action) {
    ctx.err << "error: no command\n";
    return 2;
  }
  try {
    action();
  } catch (const UsageError& e) {
    ctx.err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    ctx.err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{args, std::nullopt, out, err};
  try {
    ctx.env_seed = seed_from_env();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return dispatch(args, ctx);
}

}  // namespace foley::cli
