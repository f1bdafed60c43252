#include "commands.hpp"

#include "foley/envelope.hpp"
#include "foley/labels.hpp"
#include "foley/rms.hpp"
#include "foley/signal_io.hpp"

#include <cmath>

namespace foley::cli {

std::pair<int, int> resolve_framing(const FramingOptions& f) {
  int window = 512;
  int hop = 128;
  if (f.preset == "audioldm") {
    window = 1024;
    hop = 160;
  } else if (!f.preset.empty() && f.preset != "video2rms") {
    throw UsageError("unknown framing preset '" + f.preset + "'");
  }
  if (f.window) window = *f.window;
  if (f.hop) hop = *f.hop;
  if (!(window > hop && hop > 0) || (window - hop) % 2 != 0)
    throw UsageError("framing needs window > hop > 0 with an even difference");
  return {window, hop};
}

SeedRecord resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config,
                        const Context& ctx) {
  if (flag) return {*flag, "flag"};
  if (ctx.env_seed) return {*ctx.env_seed, "env"};
  if (config) return {*config, "config"};
  return {0, "default"};
}

Json read_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw UsageError("config " + path + ": expected a JSON object");
    return j;
  } catch (const Json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

namespace {

Json framing_json(int window, int hop, int sample_rate) {
  return {{"window", window}, {"hop", hop}, {"sample_rate", sample_rate}};
}

}  // namespace

void publish(Manifest m, const Context& ctx, const std::string& what) {
  m.argv = ctx.argv;
  write_manifest(m);
  ctx.out << what << " -> " << m.outputs.front().generic_string() << "\n";
}

void rms_extract(const RmsExtractOptions& o, const Context& ctx) {
  const auto [window, hop] = resolve_framing(o.framing);
  if (o.sample_rate <= 0) throw UsageError("--sample-rate must be positive");

  Waveform w = read_wav(o.input);
  const int source_rate = w.sample_rate;
  if (w.sample_rate != o.sample_rate) w = resample_linear(w, o.sample_rate);
  const RmsCurve c = compute_rms(w, window, hop);
  io::save_rms_curve(c, o.output);

  Manifest m;
  m.command = "rms extract";
  m.config = framing_json(window, hop, o.sample_rate);
  m.config["source_sample_rate"] = source_rate;
  m.inputs = {o.input};
  m.outputs = {o.output};
  m.summary = {{"frames", c.size()}};
  publish(std::move(m), ctx, std::to_string(c.size()) + " frames");
}

void rms_quantize(const RmsQuantizeOptions& o, const Context& ctx) {
  if (o.bins < 2) throw UsageError("--bins must be >= 2");
  const QuantCurve q = quantize_rms(io::load_rms_curve(o.input), o.bins);
  io::save_quant_curve(q, o.output);
  Manifest m;
  m.command = "rms quantize";
  m.config = {{"n_bins", o.bins}, {"mu", q.mu()}};
  m.inputs = {o.input};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(q.size()) + " frames quantized");
}

void rms_dequantize(const RmsConvertOptions& o, const Context& ctx) {
  const RmsCurve c = dequantize_rms(io::load_quant_curve(o.input));
  io::save_rms_curve(c, o.output);
  Manifest m;
  m.command = "rms dequantize";
  m.inputs = {o.input};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(c.size()) + " frames reconstructed");
}

void rms_interp(const RmsInterpOptions& o, const Context& ctx) {
  if (o.length < 1) throw UsageError("--length must be >= 1");
  const RmsCurve c = interp_nearest(io::load_rms_curve(o.input), o.length);
  io::save_rms_curve(c, o.output);
  Manifest m;
  m.command = "rms interp";
  m.config = {{"length", o.length}};
  m.inputs = {o.input};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(c.size()) + " frames");
}

void rms_ablate(const RmsAblateOptions& o, const Context& ctx) {
  for (int k : o.bins)
    if (k < 2) throw UsageError("--bins entries must be >= 2");
  const std::vector<RmsCurve> curves = io::load_curves(o.input);
  const std::vector<double> errors = quantization_ablation(curves, o.bins);

  Json table = Json::array();
  for (std::size_t i = 0; i < errors.size(); ++i) table.push_back({{"n_bins", o.bins[i]}, {"e_l1", errors[i]}});
  io::write_text(o.output, Json{{"ablation", table}}.dump(2) + "\n");

  Manifest m;
  m.command = "rms ablate";
  m.config = {{"bins", o.bins}};
  m.inputs = {o.input};
  m.outputs = {o.output};
  m.summary = {{"ablation", table}};
  publish(std::move(m), ctx, std::to_string(errors.size()) + " codebook sizes");
}

void labels_smooth(const LabelsOptions& o, const Context& ctx) {
  if (o.window < 0) throw UsageError("--window must be >= 0");
  if (!(o.sigma > 0.0)) throw UsageError("--sigma must be positive");
  if (o.bins < 2) throw UsageError("--bins must be >= 2");

  const Json doc = Json::parse(io::read_text(o.input), nullptr, false);
  if (doc.is_discarded()) throw FormatError(o.input + ": not a JSON document");
  const QuantCurve q = doc.contains("bins") ? io::quant_curve_from_json(doc)
                                             : quantize_rms(io::rms_curve_from_json(doc), o.bins);
  const LabelMatrix labels = make_gls_targets(q, o.window, o.sigma);
  io::write_text(o.output, io::labels_to_csv(labels));

  Manifest m;
  m.command = "labels smooth";
  m.config = {{"smoothing_window", o.window}, {"sigma", o.sigma}, {"n_bins", q.n_bins}};
  m.inputs = {o.input};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(labels.frames()) + " label rows");
}

namespace {

EnvelopeShape parse_shape(const std::string& s) {
  if (s == "a") return EnvelopeShape::AShape;
  if (s == "v") return EnvelopeShape::VShape;
  if (s == "increase") return EnvelopeShape::Increase;
  if (s == "decrease") return EnvelopeShape::Decrease;
  throw UsageError("unknown envelope shape '" + s + "'");
}

}  // namespace

void envelope_synth(const EnvelopeSynthOptions& o, const Context& ctx) {
  const auto [window, hop] = resolve_framing(o.framing);
  EnvelopeSpec spec;
  spec.shape = parse_shape(o.shape);
  spec.length = o.length;
  spec.peak = o.peak;
  spec.floor = o.floor;
  spec.window = window;
  spec.hop = hop;
  spec.sample_rate = o.sample_rate;
  if (spec.length < 2) throw UsageError("--length must be >= 2");
  if (!(spec.floor >= 0.0 && spec.floor <= spec.peak && spec.peak <= 1.0))
    throw UsageError("need 0 <= --floor <= --peak <= 1");

  const RmsCurve c = synth_envelope(spec);
  io::save_rms_curve(c, o.output);
  Manifest m;
  m.command = "envelope synth";
  m.config = framing_json(window, hop, o.sample_rate);
  m.config["shape"] = o.shape;
  m.config["length"] = o.length;
  m.config["peak"] = o.peak;
  m.config["floor"] = o.floor;
  m.outputs = {o.output};
  publish(std::move(m), ctx, o.shape + " envelope");
}

void envelope_from_onsets(const EnvelopeOnsetOptions& o, const Context& ctx) {
  const auto [window, hop] = resolve_framing(o.framing);
  if (o.length < 1) throw UsageError("--length must be >= 1");
  if (!(o.decay > 0.0)) throw UsageError("--decay must be positive");

  RmsCurve framing;
  framing.window = window;
  framing.hop = hop;
  framing.sample_rate = o.sample_rate;
  std::vector<OnsetEvent> events;
  for (const Onset& on : io::load_onsets(o.input))
    events.push_back({static_cast<Eigen::Index>(std::llround(on.time * framing.frame_rate())),
                      on.confidence, o.decay});
  const RmsCurve c = foley::envelope_from_onsets(events, o.length, framing);
  io::save_rms_curve(c, o.output);

  Manifest m;
  m.command = "envelope from-onsets";
  m.config = framing_json(window, hop, o.sample_rate);
  m.config["length"] = o.length;
  m.config["decay_frames"] = o.decay;
  m.inputs = {o.input};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(events.size()) + " onsets");
}

void envelope_transfer(const EnvelopeTransferOptions& o, const Context& ctx) {
  WavBitDepth depth;
  if (o.bit_depth == "float32") {
    depth = WavBitDepth::Float32;
  } else if (o.bit_depth == "pcm16") {
    depth = WavBitDepth::Pcm16;
  } else {
    throw UsageError("--bit-depth must be pcm16 or float32");
  }
  if (!(o.eps > 0.0) || !(o.max_gain > 0.0)) throw UsageError("--eps and --max-gain must be positive");

  const Waveform w = read_wav(o.input);
  const RmsCurve target = io::load_rms_curve(o.target);
  const Waveform shaped = transfer_envelope(w, target, {o.eps, o.max_gain, o.refine_passes});
  write_wav(shaped, o.output, depth);

  Manifest m;
  m.command = "envelope transfer";
  m.config = {{"eps", o.eps}, {"max_gain", o.max_gain}, {"refine_passes", o.refine_passes}, {"bit_depth", o.bit_depth}};
  m.inputs = {o.input, o.target};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(shaped.size()) + " samples");
}

}  // namespace foley::cli
