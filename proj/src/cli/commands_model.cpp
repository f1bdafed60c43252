#include "commands.hpp"

#include "foley/predictor.hpp"
#include "foley/synth_data.hpp"

namespace foley::cli {

namespace {

template <typename T>
std::optional<T> config_value(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

void dataset_synth(const DatasetOptions& o, const Context& ctx) {
  SynthDatasetSpec spec;
  std::optional<std::uint64_t> config_seed;
  if (!o.config.empty()) {
    const Json j = read_config(o.config);
    try {
      spec = io::dataset_spec_from_json(j);
    } catch (const std::exception& e) {
      throw UsageError(std::string("dataset config: ") + e.what());
    }
    config_seed = config_value<std::uint64_t>(j, "seed");
  }
  if (o.sequences) spec.n_sequences = *o.sequences;
  if (o.frames) spec.frames_per_sequence = *o.frames;
  if (o.feature_dim) spec.feature_dim = *o.feature_dim;
  if (o.event_rate) spec.event_rate = *o.event_rate;
  if (o.noise) spec.noise_std = *o.noise;
  if (spec.n_sequences < 1 || spec.frames_per_sequence < 1 || spec.feature_dim < 2 ||
      spec.event_rate < 0.0 || spec.noise_std < 0.0)
    throw UsageError("dataset: need sequences >= 1, frames >= 1, feature_dim >= 2, rate >= 0, noise >= 0");
  const SeedRecord seed = resolve_seed(o.seed, config_seed, ctx);
  spec.seed = seed.value;

  const auto data = synth_dataset(spec);
  io::save_dataset(data, spec, o.output);

  long active = 0;
  long frames = 0;
  for (const auto& ex : data) {
    active += (ex.rms.values.array() > 0.05).count();
    frames += ex.rms.size();
  }
  Manifest m;
  m.command = "dataset synth";
  m.config = io::to_json(spec);
  m.seed = seed;
  m.outputs = {o.output};
  m.summary = {{"active_fraction", static_cast<double>(active) / static_cast<double>(frames)}};
  publish(std::move(m), ctx, std::to_string(data.size()) + " sequences");
}

void train_model(const TrainOptions& o, const Context& ctx) {
  PredictorConfig arch;
  TrainConfig tc;
  std::optional<std::uint64_t> config_seed;
  bool head_from_config = false;
  if (!o.config.empty()) {
    const Json j = read_config(o.config);
    try {
      if (j.contains("model")) {
        arch = io::predictor_config_from_json(j.at("model"));
        head_from_config = j.at("model").contains("head");
      }
      if (j.contains("train")) {
        tc = io::train_config_from_json(j.at("train"));
        config_seed = config_value<std::uint64_t>(j.at("train"), "seed");
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(std::string("train config: ") + e.what());
    }
  }
  if (o.loss) {
    if (*o.loss == "ce_gls") {
      tc.loss.kind = LossKind::CeGls;
    } else if (*o.loss == "l2") {
      tc.loss.kind = LossKind::L2;
    } else {
      throw UsageError("--loss must be ce_gls or l2");
    }
  }
  if (o.epochs) tc.epochs = *o.epochs;
  if (o.lr) tc.lr = *o.lr;
  if (o.lr_step) tc.lr_step = *o.lr_step;
  if (o.batch) tc.batch = *o.batch;
  if (o.momentum) tc.momentum = *o.momentum;
  if (o.smoothing_window) tc.loss.smoothing_window = *o.smoothing_window;
  if (o.sigma) tc.loss.sigma = *o.sigma;
  if (o.bins) arch.n_bins = *o.bins;

  const HeadKind head = tc.loss.kind == LossKind::CeGls ? HeadKind::Classification : HeadKind::Regression;
  if (head_from_config && arch.head != head) throw UsageError("model head does not match the loss");
  arch.head = head;
  if (tc.epochs < 0 || tc.batch < 1 || tc.lr_step < 1 || !(tc.lr >= 0.0) || tc.loss.smoothing_window < 0 ||
      !(tc.loss.sigma > 0.0))
    throw UsageError("train: need epochs >= 0, batch >= 1, lr_step >= 1, lr >= 0, window >= 0, sigma > 0");

  const std::vector<TrainingExample> data = io::load_dataset(o.data);
  if (data.empty()) throw PreconditionError("train: dataset has no sequences");
  arch.input_dim = static_cast<int>(data.front().features.cols());
  try {
    arch.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  const SeedRecord seed = resolve_seed(o.seed, config_seed, ctx);
  tc.seed = seed.value;

  const TrainResult result = train(init_params(arch, seed.value), data, tc);
  io::save_checkpoint(result.params, o.output);

  fs::path trace_path = o.output;
  trace_path += ".loss.csv";
  std::string trace = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e)
    trace += std::to_string(e + 1) + "," + io::format_double(result.loss_trace[e]) + "\n";
  io::write_text(trace_path, trace);

  Manifest m;
  m.command = "train";
  m.config = {{"model", io::to_json(arch)}, {"train", io::to_json(tc)}};
  m.seed = seed;
  m.inputs = {o.data};
  m.outputs = {o.output, trace_path};
  m.summary = {{"parameters", arch.parameter_count()},
               {"final_loss", result.loss_trace.empty() ? Json() : Json(result.loss_trace.back())}};
  publish(std::move(m), ctx, "trained " + std::to_string(tc.epochs) + " epochs");
}

void predict(const PredictOptions& o, const Context& ctx) {
  const PredictorParams params = io::load_checkpoint(o.model);
  const std::vector<TrainingExample> data = io::load_dataset(o.data);
  std::vector<RmsCurve> curves;
  curves.reserve(data.size());
  for (const TrainingExample& ex : data) curves.push_back(predict_rms(params, ex.features, ex.rms));
  io::save_curve_collection(curves, o.output);

  Manifest m;
  m.command = "predict";
  m.config = {{"model", io::to_json(params.config)}};
  m.inputs = {o.model, o.data};
  m.outputs = {o.output};
  publish(std::move(m), ctx, std::to_string(curves.size()) + " curves predicted");
}

}  // namespace foley::cli
