#pragma once

#include "foley/envelope.hpp"
#include "foley/metrics.hpp"
#include "foley/predictor.hpp"
#include "foley/synth_data.hpp"
#include "foley/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

// On-disk formats. Structured-text documents are JSON; matrices destined for
// inspection are CSV. Doubles are written in shortest round-trip form so a
// reload reproduces every value exactly.
namespace foley::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double v);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// RmsCurve: {"sample_rate", "window", "hop", "values": [...]}
Json to_json(const RmsCurve& c);
RmsCurve rms_curve_from_json(const Json& j);
void save_rms_curve(const RmsCurve& c, const fs::path& path);
RmsCurve load_rms_curve(const fs::path& path);

// QuantCurve: RmsCurve framing plus {"n_bins", "mu", "bins": [...]}
Json to_json(const QuantCurve& q);
QuantCurve quant_curve_from_json(const Json& j);
void save_quant_curve(const QuantCurve& q, const fs::path& path);
QuantCurve load_quant_curve(const fs::path& path);

// Several curves from one file: a single RmsCurve document, a
// {"curves": [...]} collection, a QuantCurve (dequantized) or a dataset
// (its ground-truth curves).
std::vector<RmsCurve> load_curves(const fs::path& path);
void save_curve_collection(const std::vector<RmsCurve>& curves, const fs::path& path);

// LabelMatrix: one frame per line, n_bins comma-separated probabilities.
std::string labels_to_csv(const LabelMatrix& m);
LabelMatrix labels_from_csv(const std::string& text);

// EmbeddingSet: one vector per line, optional leading "dim=D" line.
EmbeddingSet parse_embeddings(const std::string& text, const std::string& label = {});
EmbeddingSet load_embeddings(const fs::path& path);
std::string embeddings_to_csv(const EmbeddingSet& set, bool with_header = true);

// OnsetList: lines of "time_s,confidence".
OnsetList parse_onsets(const std::string& text);
OnsetList load_onsets(const fs::path& path);
std::string onsets_to_text(const OnsetList& onsets);

Json to_json(const PredictorConfig& c);
PredictorConfig predictor_config_from_json(const Json& j);
Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig defaults = {});
Json to_json(const SynthDatasetSpec& s);
SynthDatasetSpec dataset_spec_from_json(const Json& j, SynthDatasetSpec defaults = {});

// Checkpoint: one line of JSON header (architecture, seed, epoch, weight
// count) followed by the weights as little-endian IEEE-754 doubles.
void save_checkpoint(const PredictorParams& p, const fs::path& path);
PredictorParams load_checkpoint(const fs::path& path);

// Dataset: {"spec": {...}, "sequences": [{"features": [[...]], "rms": {...}}]}
void save_dataset(const std::vector<TrainingExample>& data, const SynthDatasetSpec& spec,
                  const fs::path& path);
std::vector<TrainingExample> load_dataset(const fs::path& path);

}  // namespace foley::io
