#include "foley/formats.hpp"

#include "foley/rms.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>

namespace foley::io {
namespace {

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? get_field<T>(j, key) : fallback;
}

double parse_number(std::string_view token, std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
    token.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("line " + std::to_string(line) + ": not a number: '" + std::string(token) + "'");
  return v;
}

std::vector<double> split_numbers(std::string_view line, std::size_t line_no) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(parse_number(line.substr(start, comma - start), line_no));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

// Comma-separated numeric rows. A leading "dim=D" line is consumed when
// declared_dim is given.
std::vector<std::vector<double>> parse_rows(const std::string& text,
                                            int* declared_dim) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (declared_dim != nullptr && rows.empty() && line.rfind("dim=", 0) == 0) {
      *declared_dim = static_cast<int>(parse_number(std::string_view(line).substr(4), line_no));
      continue;
    }
    rows.push_back(split_numbers(line, line_no));
  }
  return rows;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw FormatError(std::string(what) + ": ragged rows");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Eigen::VectorXd vector_from_json(const Json& a, const char* key) {
  if (!a.is_array()) throw FormatError(std::string("field '") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw FormatError(std::string("field '") + key + "' holds a non-number");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

void append_line(std::string& out, const double* values, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += '\n';
}

const char* head_name(HeadKind h) { return h == HeadKind::Classification ? "classification" : "regression"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("short write to " + path.string());
}

Json to_json(const RmsCurve& c) {
  Json j;
  j["sample_rate"] = c.sample_rate;
  j["window"] = c.window;
  j["hop"] = c.hop;
  j["values"] = vector_json(c.values);
  return j;
}

RmsCurve rms_curve_from_json(const Json& j) {
  RmsCurve c;
  c.sample_rate = get_field<int>(j, "sample_rate");
  c.window = get_field<int>(j, "window");
  c.hop = get_field<int>(j, "hop");
  if (!j.contains("values")) throw FormatError("missing field 'values'");
  c.values = vector_from_json(j.at("values"), "values");
  if (c.sample_rate <= 0 || c.hop <= 0 || c.window <= 0) throw FormatError("framing must be positive");
  return c;
}

void save_rms_curve(const RmsCurve& c, const fs::path& path) { write_text(path, to_json(c).dump() + "\n"); }

RmsCurve load_rms_curve(const fs::path& path) {
  return rms_curve_from_json(parse_json(read_text(path), path.string()));
}

Json to_json(const QuantCurve& q) {
  Json j;
  j["sample_rate"] = q.sample_rate;
  j["window"] = q.window;
  j["hop"] = q.hop;
  j["n_bins"] = q.n_bins;
  j["mu"] = q.mu();
  Json bins = Json::array();
  for (int b : q.bins) bins.push_back(b);
  j["bins"] = std::move(bins);
  return j;
}

QuantCurve quant_curve_from_json(const Json& j) {
  QuantCurve q;
  q.sample_rate = get_field<int>(j, "sample_rate");
  q.window = get_field<int>(j, "window");
  q.hop = get_field<int>(j, "hop");
  q.n_bins = get_field<int>(j, "n_bins");
  if (q.n_bins < 2) throw FormatError("n_bins must be >= 2");
  const auto bins = get_field<std::vector<int>>(j, "bins");
  q.bins.resize(static_cast<Eigen::Index>(bins.size()));
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i] < 0 || bins[i] >= q.n_bins) throw FormatError("bin index out of range");
    q.bins[static_cast<Eigen::Index>(i)] = bins[i];
  }
  return q;
}

void save_quant_curve(const QuantCurve& q, const fs::path& path) {
  write_text(path, to_json(q).dump() + "\n");
}

QuantCurve load_quant_curve(const fs::path& path) {
  return quant_curve_from_json(parse_json(read_text(path), path.string()));
}

std::vector<RmsCurve> load_curves(const fs::path& path) {
  const Json j = parse_json(read_text(path), path.string());
  std::vector<RmsCurve> out;
  if (j.contains("curves")) {
    for (const Json& c : j.at("curves")) out.push_back(rms_curve_from_json(c));
  } else if (j.contains("sequences")) {
    for (const Json& s : j.at("sequences")) out.push_back(rms_curve_from_json(s.at("rms")));
  } else if (j.contains("bins")) {
    out.push_back(dequantize_rms(quant_curve_from_json(j)));
  } else {
    out.push_back(rms_curve_from_json(j));
  }
  return out;
}

void save_curve_collection(const std::vector<RmsCurve>& curves, const fs::path& path) {
  Json j;
  Json list = Json::array();
  for (const RmsCurve& c : curves) list.push_back(to_json(c));
  j["curves"] = std::move(list);
  write_text(path, j.dump() + "\n");
}

std::string labels_to_csv(const LabelMatrix& m) {
  std::string out;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = m.rows;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) append_line(out, rows.row(i).data(), rows.cols());
  return out;
}

LabelMatrix labels_from_csv(const std::string& text) {
  LabelMatrix m;
  m.rows = rows_to_matrix(parse_rows(text, nullptr), "labels");
  return m;
}

EmbeddingSet parse_embeddings(const std::string& text, const std::string& label) {
  int dim = -1;
  EmbeddingSet set;
  set.label = label;
  set.vectors = rows_to_matrix(parse_rows(text, &dim), "embeddings");
  if (dim >= 0 && set.vectors.size() > 0 && set.vectors.cols() != dim)
    throw FormatError("embeddings: rows have " + std::to_string(set.vectors.cols()) +
                      " columns but header declares dim=" + std::to_string(dim));
  if (!set.vectors.allFinite()) throw FormatError("embeddings: non-finite value");
  return set;
}

EmbeddingSet load_embeddings(const fs::path& path) {
  return parse_embeddings(read_text(path), path.filename().string());
}

std::string embeddings_to_csv(const EmbeddingSet& set, bool with_header) {
  std::string out;
  if (with_header) out += "dim=" + std::to_string(set.vectors.cols()) + "\n";
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = set.vectors;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) append_line(out, rows.row(i).data(), rows.cols());
  return out;
}

OnsetList parse_onsets(const std::string& text) {
  OnsetList out;
  for (const auto& row : parse_rows(text, nullptr)) {
    if (row.size() != 2) throw FormatError("onsets: expected 'time_s,confidence' per line");
    if (row[0] < 0.0) throw FormatError("onsets: negative time");
    if (!out.empty() && row[0] < out.back().time) throw FormatError("onsets: times must be sorted");
    out.push_back({row[0], row[1]});
  }
  return out;
}

OnsetList load_onsets(const fs::path& path) { return parse_onsets(read_text(path)); }

std::string onsets_to_text(const OnsetList& onsets) {
  std::string out;
  for (const Onset& o : onsets) out += format_double(o.time) + "," + format_double(o.confidence) + "\n";
  return out;
}

Json to_json(const PredictorConfig& c) {
  Json j;
  j["input_dim"] = c.input_dim;
  Json blocks = Json::array();
  for (const ConvBlockSpec& b : c.conv_blocks) blocks.push_back({{"kernel", b.kernel}, {"channels", b.channels}});
  j["conv_blocks"] = std::move(blocks);
  j["recurrent_hidden"] = c.recurrent_hidden;
  j["head"] = head_name(c.head);
  j["n_bins"] = c.n_bins;
  return j;
}

PredictorConfig predictor_config_from_json(const Json& j) {
  PredictorConfig c;
  c.input_dim = get_or(j, "input_dim", c.input_dim);
  if (j.contains("conv_blocks")) {
    c.conv_blocks.clear();
    for (const Json& b : j.at("conv_blocks"))
      c.conv_blocks.push_back({get_field<int>(b, "kernel"), get_field<int>(b, "channels")});
  }
  c.recurrent_hidden = get_or(j, "recurrent_hidden", c.recurrent_hidden);
  const std::string head = get_or<std::string>(j, "head", head_name(c.head));
  if (head == "classification") {
    c.head = HeadKind::Classification;
  } else if (head == "regression") {
    c.head = HeadKind::Regression;
  } else {
    throw FormatError("unknown head '" + head + "'");
  }
  c.n_bins = get_or(j, "n_bins", c.n_bins);
  try {
    c.validate();
  } catch (const PreconditionError& e) {
    throw FormatError(e.what());
  }
  return c;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["loss"] = c.loss.kind == LossKind::CeGls ? "ce_gls" : "l2";
  j["smoothing_window"] = c.loss.smoothing_window;
  j["sigma"] = c.loss.sigma;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["lr_step"] = c.lr_step;
  j["batch"] = c.batch;
  j["momentum"] = c.momentum;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  if (j.contains("loss")) {
    const auto loss = get_field<std::string>(j, "loss");
    if (loss == "ce_gls") {
      c.loss.kind = LossKind::CeGls;
    } else if (loss == "l2") {
      c.loss.kind = LossKind::L2;
    } else {
      throw FormatError("unknown loss '" + loss + "'");
    }
  }
  c.loss.smoothing_window = get_or(j, "smoothing_window", c.loss.smoothing_window);
  c.loss.sigma = get_or(j, "sigma", c.loss.sigma);
  c.epochs = get_or(j, "epochs", c.epochs);
  c.lr = get_or(j, "lr", c.lr);
  c.lr_step = get_or(j, "lr_step", c.lr_step);
  c.batch = get_or(j, "batch", c.batch);
  c.momentum = get_or(j, "momentum", c.momentum);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

Json to_json(const SynthDatasetSpec& s) {
  Json j;
  j["n_sequences"] = s.n_sequences;
  j["frames_per_sequence"] = s.frames_per_sequence;
  j["feature_dim"] = s.feature_dim;
  j["event_rate"] = s.event_rate;
  j["noise_std"] = s.noise_std;
  j["seed"] = s.seed;
  j["window"] = s.window;
  j["hop"] = s.hop;
  j["sample_rate"] = s.sample_rate;
  return j;
}

SynthDatasetSpec dataset_spec_from_json(const Json& j, SynthDatasetSpec s) {
  s.n_sequences = get_or(j, "n_sequences", s.n_sequences);
  s.frames_per_sequence = get_or(j, "frames_per_sequence", s.frames_per_sequence);
  s.feature_dim = get_or(j, "feature_dim", s.feature_dim);
  s.event_rate = get_or(j, "event_rate", s.event_rate);
  s.noise_std = get_or(j, "noise_std", s.noise_std);
  s.seed = get_or(j, "seed", s.seed);
  s.window = get_or(j, "window", s.window);
  s.hop = get_or(j, "hop", s.hop);
  s.sample_rate = get_or(j, "sample_rate", s.sample_rate);
  return s;
}

void save_checkpoint(const PredictorParams& p, const fs::path& path) {
  Json header;
  header["format"] = "foley-rms-checkpoint";
  header["version"] = 1;
  header["architecture"] = to_json(p.config);
  header["seed"] = p.seed;
  header["epoch"] = p.epoch;
  header["n_weights"] = p.weights.size();

  std::string out = header.dump() + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(p.weights.size()) * 8);
  for (double w : p.weights) {
    const auto bits = std::bit_cast<std::uint64_t>(w);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  write_text(path, out);
}

PredictorParams load_checkpoint(const fs::path& path) {
  const std::string bytes = read_text(path);
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw FormatError("checkpoint: missing header line");
  const Json header = parse_json(bytes.substr(0, newline), path.string());
  if (get_or<std::string>(header, "format", "") != "foley-rms-checkpoint")
    throw FormatError("checkpoint: unrecognised header");

  PredictorParams p;
  p.config = predictor_config_from_json(header.at("architecture"));
  p.seed = get_field<std::uint64_t>(header, "seed");
  p.epoch = get_field<int>(header, "epoch");
  const auto n = get_field<std::int64_t>(header, "n_weights");
  if (n != p.config.parameter_count()) throw FormatError("checkpoint: weight count disagrees with architecture");
  if (bytes.size() - newline - 1 != static_cast<std::size_t>(n) * 8)
    throw FormatError("checkpoint: payload size mismatch");

  p.weights.resize(n);
  const auto* payload = reinterpret_cast<const unsigned char*>(bytes.data() + newline + 1);
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(payload[i * 8 + b]) << (8 * b);
    p.weights[i] = std::bit_cast<double>(bits);
  }
  return p;
}

void save_dataset(const std::vector<TrainingExample>& data, const SynthDatasetSpec& spec,
                  const fs::path& path) {
  Json j;
  j["spec"] = to_json(spec);
  Json seqs = Json::array();
  for (const TrainingExample& ex : data) {
    Json features = Json::array();
    for (Eigen::Index t = 0; t < ex.features.rows(); ++t) features.push_back(vector_json(ex.features.row(t).transpose()));
    seqs.push_back({{"features", std::move(features)}, {"rms", to_json(ex.rms)}});
  }
  j["sequences"] = std::move(seqs);
  write_text(path, j.dump() + "\n");
}

std::vector<TrainingExample> load_dataset(const fs::path& path) {
  const Json j = parse_json(read_text(path), path.string());
  if (!j.contains("sequences")) throw FormatError("dataset: missing 'sequences'");
  std::vector<TrainingExample> out;
  for (const Json& s : j.at("sequences")) {
    TrainingExample ex;
    ex.rms = rms_curve_from_json(s.at("rms"));
    const Json& rows = s.at("features");
    std::vector<std::vector<double>> parsed;
    for (const Json& r : rows) parsed.push_back(r.get<std::vector<double>>());
    ex.features = rows_to_matrix(parsed, "features");
    if (ex.features.rows() != ex.rms.size()) throw FormatError("dataset: feature/RMS length mismatch");
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace foley::io
