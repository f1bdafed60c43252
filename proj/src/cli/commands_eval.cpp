#include "commands.hpp"

#include "foley/metrics.hpp"
#include "foley/rms.hpp"

#include <algorithm>
#include <map>

namespace foley::cli {

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

// Pairs curves one-to-one; predictions are length-matched to the ground
// truth by nearest-neighbour interpolation.
std::vector<std::pair<RmsCurve, RmsCurve>> load_pairs(const EvalOptions& o, int* matched) {
  const std::vector<RmsCurve> gt = io::load_curves(o.gt);
  const std::vector<RmsCurve> pred = io::load_curves(o.pred);
  if (gt.size() != pred.size())
    throw PreconditionError("ground truth has " + std::to_string(gt.size()) + " curves, prediction " +
                            std::to_string(pred.size()));
  std::vector<std::pair<RmsCurve, RmsCurve>> pairs;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    RmsCurve p = pred[i];
    if (p.size() != gt[i].size()) {
      p = interp_nearest(p, gt[i].size());
      ++*matched;
    }
    pairs.emplace_back(gt[i], std::move(p));
  }
  return pairs;
}

void emit(const std::string& command, Json config, Json metrics, std::vector<fs::path> inputs,
          const EvalOptions& o, const Context& ctx) {
  Json doc = {{"command", command}, {"metrics", metrics}};
  ctx.out << doc.dump(2) << "\n";
  if (o.output.empty()) return;
  io::write_text(o.output, doc.dump(2) + "\n");
  Manifest m;
  m.command = command;
  m.config = std::move(config);
  m.inputs = std::move(inputs);
  m.outputs = {o.output};
  m.metrics = std::move(metrics);
  m.argv = ctx.argv;
  write_manifest(m);
}

}  // namespace

void eval_el1(const EvalOptions& o, const Context& ctx) {
  int matched = 0;
  const auto pairs = load_pairs(o, &matched);
  double total = 0.0;
  long frames = 0;
  for (const auto& [gt, pred] : pairs) {
    for (Eigen::Index i = 0; i < gt.size(); ++i) {
      if (o.event_frames && !(gt.values[i] > o.threshold)) continue;
      total += std::abs(gt.values[i] - pred.values[i]);
      ++frames;
    }
  }
  if (frames == 0 && !o.event_frames) throw PreconditionError("eval el1: no frames");
  const std::optional<double> value =
      frames == 0 ? std::nullopt : std::optional<double>(total / static_cast<double>(frames));
  if (!value) ctx.err << "warning: no ground-truth frame exceeds the event threshold\n";

  Json config = {{"event_frames", o.event_frames}, {"length_matched_curves", matched}};
  if (o.event_frames) config["threshold"] = o.threshold;
  const char* key = o.event_frames ? "el1_event" : "el1";
  emit("eval el1", config, {{key, optional_json(value)}}, {o.gt, o.pred}, o, ctx);
}

void eval_acc(const EvalOptions& o, const Context& ctx) {
  if (o.bins < 2) throw UsageError("--bins must be >= 2");
  for (int t : o.tolerances)
    if (t < 0) throw UsageError("--tol entries must be >= 0");
  int matched = 0;
  const auto pairs = load_pairs(o, &matched);
  std::vector<QuantCurve> gt, pred;
  for (const auto& [g, p] : pairs) {
    gt.push_back(quantize_rms(g, o.bins));
    pred.push_back(quantize_rms(p, o.bins));
  }
  Json metrics = Json::object();
  for (int t : o.tolerances) metrics["acc_" + std::to_string(t)] = optional_json(rms_accuracy(gt, pred, t));
  emit("eval acc", {{"n_bins", o.bins}, {"tolerances", o.tolerances}, {"length_matched_curves", matched}},
       metrics, {o.gt, o.pred}, o, ctx);
}

namespace {

// JSON inputs are RMS curves (onsets picked by NMS over the rectified
// difference); anything else is a time,confidence list.
std::vector<OnsetList> load_onset_sets(const std::string& path, const EvalOptions& o) {
  if (fs::path(path).extension() != ".json") return {io::load_onsets(path)};
  std::vector<OnsetList> out;
  for (const RmsCurve& c : io::load_curves(path))
    out.push_back(nms_peaks(onset_confidence(c), o.window_ms, c.frame_rate(), o.onset_threshold));
  return out;
}

}  // namespace

void eval_onset(const EvalOptions& o, const Context& ctx) {
  if (!(o.window_ms > 0.0) || !(o.tol_s >= 0.0)) throw UsageError("--window-ms > 0 and --tol-s >= 0 required");
  const auto gt = load_onset_sets(o.gt, o);
  const auto pred = load_onset_sets(o.pred, o);
  if (gt.size() != pred.size()) throw PreconditionError("eval onset: ground truth and prediction counts differ");
  if (gt.empty()) throw PreconditionError("eval onset: no sequences");
  double acc = 0.0;
  double ap = 0.0;
  long matches = 0, fn = 0, fp = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const OnsetScores s = onset_metrics(gt[i], pred[i], o.tol_s);
    acc += s.accuracy;
    ap += s.average_precision;
    matches += s.matches;
    fn += s.false_negatives;
    fp += s.false_positives;
  }
  const double n = static_cast<double>(gt.size());
  Json metrics = {{"onset_acc", acc / n}, {"onset_ap", ap / n}};
  Json config = {{"window_ms", o.window_ms}, {"tol_s", o.tol_s}, {"threshold", o.onset_threshold}};
  emit("eval onset", config, metrics, {o.gt, o.pred}, o, ctx);
  ctx.err << "onsets: " << matches << " matched, " << fn << " missed, " << fp << " spurious\n";
}

void eval_fad(const EvalOptions& o, const Context& ctx) {
  const EmbeddingSet r = io::load_embeddings(o.gt);
  const EmbeddingSet g = io::load_embeddings(o.pred);
  emit("eval fad", Json::object(), {{"fad", frechet_distance(r, g)}}, {o.gt, o.pred}, o, ctx);
}

void eval_cosine(const EvalOptions& o, const Context& ctx) {
  const EmbeddingSet a = io::load_embeddings(o.gt);
  const EmbeddingSet b = io::load_embeddings(o.pred);
  const Eigen::Index n = std::max(a.vectors.rows(), b.vectors.rows());
  if (n == 0 || (a.vectors.rows() != b.vectors.rows() && a.vectors.rows() != 1 && b.vectors.rows() != 1))
    throw PreconditionError("eval cosine: need paired rows or a single reference vector");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd e = a.vectors.row(a.vectors.rows() == 1 ? 0 : i).transpose();
    const Eigen::VectorXd e_hat = b.vectors.row(b.vectors.rows() == 1 ? 0 : i).transpose();
    total += cosine_score(e, e_hat);
  }
  emit("eval cosine", {{"pairs", n}}, {{"cosine", total / static_cast<double>(n)}}, {o.gt, o.pred}, o, ctx);
}

namespace {

const std::vector<std::string> kColumnOrder{"el1",   "el1_event", "acc_2",    "acc_5", "acc_8",
                                            "onset_acc", "onset_ap", "fad", "cosine"};

std::string run_name(const fs::path& dir) {
  const fs::path clean = dir.has_filename() ? dir : dir.parent_path();
  return clean.filename().string();
}

}  // namespace

void report(const ReportOptions& o, const Context& ctx) {
  struct Row {
    std::string name;
    std::map<std::string, Json> metrics;
  };
  std::vector<Row> rows;
  std::vector<fs::path> manifests_read;
  for (const std::string& d : o.run_dirs) {
    if (!fs::is_directory(d)) throw Error("report: not a directory: " + d);
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(d)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.ends_with(".manifest.json")) manifests.push_back(entry.path());
    }
    if (manifests.empty()) throw Error("report: no manifest in " + d);
    std::sort(manifests.begin(), manifests.end());
    Row row{run_name(d), {}};
    for (const fs::path& p : manifests) {
      const Json j = read_manifest(p);
      if (j.contains("metrics"))
        for (const auto& [key, value] : j.at("metrics").items()) row.metrics[key] = value;
      manifests_read.push_back(p);
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.name < b.name; });

  std::vector<std::string> columns;
  auto present = [&rows](const std::string& c) {
    return std::any_of(rows.begin(), rows.end(), [&c](const Row& r) { return r.metrics.count(c) > 0; });
  };
  for (const std::string& c : kColumnOrder)
    if (present(c)) columns.push_back(c);
  std::vector<std::string> extra;
  for (const Row& r : rows)
    for (const auto& [key, value] : r.metrics)
      if (std::find(kColumnOrder.begin(), kColumnOrder.end(), key) == kColumnOrder.end() &&
          std::find(extra.begin(), extra.end(), key) == extra.end())
        extra.push_back(key);
  std::sort(extra.begin(), extra.end());
  columns.insert(columns.end(), extra.begin(), extra.end());

  std::string csv = "run";
  for (const std::string& c : columns) csv += "," + c;
  csv += "\n";
  Json json_rows = Json::array();
  for (const Row& r : rows) {
    csv += r.name;
    Json values = Json::object();
    for (const std::string& c : columns) {
      const auto it = r.metrics.find(c);
      const bool number = it != r.metrics.end() && it->second.is_number();
      csv += ",";
      if (number) csv += io::format_double(it->second.get<double>());
      values[c] = number ? it->second : Json();
    }
    csv += "\n";
    json_rows.push_back({{"run", r.name}, {"metrics", values}});
  }
  const Json table = {{"columns", columns}, {"rows", json_rows}};

  std::vector<fs::path> outputs;
  if (!o.csv.empty()) {
    io::write_text(o.csv, csv);
    outputs.push_back(o.csv);
  }
  if (!o.json.empty()) {
    io::write_text(o.json, table.dump(2) + "\n");
    outputs.push_back(o.json);
  }
  ctx.out << csv;
  if (outputs.empty()) return;
  Manifest m;
  m.command = "report";
  m.config = {{"runs", o.run_dirs}};
  m.inputs = manifests_read;
  m.outputs = outputs;
  m.argv = ctx.argv;
  write_manifest(m);
}

}  // namespace foley::cli
