#include <foley/formats.hpp>
#include <foley/labels.hpp>
#include <foley/rms.hpp>

#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace foley;
using test_support::TempDir;

namespace {

RmsCurve awkward_curve() {
  RmsCurve c;
  c.values = (Eigen::VectorXd(5) << 0.0, 0.1, 1.0 / 3.0, std::nextafter(1.0, 0.0),
              std::numeric_limits<double>::denorm_min())
                 .finished();
  c.window = 1024;
  c.hop = 160;
  c.sample_rate = 16000;
  return c;
}

}  // namespace

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1.0) == "1");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("rms curves round trip exactly") {
  TempDir dir("fmt_rms");
  const RmsCurve c = awkward_curve();
  io::save_rms_curve(c, dir / "nested" / "c.json");
  const RmsCurve r = io::load_rms_curve(dir / "nested" / "c.json");
  CHECK(r.values == c.values);
  CHECK(r.window == 1024);
  CHECK(r.hop == 160);
  CHECK(r.sample_rate == 16000);
}

TEST_CASE("rms curve documents are validated") {
  CHECK_THROWS_AS(io::rms_curve_from_json(io::Json::parse(R"({"window":512})")), FormatError);
  CHECK_THROWS_AS(io::rms_curve_from_json(io::Json::parse(R"({"values":[0.1,"x"]})")), FormatError);
  CHECK_THROWS_AS(io::rms_curve_from_json(io::Json::parse(R"({"values":[0.1],"hop":0})")), FormatError);
}

TEST_CASE("quant curves round trip and carry mu") {
  TempDir dir("fmt_quant");
  const QuantCurve q = quantize_rms(awkward_curve(), 64);
  const io::Json j = io::to_json(q);
  CHECK(j["mu"] == 63);
  CHECK(j["n_bins"] == 64);
  io::save_quant_curve(q, dir / "q.json");
  const QuantCurve r = io::load_quant_curve(dir / "q.json");
  CHECK(r.bins == q.bins);
  CHECK(r.n_bins == 64);
  CHECK(r.hop == 160);
  CHECK_THROWS_AS(io::quant_curve_from_json(io::Json::parse(R"({"n_bins":4,"bins":[0,4]})")),
                  FormatError);
}

TEST_CASE("curve collections") {
  TempDir dir("fmt_coll");
  const RmsCurve c = awkward_curve();
  io::save_rms_curve(c, dir / "one.json");
  CHECK(io::load_curves(dir / "one.json").size() == 1);

  io::save_curve_collection({c, c, c}, dir / "many.json");
  const auto many = io::load_curves(dir / "many.json");
  REQUIRE(many.size() == 3);
  CHECK(many[2].values == c.values);

  io::save_quant_curve(quantize_rms(c, 64), dir / "q.json");
  const auto dq = io::load_curves(dir / "q.json");
  REQUIRE(dq.size() == 1);
  CHECK(dq[0].values == dequantize_rms(quantize_rms(c, 64)).values);
}

TEST_CASE("label matrices as csv") {
  QuantCurve q;
  q.n_bins = 8;
  q.bins = (Eigen::VectorXi(3) << 0, 3, 7).finished();
  const LabelMatrix m = make_gls_targets(q, 2, 1.0);
  const std::string csv = io::labels_to_csv(m);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(std::count(csv.begin(), csv.begin() + static_cast<long>(csv.find('\n')), ',') == 7);
  CHECK(io::labels_from_csv(csv).rows == m.rows);
  CHECK_THROWS_AS(io::labels_from_csv("0.5,0.5\n1\n"), FormatError);
}

TEST_CASE("embedding csv with and without a header") {
  const EmbeddingSet plain = io::parse_embeddings("1,2,3\n4,5,6\n\n", "x");
  CHECK(plain.vectors.rows() == 2);
  CHECK(plain.vectors(1, 2) == 6.0);
  CHECK(plain.label == "x");

  const EmbeddingSet headed = io::parse_embeddings("dim=2\n0.5, -1e-3\n2,3\n");
  CHECK(headed.vectors.cols() == 2);
  CHECK(headed.vectors(0, 1) == -1e-3);

  CHECK_THROWS_AS(io::parse_embeddings("dim=3\n1,2\n"), FormatError);
  CHECK_THROWS_AS(io::parse_embeddings("1,2\n3\n"), FormatError);
  CHECK_THROWS_AS(io::parse_embeddings("1,abc\n"), FormatError);
  CHECK_THROWS_AS(io::parse_embeddings("1,nan\n"), FormatError);

  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  EmbeddingSet s;
  s.vectors.resize(4, 3);
  for (Eigen::Index i = 0; i < s.vectors.size(); ++i) s.vectors(i) = n(gen);
  CHECK(io::parse_embeddings(io::embeddings_to_csv(s)).vectors == s.vectors);
  CHECK(io::parse_embeddings(io::embeddings_to_csv(s, false)).vectors == s.vectors);
}

TEST_CASE("onset lists") {
  const OnsetList o = io::parse_onsets("0.5,1\n1.25, 0.3\n");
  REQUIRE(o.size() == 2);
  CHECK(o[1].time == 1.25);
  CHECK(o[1].confidence == 0.3);
  const OnsetList r = io::parse_onsets(io::onsets_to_text(o));
  CHECK(r.size() == 2);
  CHECK(r[0].time == 0.5);
  CHECK_THROWS_AS(io::parse_onsets("1.0,1\n0.5,1\n"), FormatError);
  CHECK_THROWS_AS(io::parse_onsets("-1,1\n"), FormatError);
  CHECK_THROWS_AS(io::parse_onsets("1,1,1\n"), FormatError);
  CHECK(io::parse_onsets("").empty());
}

TEST_CASE("configs round trip through json") {
  PredictorConfig p;
  p.input_dim = 3;
  p.conv_blocks = {{3, 4}, {7, 2}};
  p.recurrent_hidden = 0;
  p.head = HeadKind::Regression;
  const PredictorConfig pr = io::predictor_config_from_json(io::to_json(p));
  CHECK(pr.input_dim == 3);
  REQUIRE(pr.conv_blocks.size() == 2);
  CHECK(pr.conv_blocks[1].kernel == 7);
  CHECK(pr.recurrent_hidden == 0);
  CHECK(pr.head == HeadKind::Regression);
  CHECK_THROWS_AS(io::predictor_config_from_json(io::Json::parse(R"({"head":"ranking"})")),
                  FormatError);

  TrainConfig t;
  t.loss.kind = LossKind::L2;
  t.epochs = 17;
  t.lr = 0.0125;
  t.seed = 99;
  const TrainConfig tr = io::train_config_from_json(io::to_json(t));
  CHECK(tr.loss.kind == LossKind::L2);
  CHECK(tr.epochs == 17);
  CHECK(tr.lr == 0.0125);
  CHECK(tr.seed == 99);
  CHECK(io::train_config_from_json(io::Json::parse(R"({"epochs":3})")).lr == TrainConfig{}.lr);
  CHECK_THROWS_AS(io::train_config_from_json(io::Json::parse(R"({"loss":"hinge"})")), FormatError);

  SynthDatasetSpec s;
  s.n_sequences = 3;
  s.noise_std = 0.25;
  const SynthDatasetSpec sr = io::dataset_spec_from_json(io::to_json(s));
  CHECK(sr.n_sequences == 3);
  CHECK(sr.noise_std == 0.25);
}

TEST_CASE("checkpoints round trip bit for bit") {
  TempDir dir("fmt_ckpt");
  PredictorConfig c;
  c.input_dim = 4;
  c.conv_blocks = {{3, 6}};
  c.recurrent_hidden = 5;
  PredictorParams p = init_params(c, 42);
  p.epoch = 12;
  p.weights[0] = std::numeric_limits<double>::denorm_min();
  p.weights[1] = -0.0;
  io::save_checkpoint(p, dir / "m.ckpt");
  const PredictorParams r = io::load_checkpoint(dir / "m.ckpt");
  CHECK(r.weights.size() == p.weights.size());
  CHECK(std::memcmp(r.weights.data(), p.weights.data(), sizeof(double) * p.weights.size()) == 0);
  CHECK(r.seed == 42);
  CHECK(r.epoch == 12);
  CHECK(r.config.recurrent_hidden == 5);

  const std::string bytes = test_support::read_bytes(dir / "m.ckpt");
  test_support::write_bytes(dir / "short.ckpt", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(io::load_checkpoint(dir / "short.ckpt"), FormatError);
  test_support::write_bytes(dir / "junk.ckpt", "{\"format\":\"other\"}\n");
  CHECK_THROWS_AS(io::load_checkpoint(dir / "junk.ckpt"), FormatError);
}

TEST_CASE("datasets round trip exactly") {
  TempDir dir("fmt_data");
  SynthDatasetSpec spec;
  spec.n_sequences = 3;
  spec.frames_per_sequence = 20;
  const auto data = synth_dataset(spec);
  io::save_dataset(data, spec, dir / "d.json");
  const auto r = io::load_dataset(dir / "d.json");
  REQUIRE(r.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r[i].features == data[i].features);
    CHECK(r[i].rms.values == data[i].rms.values);
  }
  CHECK(io::load_curves(dir / "d.json").size() == 3);
}

TEST_CASE("missing files raise") {
  CHECK_THROWS_AS(io::read_text("/nonexistent/definitely/missing.json"), Error);
}
