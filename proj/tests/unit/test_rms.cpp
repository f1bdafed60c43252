#include <foley/rms.hpp>

#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace foley;

namespace {

Waveform make_waveform(Eigen::VectorXd samples, int rate = 16000) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = rate;
  return w;
}

// Straightforward reflect padding and per-frame mean of squares.
Eigen::VectorXd brute_force_rms(const Eigen::VectorXd& x, int window, int hop) {
  const long pad = (window - hop) / 2;
  const long n = x.size();
  std::vector<double> padded;
  for (long i = pad; i >= 1; --i) padded.push_back(x[i]);
  for (long i = 0; i < n; ++i) padded.push_back(x[i]);
  for (long i = n - 2; i >= n - 1 - pad; --i) padded.push_back(x[i]);
  const long frames = (static_cast<long>(padded.size()) - window) / hop + 1;
  Eigen::VectorXd out(frames);
  for (long f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (long k = 0; k < window; ++k) sum += padded[f * hop + k] * padded[f * hop + k];
    out[f] = std::sqrt(sum / window);
  }
  return out;
}

RmsCurve curve(std::initializer_list<double> v) {
  RmsCurve c;
  c.values = Eigen::VectorXd(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) c.values[i++] = x;
  return c;
}

RmsCurve random_curve(std::mt19937_64& gen, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RmsCurve c;
  c.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) c.values[i] = std::pow(u(gen), 3.0);
  return c;
}

}  // namespace

TEST_CASE("frame counts for the two standard framings") {
  const Waveform ten_s = make_waveform(Eigen::VectorXd::Zero(160000));
  CHECK(compute_rms(ten_s, 512, 128).size() == 1250);
  const Waveform audioldm = make_waveform(Eigen::VectorXd::Zero(163840));
  CHECK(compute_rms(audioldm, 1024, 160).size() == 1024);
  CHECK(rms_frame_count(160000, 512, 128) == 1250);
  CHECK(rms_frame_count(163840, 1024, 160) == 1024);
}

TEST_CASE("frame count formula matches the output length") {
  for (int window : {4, 16, 64, 512}) {
    for (int hop : {2, 4, 8, 128}) {
      if (hop >= window || (window - hop) % 2 != 0) continue;
      for (Eigen::Index n : {window, window + 1, window + hop, 3 * window + 7}) {
        const long pad = (window - hop) / 2;
        const Eigen::Index expected = (n + 2 * pad - window) / hop + 1;
        const RmsCurve c = compute_rms(make_waveform(Eigen::VectorXd::Zero(n)), window, hop);
        CHECK(c.size() == expected);
        CHECK(rms_frame_count(n, window, hop) == expected);
      }
    }
  }
}

TEST_CASE("compute_rms matches a brute-force reflect-padded evaluation") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(1000);
  for (auto& v : x) v = u(gen);
  for (auto [window, hop] : {std::pair{512, 128}, {64, 16}, {10, 4}}) {
    const RmsCurve c = compute_rms(make_waveform(x), window, hop);
    const Eigen::VectorXd expected = brute_force_rms(x, window, hop);
    REQUIRE(c.size() == expected.size());
    CHECK((c.values - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(c.window == window);
    CHECK(c.hop == hop);
  }
}

TEST_CASE("constant and sinusoidal inputs") {
  const RmsCurve flat = compute_rms(make_waveform(Eigen::VectorXd::Constant(4000, -0.37)), 512, 128);
  CHECK((flat.values.array() - 0.37).abs().maxCoeff() < 1e-12);

  // 250 Hz at 16 kHz: 64 samples per period, 8 periods per 512-sample window.
  Eigen::VectorXd x(16000);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = 0.8 * std::sin(2.0 * std::numbers::pi * 250.0 * static_cast<double>(i) / 16000.0);
  const RmsCurve c = compute_rms(make_waveform(x), 512, 128);
  const double expected = 0.8 / std::sqrt(2.0);
  // Frames that do not reach into the reflected padding.
  for (Eigen::Index i = 2; i < c.size() - 2; ++i) CHECK(std::abs(c.values[i] - expected) < 1e-3);
}

TEST_CASE("rms of bounded input stays in the unit interval") {
  std::mt19937_64 gen(3);
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd x(5000);
  for (auto& v : x) v = coin(gen) ? 1.0 : -1.0;
  const RmsCurve c = compute_rms(make_waveform(x), 512, 128);
  CHECK(c.values.minCoeff() >= 0.0);
  CHECK(c.values.maxCoeff() <= 1.0);
}

TEST_CASE("frame values above one are clipped with a warning") {
  test_support::WarningCapture warnings;
  const RmsCurve c = compute_rms(make_waveform(Eigen::VectorXd::Constant(600, 2.0)), 512, 128);
  CHECK(c.values.maxCoeff() == 1.0);
  CHECK_FALSE(warnings.messages.empty());
}

TEST_CASE("compute_rms preconditions") {
  const Waveform w = make_waveform(Eigen::VectorXd::Zero(1024));
  CHECK_THROWS_AS(compute_rms(w, 128, 128), PreconditionError);
  CHECK_THROWS_AS(compute_rms(w, 128, 0), PreconditionError);
  CHECK_THROWS_AS(compute_rms(w, 129, 128), PreconditionError);
  CHECK_THROWS_AS(compute_rms(make_waveform(Eigen::VectorXd::Zero(100)), 512, 128),
                  PreconditionError);
}

TEST_CASE("mu-law endpoints and closed forms") {
  CHECK(mu_law_encode(0.0, 63) == 0.0);
  CHECK(mu_law_encode(1.0, 63) == 1.0);
  CHECK(mu_law_encode(1.0, 255) == 1.0);
  CHECK(std::abs(mu_law_encode(1.0 / 63.0, 63) - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(mu_law_encode(0.5, 255) - std::log(1.0 + 127.5) / std::log(256.0)) < 1e-14);
  CHECK(mu_law_decode(1.0, 63) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mu_law_decode(0.0, 63) == 0.0);
}

TEST_CASE("mu-law round trip and monotonicity") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  double prev_r = -1.0;
  std::vector<double> rs(1000);
  for (double& r : rs) r = u(gen);
  std::sort(rs.begin(), rs.end());
  double prev_f = -1.0;
  for (double r : rs) {
    const double f = mu_law_encode(r, 63);
    worst = std::max(worst, std::abs(mu_law_decode(f, 63) - r));
    if (r > prev_r) CHECK(f > prev_f);
    prev_r = r;
    prev_f = f;
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("mu-law clips out-of-range input with a warning") {
  test_support::WarningCapture warnings;
  CHECK(mu_law_encode(1.5, 63) == 1.0);
  CHECK(mu_law_encode(-0.2, 63) == 0.0);
  CHECK(warnings.messages.size() == 2);
}

TEST_CASE("mu-law works for single precision") {
  CHECK(mu_law_encode(1.0f / 63.0f, 63) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("quantization endpoints and codebook") {
  const QuantCurve q = quantize_rms(curve({0.0, 1.0, 0.5}), 64);
  CHECK(q.n_bins == 64);
  CHECK(q.mu() == 63);
  CHECK(q.bins[0] == 0);
  CHECK(q.bins[1] == 63);
  CHECK(q.bins[2] == static_cast<int>(std::floor(mu_law_encode(0.5, 63) * 63.0 + 0.5)));
  CHECK(codebook_value(0, 64) == 0.0);
  CHECK(codebook_value(63, 64) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(quantize_rms(curve({0.5}), 1), PreconditionError);
}

TEST_CASE("adjacent top bins are about 0.58 dB apart") {
  const double upper = mu_law_decode(1.0, 63);
  const double lower = mu_law_decode(62.0 / 63.0, 63);
  const double db = 20.0 * std::log10(upper / lower);
  CHECK(db == doctest::Approx(0.583).epsilon(0.005));
  CHECK(20.0 * std::log10(codebook_value(63, 64) / codebook_value(62, 64)) ==
        doctest::Approx(db).epsilon(1e-12));
}

TEST_CASE("quantization is monotone and keeps the argmax frame maximal") {
  std::mt19937_64 gen(5);
  RmsCurve c = random_curve(gen, 500);
  const QuantCurve q = quantize_rms(c, 64);
  Eigen::Index argmax;
  c.values.maxCoeff(&argmax);
  CHECK(q.bins[argmax] == q.bins.maxCoeff());

  std::sort(c.values.begin(), c.values.end());
  const QuantCurve sorted = quantize_rms(c, 64);
  for (Eigen::Index i = 1; i < sorted.size(); ++i) CHECK(sorted.bins[i] >= sorted.bins[i - 1]);
}

TEST_CASE("dequantize inverts quantize on the codebook") {
  QuantCurve q;
  q.n_bins = 64;
  q.bins = Eigen::VectorXi::LinSpaced(64, 0, 63);
  const RmsCurve d = dequantize_rms(q);
  CHECK(d.values[0] == 0.0);
  CHECK(quantize_rms(d, 64).bins == q.bins);
  const RmsCurve again = dequantize_rms(quantize_rms(d, 64));
  CHECK(again.values == d.values);
}

TEST_CASE("round-trip error is bounded by half a bin in the companded domain") {
  std::mt19937_64 gen(9);
  for (int k : {2, 8, 64, 256}) {
    const RmsCurve c = random_curve(gen, 2000);
    const RmsCurve r = dequantize_rms(quantize_rms(c, k));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      worst = std::max(worst, std::abs(mu_law_encode(c.values[i], k - 1) -
                                       mu_law_encode(r.values[i], k - 1)));
    CHECK(worst <= 1.0 / (2.0 * (k - 1)) + 1e-12);
  }
}

TEST_CASE("finer codebooks reconstruct better") {
  std::mt19937_64 gen(13);
  std::vector<RmsCurve> curves;
  for (int i = 0; i < 4; ++i) curves.push_back(random_curve(gen, 300));
  const std::vector<int> counts{4, 16, 64, 4096};
  const std::vector<double> errors = quantization_ablation(curves, counts);
  REQUIRE(errors.size() == 4);
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] < errors[i - 1]);

  double direct = 0.0;
  Eigen::Index frames = 0;
  for (const auto& c : curves) {
    direct += (c.values - dequantize_rms(quantize_rms(c, 64)).values).cwiseAbs().sum();
    frames += c.size();
  }
  CHECK(errors[2] == doctest::Approx(direct / frames).epsilon(1e-12));
}

TEST_CASE("interp_nearest") {
  SUBCASE("two frames to four") {
    const RmsCurve r = interp_nearest(curve({0.0, 1.0}), 4);
    REQUIRE(r.size() == 4);
    CHECK(r.values == Eigen::Vector4d(0.0, 0.0, 1.0, 1.0));
  }
  SUBCASE("same length is the identity") {
    std::mt19937_64 gen(1);
    const RmsCurve c = random_curve(gen, 37);
    CHECK(interp_nearest(c, 37).values == c.values);
  }
  SUBCASE("1250 to 1024 frames only copies source values") {
    std::mt19937_64 gen(2);
    const RmsCurve c = random_curve(gen, 1250);
    const RmsCurve r = interp_nearest(c, 1024);
    REQUIRE(r.size() == 1024);
    const std::set<double> source(c.values.begin(), c.values.end());
    for (double v : r.values) CHECK(source.count(v) == 1);
    CHECK(r.values[0] == c.values[0]);
    CHECK(r.values[1023] == c.values[1249]);
  }
  SUBCASE("single-frame source broadcasts") {
    const RmsCurve r = interp_nearest(curve({0.4}), 5);
    CHECK((r.values.array() == 0.4).all());
  }
  SUBCASE("framing metadata is kept") {
    RmsCurve c = curve({0.1, 0.2, 0.3});
    c.window = 1024;
    c.hop = 160;
    const RmsCurve r = interp_nearest(c, 7);
    CHECK(r.window == 1024);
    CHECK(r.hop == 160);
  }
  SUBCASE("zero length is rejected") { CHECK_THROWS_AS(interp_nearest(curve({0.1}), 0), PreconditionError); }
}
