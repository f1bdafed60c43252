#include <foley/labels.hpp>
#include <foley/rms.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace foley;

namespace {

QuantCurve bins_of(std::initializer_list<int> v, int n_bins = 64) {
  QuantCurve q;
  q.n_bins = n_bins;
  q.bins = Eigen::VectorXi(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int b : v) q.bins[i++] = b;
  return q;
}

double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a(i)), std::abs(b(i)), 1e-8});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("gls row for an interior bin") {
  const LabelMatrix m = make_gls_targets(bins_of({10}), 2, 1.0);
  REQUIRE(m.n_bins() == 64);
  const double w1 = std::exp(-0.5);
  const double w2 = std::exp(-2.0);
  const double total = 1.0 + 2.0 * w1 + 2.0 * w2;
  CHECK(m.rows(0, 10) == doctest::Approx(1.0 / total).epsilon(1e-14));
  CHECK(m.rows(0, 9) == doctest::Approx(w1 / total).epsilon(1e-14));
  CHECK(m.rows(0, 12) == doctest::Approx(w2 / total).epsilon(1e-14));

  const double expected[] = {0.0545, 0.2442, 0.4026, 0.2442, 0.0545};
  for (int d = -2; d <= 2; ++d) CHECK(std::abs(m.rows(0, 10 + d) - expected[d + 2]) < 1e-4);
  CHECK(m.rows(0, 7) == 0.0);
  CHECK(m.rows(0, 13) == 0.0);
  CHECK(m.smoothing_window == 2);
  CHECK(m.sigma == 1.0);
}

TEST_CASE("one-hot rows for W = 0 and for the silence bin") {
  const LabelMatrix hard = make_gls_targets(bins_of({0, 5, 63}), 0, 1.0);
  CHECK(hard.rows(0, 0) == 1.0);
  CHECK(hard.rows(1, 5) == 1.0);
  CHECK(hard.rows(2, 63) == 1.0);
  CHECK(hard.rows.sum() == 3.0);

  const LabelMatrix soft = make_gls_targets(bins_of({0}), 2, 1.0);
  CHECK(soft.rows(0, 0) == 1.0);
  CHECK(soft.rows.row(0).sum() == 1.0);
}

TEST_CASE("rows are truncated at the codebook edges") {
  const LabelMatrix m = make_gls_targets(bins_of({63, 1}), 2, 1.0);
  // Top edge: bins 61, 62, 63 only.
  const double top = 1.0 + std::exp(-0.5) + std::exp(-2.0);
  CHECK(m.rows(0, 63) == doctest::Approx(1.0 / top).epsilon(1e-14));
  CHECK(m.rows(0, 60) == 0.0);
  // Bottom edge: the silence bin gets nothing from a non-silent frame.
  CHECK(m.rows(1, 0) == 0.0);
  const double bottom = 1.0 + std::exp(-0.5) + std::exp(-2.0);
  CHECK(m.rows(1, 1) == doctest::Approx(1.0 / bottom).epsilon(1e-14));
}

TEST_CASE("gls rows are distributions, symmetric and spread with W") {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> bin(0, 63);
  QuantCurve q;
  q.n_bins = 64;
  q.bins.resize(400);
  for (auto& b : q.bins) b = bin(gen);

  double previous_centre = 2.0;
  for (int w : {0, 1, 2, 4, 8}) {
    const LabelMatrix m = make_gls_targets(q, w, 1.5);
    CHECK(m.rows.minCoeff() >= 0.0);
    CHECK((m.rows.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      const int c = q.bins[i];
      CHECK((m.rows.row(i).array() > 0.0).count() <= 2 * w + 1);
      for (int d = 1; d <= w; ++d)
        if (c - d >= 1 && c + d <= 63) CHECK(m.rows(i, c - d) == m.rows(i, c + d));
    }
    const LabelMatrix single = make_gls_targets(bins_of({30}), w, 1.5);
    CHECK(single.rows(0, 30) <= previous_centre);
    previous_centre = single.rows(0, 30);
  }
}

TEST_CASE("gls preconditions") {
  CHECK_THROWS_AS(make_gls_targets(bins_of({1}), -1, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_gls_targets(bins_of({1}), 2, 0.0), PreconditionError);
  CHECK_THROWS_AS(make_gls_targets(bins_of({64}), 2, 1.0), PreconditionError);
}

TEST_CASE("cross entropy with uniform logits is ln K") {
  const LabelMatrix t = make_gls_targets(bins_of({3, 17, 40}), 0, 1.0);
  const LossResult r = cross_entropy_loss(Eigen::MatrixXd::Zero(3, 64), t);
  CHECK(r.loss == doctest::Approx(std::log(64.0)).epsilon(1e-14));
}

TEST_CASE("cross entropy tends to zero as the target logit dominates") {
  const LabelMatrix t = make_gls_targets(bins_of({5}, 8), 0, 1.0);
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(1, 8);
  logits(0, 5) = 50.0;
  CHECK(cross_entropy_loss(logits, t).loss < 1e-18);
}

TEST_CASE("one-hot cross entropy equals the negative log-softmax at the target") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> n(0.0, 2.0);
  Eigen::MatrixXd logits(4, 8);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits(i) = n(gen);
  const QuantCurve q = bins_of({1, 7, 0, 4}, 8);
  const LossResult r = cross_entropy_loss(logits, make_gls_targets(q, 0, 1.0));
  const Eigen::MatrixXd lp = log_softmax_rows(logits);
  CHECK(r.loss == -(lp(0, 1) + lp(1, 7) + lp(2, 0) + lp(3, 4)) / 4.0);
}

TEST_CASE("cross entropy gradient matches central differences") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd logits(5, 8);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits(i) = n(gen);
  const LabelMatrix t = make_gls_targets(bins_of({0, 3, 7, 5, 2}, 8), 2, 1.0);
  const LossResult r = cross_entropy_loss(logits, t);

  Eigen::MatrixXd numeric(5, 8);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    Eigen::MatrixXd plus = logits;
    Eigen::MatrixXd minus = logits;
    plus(i) += h;
    minus(i) -= h;
    numeric(i) = (cross_entropy_loss(plus, t).loss - cross_entropy_loss(minus, t).loss) / (2 * h);
  }
  CHECK(max_relative_error(r.gradient, numeric) < 1e-6);
}

TEST_CASE("cross entropy shape checks") {
  const LabelMatrix t = make_gls_targets(bins_of({1, 2}, 8), 0, 1.0);
  CHECK_THROWS_AS(cross_entropy_loss(Eigen::MatrixXd::Zero(3, 8), t), PreconditionError);
  CHECK_THROWS_AS(cross_entropy_loss(Eigen::MatrixXd::Zero(2, 7), t), PreconditionError);
}

TEST_CASE("l2 loss values") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
  CHECK(l2_loss(a, a).loss == 0.0);
  for (Eigen::Index n : {1, 7, 100}) {
    const LossResult r = l2_loss(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 0.1));
    CHECK(r.loss == doctest::Approx(0.01).epsilon(1e-12));
  }
  RmsCurve p, t;
  p.values = Eigen::VectorXd::Zero(3);
  t.values = Eigen::VectorXd::Constant(3, 0.1);
  CHECK(l2_loss(p, t).loss == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(l2_loss(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)), PreconditionError);
}

TEST_CASE("l2 gradient matches central differences") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd pred(9), target(9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    pred[i] = u(gen);
    target[i] = u(gen);
  }
  const LossResult r = l2_loss(pred, target);
  Eigen::VectorXd numeric(9);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < 9; ++i) {
    Eigen::VectorXd plus = pred, minus = pred;
    plus[i] += h;
    minus[i] -= h;
    numeric[i] = (l2_loss(plus, target).loss - l2_loss(minus, target).loss) / (2 * h);
  }
  CHECK(max_relative_error(r.gradient, numeric) < 1e-6);
}
