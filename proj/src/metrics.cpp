#include "foley/metrics.hpp"

#include "foley/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foley {

double e_l1(const RmsCurve& gt, const RmsCurve& pred) { return e_l1(gt.values, pred.values); }

std::optional<double> e_l1_event(const RmsCurve& gt, const RmsCurve& pred, double threshold) {
  if (gt.size() != pred.size()) throw PreconditionError("e_l1_event: length mismatch");
  double total = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    if (gt.values[i] > threshold) {
      total += std::abs(gt.values[i] - pred.values[i]);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

namespace {

void check_pair(const QuantCurve& gt, const QuantCurve& pred) {
  if (gt.size() != pred.size()) throw PreconditionError("rms_accuracy: length mismatch");
  if (gt.n_bins != pred.n_bins) throw PreconditionError("rms_accuracy: bin count mismatch");
}

}  // namespace

std::optional<double> rms_accuracy(const std::vector<QuantCurve>& gt,
                                   const std::vector<QuantCurve>& pred, int tol_bins) {
  if (gt.size() != pred.size()) throw PreconditionError("rms_accuracy: curve count mismatch");
  if (tol_bins < 0) throw PreconditionError("rms_accuracy: tolerance must be >= 0");
  long included = 0;
  long hits = 0;
  for (std::size_t c = 0; c < gt.size(); ++c) {
    check_pair(gt[c], pred[c]);
    for (Eigen::Index i = 0; i < gt[c].size(); ++i) {
      const int a = gt[c].bins[i];
      const int b = pred[c].bins[i];
      if (a == 0 && b == 0) continue;
      ++included;
      if (std::abs(a - b) <= tol_bins) ++hits;
    }
  }
  if (included == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(included);
}

std::optional<double> rms_accuracy(const QuantCurve& gt, const QuantCurve& pred, int tol_bins) {
  return rms_accuracy(std::vector<QuantCurve>{gt}, std::vector<QuantCurve>{pred}, tol_bins);
}

Eigen::VectorXd onset_confidence(const RmsCurve& c) {
  if (c.size() < 2) throw PreconditionError("onset_confidence: need at least 2 frames");
  Eigen::VectorXd conf = Eigen::VectorXd::Zero(c.size());
  for (Eigen::Index i = 1; i < c.size(); ++i) conf[i] = std::max(c.values[i] - c.values[i - 1], 0.0);
  const double peak = conf.maxCoeff();
  if (peak > 0.0) conf /= peak;
  return conf;
}

OnsetList nms_peaks(const Eigen::VectorXd& confidence, double window_ms, double frame_rate,
                    double threshold) {
  if (!(window_ms > 0.0)) throw PreconditionError("nms_peaks: window must be positive");
  if (!(frame_rate > 0.0)) throw PreconditionError("nms_peaks: frame rate must be positive");

  const double window_s = window_ms / 1000.0;
  // Largest frame distance still strictly inside the window.
  auto reach = static_cast<Eigen::Index>(std::ceil(window_s * frame_rate)) - 1;
  while ((reach + 1) / frame_rate < window_s) ++reach;
  while (reach > 0 && reach / frame_rate >= window_s) --reach;

  const Eigen::Index n = confidence.size();
  OnsetList out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = confidence[i];
    if (!(c >= threshold)) continue;
    bool keep = true;
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - reach);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + reach);
    for (Eigen::Index j = lo; j <= hi && keep; ++j) {
      if (j == i) continue;
      if (confidence[j] > c || (confidence[j] == c && j < i)) keep = false;
    }
    if (keep) out.push_back({static_cast<double>(i) / frame_rate, c});
  }
  return out;
}

OnsetScores onset_metrics(const OnsetList& gt, const OnsetList& pred, double tol_s) {
  OnsetScores s;
  std::vector<std::size_t> ranked(pred.size());
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(), [&pred](std::size_t a, std::size_t b) {
    return pred[a].confidence > pred[b].confidence;
  });

  std::vector<bool> taken(gt.size(), false);
  std::vector<bool> ranked_hit(pred.size(), false);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const Onset& p = pred[ranked[r]];
    std::size_t best = gt.size();
    double best_dist = 0.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double d = std::abs(gt[g].time - p.time);
      if (d <= tol_s && (best == gt.size() || d < best_dist)) {
        best = g;
        best_dist = d;
      }
    }
    if (best != gt.size()) {
      taken[best] = true;
      ranked_hit[r] = true;
      ++s.matches;
    }
  }
  s.false_negatives = static_cast<int>(gt.size()) - s.matches;
  s.false_positives = static_cast<int>(pred.size()) - s.matches;

  const int denom = s.matches + s.false_negatives + s.false_positives;
  // Nothing to detect and nothing detected: every frame is a true negative.
  s.accuracy = denom == 0 ? 1.0 : static_cast<double>(s.matches) / denom;

  if (gt.empty()) {
    s.average_precision = pred.empty() ? 1.0 : 0.0;
    return s;
  }
  int tp = 0;
  double prev_recall = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (!ranked_hit[r]) continue;
    ++tp;
    const double recall = static_cast<double>(tp) / static_cast<double>(gt.size());
    const double precision = static_cast<double>(tp) / static_cast<double>(r + 1);
    s.average_precision += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return s;
}

GaussianStats embedding_stats(const EmbeddingSet& set) {
  const Eigen::Index n = set.vectors.rows();
  if (n < 2) throw PreconditionError("embedding_stats: need at least 2 vectors");
  if (!set.vectors.allFinite()) throw PreconditionError("embedding_stats: non-finite values");
  GaussianStats s;
  s.mean = set.vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centred = set.vectors.rowwise() - s.mean.transpose();
  s.covariance = centred.transpose() * centred / static_cast<double>(n - 1);
  return s;
}

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw PreconditionError("trace_sqrt_product: shape mismatch");
  const Eigen::MatrixXd root_a = psd_sqrt(a);
  const Eigen::MatrixXd m = root_a * b * root_a;
  const SymmetricEigen<double> eig = jacobi_eigen(m);
  const double scale = std::max(1.0, eig.eigenvalues.maxCoeff());
  if (eig.eigenvalues.minCoeff() < -1e-10 * scale)
    throw NumericError("trace_sqrt_product: product is indefinite beyond tolerance");
  return eig.eigenvalues.cwiseMax(0.0).cwiseSqrt().sum();
}

double frechet_distance(const GaussianStats& r, const GaussianStats& g) {
  if (r.mean.size() != g.mean.size()) throw PreconditionError("frechet_distance: dimension mismatch");
  const double mean_term = (r.mean - g.mean).squaredNorm();
  const double trace_term = r.covariance.trace() + g.covariance.trace() -
                            2.0 * trace_sqrt_product(r.covariance, g.covariance);
  const double d = mean_term + trace_term;
  const double scale = std::max({1.0, r.covariance.trace(), g.covariance.trace()});
  if (d < -1e-8 * scale) throw NumericError("frechet_distance: negative distance beyond tolerance");
  return std::max(d, 0.0);
}

double frechet_distance(const EmbeddingSet& r, const EmbeddingSet& g) {
  if (r.vectors.cols() != g.vectors.cols())
    throw PreconditionError("frechet_distance: dimension mismatch");
  return frechet_distance(embedding_stats(r), embedding_stats(g));
}

double cosine_score(const Eigen::VectorXd& e, const Eigen::VectorXd& e_hat) {
  if (e.size() != e_hat.size()) throw PreconditionError("cosine_score: dimension mismatch");
  const double ne = e.norm();
  const double nh = e_hat.norm();
  if (ne == 0.0 || nh == 0.0) throw PreconditionError("cosine_score: zero-norm vector");
  return std::clamp(e.dot(e_hat) / (ne * nh), -1.0, 1.0);
}

}  // namespace foley
