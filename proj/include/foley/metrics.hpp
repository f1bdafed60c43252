#pragma once

#include "foley/types.hpp"

#include <optional>
#include <vector>

namespace foley {

/// Mean absolute difference between two equal-length curves.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar e_l1(const Eigen::MatrixBase<DerivedA>& gt,
                               const Eigen::MatrixBase<DerivedB>& pred) {
  if (gt.size() != pred.size()) throw PreconditionError("e_l1: length mismatch");
  if (gt.size() == 0) throw PreconditionError("e_l1: empty curves");
  return (gt - pred).cwiseAbs().sum() / static_cast<typename DerivedA::Scalar>(gt.size());
}

double e_l1(const RmsCurve& gt, const RmsCurve& pred);

/// E-L1 restricted to frames where gt > threshold. nullopt when no frame
/// qualifies.
std::optional<double> e_l1_event(const RmsCurve& gt, const RmsCurve& pred, double threshold = 0.05);

/// Fraction of frames with |gt - pred| <= tol_bins, ignoring frames where
/// both curves sit in the silence bin. nullopt when every frame is ignored.
std::optional<double> rms_accuracy(const QuantCurve& gt, const QuantCurve& pred, int tol_bins);

/// Pooled variant over several curve pairs (each frame counts once).
std::optional<double> rms_accuracy(const std::vector<QuantCurve>& gt,
                                   const std::vector<QuantCurve>& pred, int tol_bins);

/// Half-wave rectified first difference of the curve, scaled so its maximum
/// is 1. Frame 0 has no predecessor and scores 0.
Eigen::VectorXd onset_confidence(const RmsCurve& c);

struct Onset {
  double time = 0.0;  // seconds
  double confidence = 0.0;
};
using OnsetList = std::vector<Onset>;

/// Keeps frame i when conf_i >= threshold and no other frame closer than
/// window_ms beats it (ties go to the earlier frame). Kept onsets are
/// therefore at least window_ms apart.
OnsetList nms_peaks(const Eigen::VectorXd& confidence, double window_ms, double frame_rate,
                    double threshold = 0.0);

struct OnsetScores {
  double accuracy = 0.0;
  double average_precision = 0.0;
  int matches = 0;
  int false_negatives = 0;
  int false_positives = 0;
};

/// Greedy one-to-one matching of predictions (by descending confidence) to
/// ground-truth onsets within +-tol_s. Accuracy is
/// matches / (matches + FN + FP); AP integrates precision over recall steps
/// of the confidence-ranked predictions.
OnsetScores onset_metrics(const OnsetList& gt, const OnsetList& pred, double tol_s = 0.1);

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased (N - 1)
};

GaussianStats embedding_stats(const EmbeddingSet& set);

/// tr(sqrt(a * b)) for symmetric PSD a, b via the eigenvalues of
/// sqrt(a) b sqrt(a).
double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Frechet distance between Gaussian fits of two embedding sets:
/// |mu_r - mu_g|^2 + tr(S_r + S_g - 2 sqrt(S_r S_g)).
double frechet_distance(const EmbeddingSet& r, const EmbeddingSet& g);
double frechet_distance(const GaussianStats& r, const GaussianStats& g);

/// Cosine similarity of two embedding vectors.
double cosine_score(const Eigen::VectorXd& e, const Eigen::VectorXd& e_hat);

}  // namespace foley
