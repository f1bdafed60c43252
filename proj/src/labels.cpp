#include "foley/labels.hpp"

#include <cmath>

namespace foley {

LabelMatrix make_gls_targets(const QuantCurve& q, int window, double sigma) {
  if (window < 0) throw PreconditionError("make_gls_targets: window must be >= 0");
  if (!(sigma > 0.0)) throw PreconditionError("make_gls_targets: sigma must be positive");
  if (q.n_bins < 2) throw PreconditionError("make_gls_targets: need at least 2 bins");

  const int k = q.n_bins;
  LabelMatrix out;
  out.smoothing_window = window;
  out.sigma = sigma;
  out.rows.setZero(q.size(), k);

  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const int gt = q.bins[i];
    if (gt < 0 || gt >= k) throw PreconditionError("make_gls_targets: bin index out of range");
    if (gt == 0 || window == 0) {
      out.rows(i, gt) = 1.0;
      continue;
    }
    // Truncated at the codebook edges; the silence bin never receives mass
    // from a non-silent frame.
    const int lo = std::max(1, gt - window);
    const int hi = std::min(k - 1, gt + window);
    double total = 0.0;
    for (int b = lo; b <= hi; ++b) {
      const double d = b - gt;
      const double weight = std::exp(-d * d / (2.0 * sigma * sigma));
      out.rows(i, b) = weight;
      total += weight;
    }
    out.rows.row(i) /= total;
  }
  return out;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

LossResult cross_entropy_loss(const Eigen::MatrixXd& logits, const LabelMatrix& targets) {
  if (logits.rows() != targets.frames() || logits.cols() != targets.n_bins())
    throw PreconditionError("cross_entropy_loss: logits and targets differ in shape");
  if (logits.rows() == 0) throw PreconditionError("cross_entropy_loss: no frames");

  const double frames = static_cast<double>(logits.rows());
  const Eigen::MatrixXd log_p = log_softmax_rows(logits);

  LossResult r;
  double total = 0.0;
  for (Eigen::Index i = 0; i < log_p.rows(); ++i) {
    for (Eigen::Index b = 0; b < log_p.cols(); ++b) {
      const double y = targets.rows(i, b);
      if (y != 0.0) total -= y * log_p(i, b);
    }
  }
  r.loss = total / frames;
  r.gradient = (log_p.array().exp().matrix() - targets.rows) / frames;
  return r;
}

LossResult l2_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) throw PreconditionError("l2_loss: length mismatch");
  if (pred.size() == 0) throw PreconditionError("l2_loss: empty curves");
  const double n = static_cast<double>(pred.size());
  const Eigen::VectorXd diff = pred - target;
  return {diff.squaredNorm() / n, 2.0 * diff / n};
}

LossResult l2_loss(const RmsCurve& pred, const RmsCurve& target) {
  return l2_loss(pred.values, target.values);
}

}  // namespace foley
